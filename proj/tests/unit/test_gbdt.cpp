#include <doctest.h>

#include <cmath>
#include <numeric>

#include "aes/error.hpp"
#include "aes/gbdt.hpp"
#include "aes/rng.hpp"
#include "oracles.hpp"

using namespace aes::gbdt;

namespace {

aes::FeatureMatrix matrix(std::size_t rows, std::size_t cols, const std::vector<double>& values,
                          const std::string& prefix = "f") {
    std::vector<std::string> names, ids;
    for (std::size_t c = 0; c < cols; ++c) names.push_back(prefix + std::to_string(c));
    for (std::size_t r = 0; r < rows; ++r) ids.push_back("r" + std::to_string(r));
    return aes::FeatureMatrix(names, ids, values);
}

// Three well separated classes in 10 dimensions; the class shifts the first three features.
void three_class(std::size_t n, std::uint64_t seed, aes::FeatureMatrix& x, std::vector<double>& y) {
    aes::Rng rng(seed);
    std::vector<double> v(n * 10);
    y.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const int cls = static_cast<int>(r % 3);
        y[r] = 2.0 + 2.0 * cls;
        for (std::size_t c = 0; c < 10; ++c) v[r * 10 + c] = rng.normal() + (c < 3 ? 4.0 * cls : 0.0);
    }
    x = matrix(n, 10, v);
}

GbdtConfig small_config() {
    GbdtConfig c;
    c.n_rounds = 20;
    c.min_samples_leaf = 2;
    c.max_leaves = 8;
    c.early_stopping_patience = 0;
    return c;
}

void check_grad_by_differences(Objective obj, const std::vector<double>& raw0, double label) {
    const std::size_t k = raw0.size();
    std::vector<double> g(k), h(k), labels{label};
    grad_hess(obj, raw0, labels, g, h);
    const double step = 1e-5;
    for (std::size_t j = 0; j < k; ++j) {
        auto up = raw0, down = raw0;
        up[j] += step;
        down[j] -= step;
        const double fd = (mean_loss(obj, up, labels) - mean_loss(obj, down, labels)) / (2 * step);
        CHECK(g[j] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        std::vector<double> gu(k), gd(k), hu(k), hd(k);
        grad_hess(obj, up, labels, gu, hu);
        grad_hess(obj, down, labels, gd, hd);
        CHECK(h[j] == doctest::Approx((gu[j] - gd[j]) / (2 * step)).epsilon(1e-5).scale(1.0));
        CHECK(h[j] > 0.0);
    }
}

}  // namespace

TEST_SUITE("gbdt") {
    TEST_CASE("softmax gradient at zero scores") {
        std::vector<double> raw(6, 0.0), g(6), h(6), labels{2.0};
        grad_hess(Objective::multiclass_softmax, raw, labels, g, h);
        for (int k = 0; k < 6; ++k) {
            CHECK(g[k] == doctest::Approx(k == 1 ? 1.0 / 6 - 1 : 1.0 / 6));
            CHECK(h[k] == doctest::Approx(5.0 / 36));
        }
        std::vector<double> one{3.25}, g1(1), h1(1), y{3.25};
        grad_hess(Objective::squared_error, one, y, g1, h1);
        CHECK(g1[0] == 0.0);
        CHECK(h1[0] == 1.0);
    }

    TEST_CASE("gradients and hessians agree with finite differences") {
        aes::Rng rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            const double label = 1 + static_cast<double>(rng.uniform_index(6));
            std::vector<double> r6(6), r5(5), r1{rng.normal() * 3};
            for (auto& v : r6) v = rng.normal() * 2;
            for (auto& v : r5) v = rng.normal() * 2;
            check_grad_by_differences(Objective::multiclass_softmax, r6, label);
            check_grad_by_differences(Objective::ordinal_binary, r5, label);
            check_grad_by_differences(Objective::squared_error, r1, label);
        }
        std::vector<double> z{0, 0, 0, 0, 0, 0};
        CHECK(mean_loss(Objective::multiclass_softmax, z, std::vector<double>{4}) ==
              doctest::Approx(oracle::softmax_loss(z, 4)));
    }

    TEST_CASE("binning of two values and of a constant") {
        const auto two = matrix(4, 2, {0, 5, 1, 5, 0, 5, 1, 5});
        const auto b = build_bins(two, 256);
        CHECK(b.n_bins(0) == 2);
        CHECK(b.cuts[0][0] >= 0.0);
        CHECK(b.cuts[0][0] < 1.0);
        CHECK(b.bin(0, 0.0) == 0);
        CHECK(b.bin(0, 1.0) == 1);
        CHECK(b.n_bins(1) == 1);
        std::vector<double> g{1, -1, 1, -1}, h(4, 1.0);
        std::vector<std::uint32_t> rows{0, 1, 2, 3};
        std::vector<int> only_constant{1};
        CHECK_FALSE(find_best_split(rows, bin_matrix(two, b), b, g, h, only_constant, 0.0, 1, 0.0).has_value());
    }

    TEST_CASE("midpoint cut stays in [lo, hi)") {
        CHECK(midpoint_cut(0.0, 1.0) == 0.5);
        const double lo = 1.0, hi = std::nextafter(1.0, 2.0);
        CHECK(midpoint_cut(lo, hi) == lo);
        CHECK(midpoint_cut(-1e308, 1e308) < 1e308);
    }

    TEST_CASE("quantile bins of 300 distinct values match the exact quantile oracle") {
        aes::Rng rng(3);
        std::vector<double> v(300);
        for (auto& x : v) x = 0.001 + rng.uniform01();
        const auto m = matrix(300, 1, v);
        const auto b = build_bins(m, 256);
        REQUIRE(b.n_bins(0) == 256);
        std::vector<std::size_t> occupancy(256, 0);
        for (double x : v) ++occupancy[b.bin(0, x)];
        for (std::size_t k = 0; k < 256; ++k) {
            const auto lo = static_cast<std::size_t>(std::round(k * 300.0 / 256.0));
            const auto hi = static_cast<std::size_t>(std::round((k + 1) * 300.0 / 256.0));
            CHECK(occupancy[k] == hi - lo);
        }
    }

    TEST_CASE("zero keeps its own bin in quantile mode") {
        std::vector<double> v(600);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = i % 3 == 0 ? 0.0 : static_cast<double>(i) - 300.0;
        const auto b = build_bins(matrix(600, 1, v), 16);
        const auto z = b.bin(0, 0.0);
        CHECK(b.bin(0, -1.0) < z);
        CHECK(b.bin(0, 1.0) > z);
    }

    TEST_CASE("split example with gain 2") {
        const auto m = matrix(4, 1, {0, 0, 1, 1});
        const auto b = build_bins(m, 256);
        const auto d = bin_matrix(m, b);
        std::vector<double> g{1, 1, -1, -1}, h(4, 1.0);
        std::vector<std::uint32_t> rows{0, 1, 2, 3};
        std::vector<int> feats{0};
        const auto s = find_best_split(rows, d, b, g, h, feats, 0.0, 1, 0.0);
        REQUIRE(s.has_value());
        CHECK(s->gain == 2.0);
        CHECK(s->feature == 0);
        CHECK(s->threshold >= 0.0);
        CHECK(s->threshold < 1.0);
        CHECK(s->left_count == 2);

        std::vector<double> same(4, 1.0);
        CHECK_FALSE(find_best_split(rows, d, b, same, h, feats, 0.0, 1, 1e-12).has_value());
        CHECK_FALSE(find_best_split(rows, d, b, g, h, feats, 0.0, 3, 0.0).has_value());
    }

    TEST_CASE("split finder agrees with exhaustive enumeration") {
        aes::Rng rng(101);
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t n = 30, f = 4;
            std::vector<double> v(n * f);
            std::vector<std::vector<double>> x(n, std::vector<double>(f));
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < f; ++c) {
                    // A few columns are mostly zero to exercise the sparse path.
                    const bool sparse_col = c == 3 && rng.uniform01() < 0.7;
                    v[r * f + c] = x[r][c] = sparse_col ? 0.0 : static_cast<double>(rng.uniform_index(9)) / 4.0;
                }
            std::vector<double> g(n), h(n);
            for (std::size_t r = 0; r < n; ++r) {
                g[r] = (static_cast<double>(rng.uniform_index(33)) - 16.0) / 8.0;
                h[r] = static_cast<double>(1 + rng.uniform_index(8)) / 8.0;
            }
            const auto m = matrix(n, f, v);
            const auto b = build_bins(m, 256);
            const auto d = bin_matrix(m, b);
            std::vector<std::uint32_t> rows(n);
            std::iota(rows.begin(), rows.end(), 0u);
            std::vector<int> feats{0, 1, 2, 3};
            const auto got = find_best_split(rows, d, b, g, h, feats, 1.0, 3, 0.0);
            const auto want = oracle::best_split(x, g, h, 1.0, 3);
            if (!want || want->gain < 0.0) {
                CHECK((!got || got->gain == 0.0));
                continue;
            }
            REQUIRE(got.has_value());
            CHECK(got->feature == want->feature);
            CHECK(std::abs(got->gain - want->gain) <= 1e-12);
            CHECK(got->threshold >= want->lo);
            CHECK(got->threshold < want->hi);
        }
    }

    TEST_CASE("separable two-class data is fitted within ten rounds") {
        std::vector<double> v, y;
        for (int i = 0; i < 40; ++i) {
            v.push_back(i);
            y.push_back(i < 20 ? 2.0 : 5.0);
        }
        const auto m = matrix(40, 1, v);
        auto c = small_config();
        c.n_rounds = 10;
        const auto forest = train(m, y, c);
        const auto labels = predict_labels(forest, m);
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(labels[i] == static_cast<int>(y[i]));
    }

    TEST_CASE("zero learning rate and zero rounds predict the base score") {
        aes::FeatureMatrix x;
        std::vector<double> y;
        three_class(60, 4, x, y);
        auto c = small_config();
        c.learning_rate = 0.0;
        const auto f = train(x, y, c);
        for (const auto& t : f.trees)
            for (const auto& node : t.nodes)
                if (node.is_leaf()) CHECK(node.value == 0.0);
        for (const auto& p : predict_proba(f, x))
            for (double q : p) CHECK(q == doctest::Approx(1.0 / 6).epsilon(1e-15));
        c.learning_rate = 0.1;
        c.n_rounds = 0;
        const auto empty = train(x, y, c);
        CHECK(empty.n_rounds() == 0);
        for (const auto& p : predict_proba(empty, x))
            for (double q : p) CHECK(q == 1.0 / 6);

        auto reg = small_config();
        reg.objective = Objective::squared_error;
        reg.learning_rate = 0.0;
        const auto rf = train(x, y, reg);
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
        for (double p : predict_continuous(rf, x)) CHECK(p == doctest::Approx(mean).epsilon(1e-15));
    }

    TEST_CASE("training is deterministic for every preset") {
        aes::FeatureMatrix x;
        std::vector<double> y;
        three_class(150, 8, x, y);
        for (const char* name : {"xgb-like", "lgbm-like"}) {
            auto c = GbdtConfig::preset(name);
            c.n_rounds = 15;
            c.min_samples_leaf = 3;
            c.early_stopping_patience = 0;
            CHECK(train(x, y, c).to_json().dump() == train(x, y, c).to_json().dump());
        }
    }

    TEST_CASE("outputs, logged losses and node invariants") {
        aes::FeatureMatrix x;
        std::vector<double> y;
        three_class(120, 12, x, y);
        for (auto obj : {Objective::multiclass_softmax, Objective::ordinal_binary, Objective::squared_error}) {
            auto c = small_config();
            c.objective = obj;
            const auto f = train(x, y, c);
            CHECK(f.n_rounds() == 20);
            const auto raw = predict_raw(f, x);
            CHECK(std::abs(f.log.back().train_loss - mean_loss(obj, raw, y)) <= 1e-9);
            for (std::size_t i = 1; i < f.log.size(); ++i) CHECK(f.log[i].train_loss <= f.log[i - 1].train_loss + 1e-9);
            if (obj != Objective::squared_error) {
                for (const auto& p : predict_proba(f, x)) {
                    double s = 0;
                    for (double q : p) {
                        CHECK(q >= 0.0);
                        s += q;
                    }
                    CHECK(std::abs(s - 1.0) <= 1e-9);
                }
            }
            for (const auto& t : f.trees) {
                int leaves = 0;
                for (std::size_t i = 0; i < t.nodes.size(); ++i) {
                    const auto& node = t.nodes[i];
                    if (node.is_leaf()) {
                        ++leaves;
                        CHECK(node.count >= 2);
                        continue;
                    }
                    CHECK(node.left == static_cast<int>(i) + 1);
                    CHECK(node.right > node.left);
                    CHECK(node.count == t.nodes[node.left].count + t.nodes[node.right].count);
                    CHECK(node.gain > 0.0);
                }
                CHECK(leaves <= 8);
            }
            const auto back = Forest::from_json(f.to_json());
            CHECK(predict_raw(back, x) == raw);
        }
    }

    TEST_CASE("depth-wise growth respects max_depth") {
        aes::FeatureMatrix x;
        std::vector<double> y;
        three_class(150, 21, x, y);
        auto c = small_config();
        c.growth = Growth::depth_wise;
        c.max_depth = 2;
        const auto f = train(x, y, c);
        for (const auto& t : f.trees) {
            std::vector<int> depth(t.nodes.size(), 0);
            for (std::size_t i = 0; i < t.nodes.size(); ++i) {
                if (t.nodes[i].is_leaf()) continue;
                depth[t.nodes[i].left] = depth[i] + 1;
                depth[t.nodes[i].right] = depth[i] + 1;
            }
            CHECK(*std::max_element(depth.begin(), depth.end()) <= 2);
        }
    }

    TEST_CASE("schema and input errors") {
        aes::FeatureMatrix x;
        std::vector<double> y;
        three_class(60, 5, x, y);
        const auto f = train(x, y, small_config());
        const auto renamed = matrix(60, 10, x.values(), "g");
        CHECK_THROWS_AS(predict_raw(f, renamed), aes::ValidationError);
        std::vector<double> one_class(60, 3.0);
        CHECK_THROWS_AS(train(x, one_class, small_config()), aes::ValidationError);
        std::vector<double> bad = y;
        bad[0] = 7;
        CHECK_THROWS_AS(train(x, bad, small_config()), aes::ValidationError);
        std::vector<double> short_y(10, 1.0);
        CHECK_THROWS_AS(train(x, short_y, small_config()), aes::ValidationError);
        auto c = small_config();
        c.colsample_per_tree = 0.0;
        CHECK_THROWS_AS(train(x, y, c), aes::ValidationError);
        auto reg = small_config();
        reg.objective = Objective::squared_error;
        CHECK_THROWS_AS(predict_proba(train(x, y, reg), x), aes::ValidationError);
    }

    TEST_CASE("early stopping keeps the best validation round") {
        aes::FeatureMatrix x, vx;
        std::vector<double> y, vy;
        three_class(150, 31, x, y);
        three_class(60, 32, vx, vy);
        auto c = small_config();
        c.n_rounds = 60;
        c.early_stopping_patience = 5;
        ValidationSet valid{&vx, vy};
        const auto f = train(x, y, c, &valid);
        CHECK(f.best_round == f.n_rounds());
        CHECK(f.n_rounds() <= 60);
        CHECK(f.log.size() >= static_cast<std::size_t>(f.best_round));
        double best = -1;
        int arg = 0;
        for (const auto& e : f.log)
            if (e.valid_qwk && *e.valid_qwk > best) {
                best = *e.valid_qwk;
                arg = e.round;
            }
        CHECK(arg == f.best_round);
    }
}
