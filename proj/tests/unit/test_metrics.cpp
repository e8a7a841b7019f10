#include <doctest.h>

#include <algorithm>

#include "aes/error.hpp"
#include "aes/metrics.hpp"
#include "aes/rng.hpp"
#include "oracles.hpp"

using aes::metrics::qwk;

TEST_SUITE("metrics") {
    TEST_CASE("hand case truth (1,3) vs prediction (2,3)") {
        // O: 1/2 at (1,2) and (3,3). E from marginals {1:1/2, 3:1/2} x {2:1/2, 3:1/2}.
        // sum wO = 1/2 * 1/25 = 0.02; sum wE = 1/4 * (1 + 4 + 1 + 0)/25 = 0.06.
        const std::vector<int> t{1, 3}, p{2, 3};
        CHECK(qwk(t, p) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(oracle::qwk(t, p) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    }

    TEST_CASE("weight matrix") {
        const auto ctx = aes::metrics::qwk_context(std::vector<int>{1, 6}, std::vector<int>{1, 6});
        CHECK(ctx.weights[0][5] == 1.0);
        for (int i = 0; i < 6; ++i) {
            CHECK(ctx.weights[i][i] == 0.0);
            for (int j = 0; j < 6; ++j) {
                CHECK(ctx.weights[i][j] == ctx.weights[j][i]);
                CHECK(ctx.weights[i][j] >= 0.0);
                CHECK(ctx.weights[i][j] <= 1.0);
            }
        }
        double o = 0, e = 0;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                o += ctx.observed[i][j];
                e += ctx.expected[i][j];
            }
        CHECK(std::abs(o - e) <= 1e-12);
    }

    TEST_CASE("perfect agreement, degenerate input and errors") {
        CHECK(qwk(std::vector<int>{1, 2, 3, 6}, std::vector<int>{1, 2, 3, 6}) == 1.0);
        CHECK_THROWS_AS(qwk(std::vector<int>{4, 4, 4}, std::vector<int>{4, 4, 4}), aes::DegenerateQwkError);
        CHECK(qwk(std::vector<int>{3, 3}, std::vector<int>{4, 4}) == 0.0);
        CHECK_THROWS_AS(qwk(std::vector<int>{1, 2}, std::vector<int>{1}), aes::ValidationError);
        CHECK_THROWS_AS(qwk(std::vector<int>{}, std::vector<int>{}), aes::ValidationError);
        CHECK_THROWS_AS(qwk(std::vector<int>{0, 2}, std::vector<int>{1, 2}), aes::ValidationError);
    }

    TEST_CASE("random pairs: oracle, symmetry, permutation invariance, upper bound") {
        aes::Rng rng(2024);
        for (int trial = 0; trial < 300; ++trial) {
            const std::size_t n = 1 + rng.uniform_index(60);
            std::vector<int> t(n), p(n);
            for (std::size_t i = 0; i < n; ++i) {
                t[i] = 1 + static_cast<int>(rng.uniform_index(6));
                p[i] = 1 + static_cast<int>(rng.uniform_index(6));
            }
            double k;
            try {
                k = qwk(t, p);
            } catch (const aes::DegenerateQwkError&) {
                continue;
            }
            CHECK(std::abs(k - oracle::qwk(t, p)) <= 1e-12);
            CHECK(qwk(p, t) == k);
            CHECK(k <= 1.0);
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            rng.shuffle(order);
            std::vector<int> t2(n), p2(n);
            for (std::size_t i = 0; i < n; ++i) {
                t2[i] = t[order[i]];
                p2[i] = p[order[i]];
            }
            CHECK(qwk(t2, p2) == k);
            if (t != p) CHECK(k < 1.0);
        }
    }

    TEST_CASE("confusion and evaluate") {
        const auto c = aes::metrics::confusion(std::vector<int>{2}, std::vector<int>{5});
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) CHECK(c[i][j] == ((i == 1 && j == 4) ? 1u : 0u));

        const std::vector<int> t{1, 2, 2, 3, 6, 6}, p{1, 2, 3, 3, 5, 6};
        const auto r = aes::metrics::evaluate(t, p);
        CHECK(r.n_evaluated == 6);
        CHECK(r.accuracy == doctest::Approx(4.0 / 6.0));
        std::size_t total = 0;
        for (int i = 0; i < 6; ++i) {
            std::size_t row = 0;
            for (int j = 0; j < 6; ++j) row += r.confusion[i][j];
            CHECK(row == r.truth_counts[i]);
            total += row;
        }
        CHECK(total == 6);
        const auto back = aes::metrics::eval_report_from_json(aes::metrics::to_json(r));
        CHECK(back.qwk == r.qwk);
        CHECK(back.confusion == r.confusion);

        const auto perfect = aes::metrics::evaluate(t, t);
        CHECK(perfect.qwk == 1.0);
        CHECK(perfect.accuracy == 1.0);
    }
}
