#include "aes/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

#include "aes/error.hpp"
#include "aes/metrics.hpp"
#include "aes/ordinal.hpp"
#include "aes/parallel.hpp"
#include "aes/rng.hpp"
#include "aes/version.hpp"

namespace aes::gbdt {

const char* to_string(Objective o) {
    switch (o) {
    case Objective::multiclass_softmax: return "multiclass_softmax";
    case Objective::ordinal_binary: return "ordinal_binary";
    case Objective::squared_error: return "squared_error";
    }
    return "?";
}

const char* to_string(Growth g) { return g == Growth::leaf_wise ? "leaf_wise" : "depth_wise"; }

Objective objective_from_string(const std::string& s) {
    if (s == "multiclass_softmax" || s == "softmax") {
        return Objective::multiclass_softmax;
    }
    if (s == "ordinal_binary" || s == "ordinal") {
        return Objective::ordinal_binary;
    }
    if (s == "squared_error" || s == "regression") {
        return Objective::squared_error;
    }
    throw ValidationError("unknown objective '" + s + "'");
}

Growth growth_from_string(const std::string& s) {
    if (s == "leaf_wise") {
        return Growth::leaf_wise;
    }
    if (s == "depth_wise") {
        return Growth::depth_wise;
    }
    throw ValidationError("unknown growth '" + s + "'");
}

int trees_per_round(Objective o) {
    switch (o) {
    case Objective::multiclass_softmax: return 6;
    case Objective::ordinal_binary: return ordinal::kThresholds;
    case Objective::squared_error: return 1;
    }
    return 1;
}

void GbdtConfig::validate() const {
    auto fail = [](const std::string& what) { throw ValidationError("gbdt config: " + what); };
    if (n_rounds < 0) fail("n_rounds must be >= 0");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be finite and >= 0");
    if (growth == Growth::depth_wise && max_depth <= 0) fail("depth-wise growth needs max_depth > 0");
    if (growth == Growth::leaf_wise && max_leaves == 1) fail("max_leaves must be >= 2");
    if (max_bins < 2 || max_bins > 256) fail("max_bins must be in [2, 256]");
    if (min_samples_leaf < 1) fail("min_samples_leaf must be >= 1");
    if (!(lambda_l2 >= 0.0)) fail("lambda_l2 must be >= 0");
    if (!(min_gain >= 0.0)) fail("min_gain must be >= 0");
    if (!(colsample_per_tree > 0.0 && colsample_per_tree <= 1.0)) fail("colsample_per_tree must be in (0, 1]");
    if (goss.enabled) {
        if (!(goss.top_fraction > 0.0 && goss.top_fraction < 1.0)) fail("goss top_fraction must be in (0, 1)");
        if (!(goss.other_fraction > 0.0 && goss.other_fraction < 1.0)) fail("goss other_fraction must be in (0, 1)");
        if (goss.top_fraction + goss.other_fraction > 1.0) fail("goss fractions must sum to <= 1");
    }
    if (early_stopping_patience < 0) fail("early_stopping_patience must be >= 0");
}

GbdtConfig GbdtConfig::xgb_like() {
    GbdtConfig c;
    c.growth = Growth::depth_wise;
    c.max_depth = 6;
    c.max_leaves = 0;
    c.colsample_per_tree = 0.8;
    c.goss.enabled = false;
    return c;
}

GbdtConfig GbdtConfig::lgbm_like() {
    GbdtConfig c;
    c.growth = Growth::leaf_wise;
    c.max_leaves = 31;
    c.max_depth = -1;
    c.colsample_per_tree = 1.0;
    c.goss = {true, 0.2, 0.1};
    return c;
}

GbdtConfig GbdtConfig::preset(const std::string& name) {
    if (name == "xgb-like") {
        return xgb_like();
    }
    if (name == "lgbm-like") {
        return lgbm_like();
    }
    throw ValidationError("unknown gbdt preset '" + name + "' (expected xgb-like or lgbm-like)");
}

nlohmann::json GbdtConfig::to_json() const {
    return {
        {"objective", to_string(objective)},
        {"n_rounds", n_rounds},
        {"learning_rate", learning_rate},
        {"growth", to_string(growth)},
        {"max_leaves", max_leaves},
        {"max_depth", max_depth},
        {"max_bins", max_bins},
        {"min_samples_leaf", min_samples_leaf},
        {"lambda_l2", lambda_l2},
        {"min_gain", min_gain},
        {"colsample_per_tree", colsample_per_tree},
        {"goss", {{"enabled", goss.enabled}, {"top_fraction", goss.top_fraction}, {"other_fraction", goss.other_fraction}}},
        {"seed", seed},
        {"early_stopping_patience", early_stopping_patience},
    };
}

GbdtConfig GbdtConfig::from_json(const nlohmann::json& j) {
    try {
        GbdtConfig c;
        c.objective = objective_from_string(j.at("objective").get<std::string>());
        c.n_rounds = j.at("n_rounds").get<int>();
        c.learning_rate = j.at("learning_rate").get<double>();
        c.growth = growth_from_string(j.at("growth").get<std::string>());
        c.max_leaves = j.at("max_leaves").get<int>();
        c.max_depth = j.at("max_depth").get<int>();
        c.max_bins = j.at("max_bins").get<int>();
        c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
        c.lambda_l2 = j.at("lambda_l2").get<double>();
        c.min_gain = j.at("min_gain").get<double>();
        c.colsample_per_tree = j.at("colsample_per_tree").get<double>();
        const auto& g = j.at("goss");
        c.goss = {g.at("enabled").get<bool>(), g.at("top_fraction").get<double>(), g.at("other_fraction").get<double>()};
        c.seed = j.at("seed").get<std::uint64_t>();
        c.early_stopping_patience = j.at("early_stopping_patience").get<int>();
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed gbdt config: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Objectives

namespace {

int class_index(double label, std::size_t row) {
    const double r = std::round(label);
    if (r != label || r < 1 || r > 6) {
        std::ostringstream os;
        os << "label " << label << " at row " << row << " is not a score in 1..6";
        throw ValidationError(os.str());
    }
    return static_cast<int>(r) - 1;
}

}  // namespace

void grad_hess(Objective objective, std::span<const double> raw, std::span<const double> labels,
               std::span<double> grad, std::span<double> hess) {
    const auto k = static_cast<std::size_t>(trees_per_round(objective));
    const std::size_t n = labels.size();
    if (raw.size() != n * k || grad.size() != n * k || hess.size() != n * k) {
        throw ValidationError("grad_hess: buffer sizes do not match labels");
    }
    switch (objective) {
    case Objective::multiclass_softmax: {
        std::array<double, 6> p{};
        for (std::size_t i = 0; i < n; ++i) {
            const int y = class_index(labels[i], i);
            softmax(raw.subspan(i * k, k), p);
            for (std::size_t c = 0; c < k; ++c) {
                grad[i * k + c] = p[c] - (static_cast<int>(c) == y ? 1.0 : 0.0);
                hess[i * k + c] = p[c] * (1.0 - p[c]);
            }
        }
        break;
    }
    case Objective::ordinal_binary: {
        for (std::size_t i = 0; i < n; ++i) {
            const auto code = ordinal::encode(class_index(labels[i], i) + 1);
            for (std::size_t t = 0; t < k; ++t) {
                const double p = sigmoid(raw[i * k + t]);
                grad[i * k + t] = p - code[t];
                hess[i * k + t] = p * (1.0 - p);
            }
        }
        break;
    }
    case Objective::squared_error:
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = raw[i] - labels[i];
            hess[i] = 1.0;
        }
        break;
    }
}

namespace {

/// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double mean_loss(Objective objective, std::span<const double> raw, std::span<const double> labels) {
    const auto k = static_cast<std::size_t>(trees_per_round(objective));
    const std::size_t n = labels.size();
    if (n == 0) {
        return 0.0;
    }
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto z = raw.subspan(i * k, k);
        switch (objective) {
        case Objective::multiclass_softmax: {
            const int y = class_index(labels[i], i);
            double hi = z[0];
            for (double v : z) hi = std::max(hi, v);
            double s = 0;
            for (double v : z) s += std::exp(v - hi);
            total += hi + std::log(s) - z[static_cast<std::size_t>(y)];
            break;
        }
        case Objective::ordinal_binary: {
            const auto code = ordinal::encode(class_index(labels[i], i) + 1);
            for (std::size_t t = 0; t < k; ++t) {
                // -[y log s(z) + (1-y) log(1-s(z))] = softplus(z) - y z
                total += softplus(z[t]) - code[t] * z[t];
            }
            break;
        }
        case Objective::squared_error: {
            const double d = z[0] - labels[i];
            total += 0.5 * d * d;
            break;
        }
        }
    }
    return total / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Binning

double midpoint_cut(double lo, double hi) {
    double m = lo + (hi - lo) / 2.0;
    if (!(m < hi) || !(m >= lo)) {
        m = lo;
    }
    return m;
}

std::uint8_t HistogramBinning::bin(std::size_t feature, double x) const {
    const auto& c = cuts[feature];
    return static_cast<std::uint8_t>(std::lower_bound(c.begin(), c.end(), x) - c.begin());
}

HistogramBinning build_bins(const FeatureMatrix& train, int max_bins) {
    if (train.rows() == 0 || train.cols() == 0) {
        throw ValidationError("cannot bin an empty feature matrix");
    }
    if (max_bins < 2 || max_bins > 256) {
        throw ValidationError("max_bins must be in [2, 256]");
    }
    HistogramBinning binning;
    binning.max_bins = max_bins;
    binning.cuts.resize(train.cols());
    const std::size_t n = train.rows();

    parallel_for(train.cols(), [&](std::size_t f) {
        std::vector<double> values(n);
        for (std::size_t r = 0; r < n; ++r) {
            values[r] = train(r, f);
            if (!std::isfinite(values[r])) {
                throw ValidationError("non-finite value in feature '" + train.column_names()[f] + "' at row " +
                                      std::to_string(r));
            }
        }
        std::sort(values.begin(), values.end());
        std::vector<double> distinct;
        std::vector<std::size_t> cumulative;  // rows with value <= distinct[i]
        for (std::size_t r = 0; r < n; ++r) {
            if (distinct.empty() || values[r] != distinct.back()) {
                distinct.push_back(values[r]);
                cumulative.push_back(0);
            }
            cumulative.back() = r + 1;
        }
        const std::size_t m = distinct.size();
        auto& cuts = binning.cuts[f];
        if (m <= static_cast<std::size_t>(max_bins)) {
            for (std::size_t i = 0; i + 1 < m; ++i) {
                cuts.push_back(midpoint_cut(distinct[i], distinct[i + 1]));
            }
            return;
        }

        // Quantile mode: choose "cut after distinct[i]" indices.
        std::vector<std::size_t> after;
        auto zero = std::lower_bound(distinct.begin(), distinct.end(), 0.0);
        if (zero != distinct.end() && *zero == 0.0) {
            const auto z = static_cast<std::size_t>(zero - distinct.begin());
            if (z > 0) after.push_back(z - 1);
            if (z + 1 < m) after.push_back(z);
        }
        const std::size_t bins = static_cast<std::size_t>(max_bins) - after.size();
        std::size_t i = 0;
        for (std::size_t k = 1; k < bins; ++k) {
            const auto target = static_cast<std::size_t>(
                std::llround(static_cast<double>(k) * static_cast<double>(n) / static_cast<double>(bins)));
            while (i + 1 < m && cumulative[i] < target) {
                ++i;
            }
            if (i + 1 < m) {
                after.push_back(i);
            }
        }
        std::sort(after.begin(), after.end());
        after.erase(std::unique(after.begin(), after.end()), after.end());
        for (auto a : after) {
            cuts.push_back(midpoint_cut(distinct[a], distinct[a + 1]));
        }
    });
    return binning;
}

BinnedData bin_matrix(const FeatureMatrix& m, const HistogramBinning& binning) {
    if (m.cols() != binning.n_features()) {
        throw ValidationError("feature count differs from binning");
    }
    BinnedData d;
    d.n_rows = m.rows();
    d.n_features = m.cols();
    d.bins.resize(d.n_rows * d.n_features);
    d.sparse.assign(d.n_features, false);
    d.zero_bin.assign(d.n_features, 0);
    d.nonzero.resize(d.n_features);
    parallel_for(d.n_features, [&](std::size_t f) {
        std::size_t zeros = 0;
        for (std::size_t r = 0; r < d.n_rows; ++r) {
            const double x = m(r, f);
            d.bins[f * d.n_rows + r] = binning.bin(f, x);
            zeros += x == 0.0 ? 1 : 0;
        }
        d.zero_bin[f] = binning.bin(f, 0.0);
        if (d.n_rows > 0 && zeros * 2 >= d.n_rows) {
            d.sparse[f] = true;
            for (std::size_t r = 0; r < d.n_rows; ++r) {
                if (m(r, f) != 0.0) {
                    d.nonzero[f].emplace_back(static_cast<std::uint32_t>(r), d.bins[f * d.n_rows + r]);
                }
            }
        }
    });
    return d;
}

// ---------------------------------------------------------------------------
// Histograms and split scan

namespace {

struct Histogram {
    std::vector<double> grad;
    std::vector<double> hess;
    std::vector<std::size_t> count;

    void reset(int n_bins) {
        grad.assign(static_cast<std::size_t>(n_bins), 0.0);
        hess.assign(static_cast<std::size_t>(n_bins), 0.0);
        count.assign(static_cast<std::size_t>(n_bins), 0);
    }
};

struct NodeTotals {
    double grad = 0;
    double hess = 0;
    std::size_t count = 0;
};

NodeTotals totals_of(std::span<const std::uint32_t> rows, std::span<const double> grad, std::span<const double> hess) {
    NodeTotals t;
    for (auto r : rows) {
        t.grad += grad[r];
        t.hess += hess[r];
    }
    t.count = rows.size();
    return t;
}

void dense_histogram(Histogram& hist, std::span<const std::uint32_t> rows, const std::uint8_t* column,
                     std::span<const double> grad, std::span<const double> hess) {
    for (auto r : rows) {
        const auto b = column[r];
        hist.grad[b] += grad[r];
        hist.hess[b] += hess[r];
        ++hist.count[b];
    }
}

/// Sums nonzero entries of rows owned by `node`, then assigns the remainder to the zero bin.
void sparse_histogram(Histogram& hist, const std::vector<std::pair<std::uint32_t, std::uint8_t>>& nonzero,
                      std::uint8_t zero_bin, std::span<const int> node_of, int node, const NodeTotals& totals,
                      std::span<const double> grad, std::span<const double> hess) {
    for (auto [r, b] : nonzero) {
        if (node_of[r] == node) {
            hist.grad[b] += grad[r];
            hist.hess[b] += hess[r];
            ++hist.count[b];
        }
    }
    double g = 0, h = 0;
    std::size_t c = 0;
    for (std::size_t b = 0; b < hist.grad.size(); ++b) {
        g += hist.grad[b];
        h += hist.hess[b];
        c += hist.count[b];
    }
    hist.grad[zero_bin] += totals.grad - g;
    hist.hess[zero_bin] += totals.hess - h;
    hist.count[zero_bin] += totals.count - c;
}

/// Best boundary of one feature; strict improvement keeps the lowest threshold on ties.
std::optional<SplitCandidate> scan_histogram(const Histogram& hist, int feature, const std::vector<double>& cuts,
                                             const NodeTotals& totals, double lambda, int min_samples_leaf) {
    const std::size_t nb = hist.grad.size();
    if (nb < 2) {
        return std::nullopt;
    }
    const double parent_den = totals.hess + lambda;
    if (!(parent_den > 0)) {
        return std::nullopt;
    }
    const double parent = totals.grad * totals.grad / parent_den;

    std::vector<double> suffix_g(nb + 1, 0.0), suffix_h(nb + 1, 0.0);
    std::vector<std::size_t> suffix_c(nb + 1, 0);
    for (std::size_t b = nb; b-- > 0;) {
        suffix_g[b] = suffix_g[b + 1] + hist.grad[b];
        suffix_h[b] = suffix_h[b + 1] + hist.hess[b];
        suffix_c[b] = suffix_c[b + 1] + hist.count[b];
    }
    const auto min_leaf = static_cast<std::size_t>(min_samples_leaf);
    std::optional<SplitCandidate> best;
    double gl = 0, hl = 0;
    std::size_t cl = 0;
    for (std::size_t b = 0; b + 1 < nb; ++b) {
        gl += hist.grad[b];
        hl += hist.hess[b];
        cl += hist.count[b];
        const double gr = suffix_g[b + 1];
        const double hr = suffix_h[b + 1];
        const std::size_t cr = suffix_c[b + 1];
        if (cl < min_leaf || cr < min_leaf) {
            continue;
        }
        const double dl = hl + lambda;
        const double dr = hr + lambda;
        if (!(dl > 0) || !(dr > 0)) {
            continue;
        }
        const double gain = 0.5 * (gl * gl / dl + gr * gr / dr - parent);
        if (!best || gain > best->gain) {
            best = SplitCandidate{feature, static_cast<int>(b), cuts[b], gain, gl, hl, gr, hr, cl, cr};
        }
    }
    return best;
}

bool better(const std::optional<SplitCandidate>& candidate, const std::optional<SplitCandidate>& incumbent) {
    return candidate && (!incumbent || candidate->gain > incumbent->gain);
}

}  // namespace

std::optional<SplitCandidate> find_best_split(std::span<const std::uint32_t> rows, const BinnedData& data,
                                              const HistogramBinning& binning, std::span<const double> grad,
                                              std::span<const double> hess, std::span<const int> candidate_features,
                                              double lambda_l2, int min_samples_leaf, double min_gain) {
    if (rows.size() < 2 * static_cast<std::size_t>(min_samples_leaf)) {
        return std::nullopt;
    }
    std::vector<int> features(candidate_features.begin(), candidate_features.end());
    std::sort(features.begin(), features.end());
    const NodeTotals totals = totals_of(rows, grad, hess);
    std::optional<SplitCandidate> best;
    Histogram hist;
    for (int f : features) {
        const auto fu = static_cast<std::size_t>(f);
        hist.reset(binning.n_bins(fu));
        dense_histogram(hist, rows, data.bins.data() + fu * data.n_rows, grad, hess);
        auto c = scan_histogram(hist, f, binning.cuts[fu], totals, lambda_l2, min_samples_leaf);
        if (better(c, best)) {
            best = c;
        }
    }
    if (best && best->gain < min_gain) {
        return std::nullopt;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Trees

double Tree::predict(std::span<const double> row) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

struct GrowNode {
    TreeNode node;
    int split_bin = -1;
    int depth = 0;
    std::vector<std::uint32_t> rows;  ///< sampled rows
    NodeTotals totals;
    std::optional<SplitCandidate> split;
    bool evaluated = false;
};

class TreeGrower {
public:
    TreeGrower(const BinnedData& data, const HistogramBinning& binning, const GbdtConfig& config,
               std::span<const double> grad, std::span<const double> hess, std::vector<int> features)
        : data_(data), binning_(binning), config_(config), grad_(grad), hess_(hess), features_(std::move(features)),
          node_of_(data.n_rows, -1) {}

    /// Grows one tree over `sampled` rows; returns creation-order nodes.
    std::vector<GrowNode> grow(std::vector<std::uint32_t> sampled) {
        nodes_.clear();
        GrowNode root;
        root.rows = std::move(sampled);
        nodes_.push_back(std::move(root));
        if (config_.growth == Growth::leaf_wise) {
            grow_leaf_wise();
        } else {
            grow_depth_wise();
        }
        for (auto& n : nodes_) {
            if (n.node.is_leaf()) {
                const double den = n.totals.hess + config_.lambda_l2;
                n.node.value = den > 0 ? -n.totals.grad / den * config_.learning_rate : 0.0;
                if (!std::isfinite(n.node.value)) {
                    throw NumericError("non-finite leaf weight");
                }
            }
            n.node.count = n.rows.size();
        }
        return std::move(nodes_);
    }

private:
    void evaluate(std::size_t id) {
        auto& n = nodes_[id];
        n.evaluated = true;
        n.totals = totals_of(n.rows, grad_, hess_);
        if (config_.max_depth > 0 && n.depth >= config_.max_depth) {
            return;
        }
        if (n.rows.size() < 2 * static_cast<std::size_t>(config_.min_samples_leaf)) {
            return;
        }
        for (auto r : n.rows) {
            node_of_[r] = static_cast<int>(id);
        }
        std::vector<std::optional<SplitCandidate>> per_feature(features_.size());
        const auto& rows = n.rows;
        const auto totals = n.totals;
        parallel_for(features_.size(), [&](std::size_t i) {
            const auto f = static_cast<std::size_t>(features_[i]);
            Histogram hist;
            hist.reset(binning_.n_bins(f));
            if (data_.sparse[f]) {
                sparse_histogram(hist, data_.nonzero[f], data_.zero_bin[f], node_of_, static_cast<int>(id), totals,
                                 grad_, hess_);
            } else {
                dense_histogram(hist, rows, data_.bins.data() + f * data_.n_rows, grad_, hess_);
            }
            per_feature[i] = scan_histogram(hist, features_[i], binning_.cuts[f], totals, config_.lambda_l2,
                                            config_.min_samples_leaf);
        });
        std::optional<SplitCandidate> best;
        for (auto& c : per_feature) {
            if (better(c, best)) {
                best = c;
            }
        }
        // Zero-gain splits change nothing; require a strict improvement as well as min_gain.
        if (best && best->gain >= config_.min_gain && best->gain > 0.0) {
            nodes_[id].split = best;
        }
    }

    void apply_split(std::size_t id) {
        const SplitCandidate s = *nodes_[id].split;
        GrowNode left, right;
        left.depth = right.depth = nodes_[id].depth + 1;
        const std::uint8_t* column = data_.bins.data() + static_cast<std::size_t>(s.feature) * data_.n_rows;
        for (auto r : nodes_[id].rows) {
            (column[r] <= s.bin ? left.rows : right.rows).push_back(r);
        }
        auto& parent = nodes_[id];
        parent.node.feature = s.feature;
        parent.node.threshold = s.threshold;
        parent.node.gain = s.gain;
        parent.split_bin = s.bin;
        parent.node.left = static_cast<int>(nodes_.size());
        parent.node.right = static_cast<int>(nodes_.size() + 1);
        nodes_.push_back(std::move(left));
        nodes_.push_back(std::move(right));
    }

    void grow_leaf_wise() {
        evaluate(0);
        std::vector<std::size_t> open{0};
        std::size_t leaves = 1;
        while (config_.max_leaves <= 0 || leaves < static_cast<std::size_t>(config_.max_leaves)) {
            std::size_t pick = open.size();
            for (std::size_t i = 0; i < open.size(); ++i) {
                const auto& s = nodes_[open[i]].split;
                if (s && (pick == open.size() || s->gain > nodes_[open[pick]].split->gain)) {
                    pick = i;
                }
            }
            if (pick == open.size()) {
                break;
            }
            const std::size_t id = open[pick];
            open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
            apply_split(id);
            const std::size_t l = static_cast<std::size_t>(nodes_[id].node.left);
            const std::size_t r = static_cast<std::size_t>(nodes_[id].node.right);
            evaluate(l);
            evaluate(r);
            open.push_back(l);
            open.push_back(r);
            std::sort(open.begin(), open.end());
            ++leaves;
        }
    }

    void grow_depth_wise() {
        std::vector<std::size_t> frontier{0};
        std::size_t leaves = 1;
        while (!frontier.empty()) {
            std::vector<std::size_t> next;
            for (auto id : frontier) {
                evaluate(id);
                if (!nodes_[id].split) {
                    continue;
                }
                if (config_.max_leaves > 0 && leaves >= static_cast<std::size_t>(config_.max_leaves)) {
                    continue;
                }
                apply_split(id);
                ++leaves;
                next.push_back(static_cast<std::size_t>(nodes_[id].node.left));
                next.push_back(static_cast<std::size_t>(nodes_[id].node.right));
            }
            frontier = std::move(next);
        }
    }

    const BinnedData& data_;
    const HistogramBinning& binning_;
    const GbdtConfig& config_;
    std::span<const double> grad_;
    std::span<const double> hess_;
    std::vector<int> features_;
    std::vector<int> node_of_;
    std::vector<GrowNode> nodes_;
};

/// Leaf value reached by training row `r`, routed on bins.
double route(const std::vector<GrowNode>& nodes, const BinnedData& data, std::size_t r) {
    std::size_t i = 0;
    while (!nodes[i].node.is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(data.at(r, static_cast<std::size_t>(n.node.feature)) <= n.split_bin ? n.node.left
                                                                                                        : n.node.right);
    }
    return nodes[i].node.value;
}

Tree to_preorder(const std::vector<GrowNode>& nodes) {
    Tree tree;
    // (old index, new parent, is right child)
    std::vector<std::tuple<std::size_t, int, bool>> work{{0, -1, false}};
    while (!work.empty()) {
        auto [old, parent, right] = work.back();
        work.pop_back();
        const int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(nodes[old].node);
        if (parent >= 0) {
            (right ? tree.nodes[static_cast<std::size_t>(parent)].right : tree.nodes[static_cast<std::size_t>(parent)].left) = idx;
        }
        if (!nodes[old].node.is_leaf()) {
            work.emplace_back(static_cast<std::size_t>(nodes[old].node.right), idx, true);
            work.emplace_back(static_cast<std::size_t>(nodes[old].node.left), idx, false);
        }
    }
    return tree;
}

std::vector<int> sample_columns(std::size_t n_features, double fraction, std::uint64_t seed) {
    std::vector<int> all(n_features);
    std::iota(all.begin(), all.end(), 0);
    if (fraction >= 1.0) {
        return all;
    }
    const auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_features))));
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(n_features - i));
        std::swap(all[i], all[j]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

/// GOSS: top-a rows by summed |g| plus a random b-fraction of the rest, the
/// latter weighted (1-a)/b. Returns sorted rows and per-row weights.
std::vector<std::uint32_t> goss_sample(std::span<const double> grad, std::size_t n, std::size_t k,
                                       const GossConfig& goss, std::uint64_t seed, std::vector<double>& weight) {
    std::vector<double> score(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            score[r] += std::abs(grad[r * k + c]);
        }
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
    const auto top = std::min(n, static_cast<std::size_t>(std::llround(goss.top_fraction * static_cast<double>(n))));
    const auto other = std::min(
        n - top, static_cast<std::size_t>(std::llround(goss.other_fraction * static_cast<double>(n))));
    weight.assign(n, 0.0);
    std::vector<std::uint32_t> rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top));
    for (auto r : rows) {
        weight[r] = 1.0;
    }
    std::vector<std::uint32_t> rest(order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
    std::sort(rest.begin(), rest.end());
    Rng rng(seed);
    const double amplify = (1.0 - goss.top_fraction) / goss.other_fraction;
    for (std::size_t i = 0; i < other; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(rest.size() - i));
        std::swap(rest[i], rest[j]);
        rows.push_back(rest[i]);
        weight[rest[i]] = amplify;
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::vector<int> labels_from_raw(Objective objective, std::span<const double> raw, std::size_t n) {
    const auto k = static_cast<std::size_t>(trees_per_round(objective));
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto z = raw.subspan(i * k, k);
        switch (objective) {
        case Objective::multiclass_softmax: out[i] = argmax_label(z); break;
        case Objective::ordinal_binary: {
            std::array<double, ordinal::kThresholds> q{};
            for (std::size_t t = 0; t < k; ++t) q[t] = sigmoid(z[t]);
            out[i] = ordinal::decode(q);
            break;
        }
        case Objective::squared_error: out[i] = static_cast<int>(std::clamp<long>(std::lround(z[0]), 1, 6)); break;
        }
    }
    return out;
}

void check_labels(Objective objective, std::span<const double> labels) {
    if (objective == Objective::squared_error) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!std::isfinite(labels[i])) {
                throw ValidationError("non-finite regression target at row " + std::to_string(i));
            }
        }
        return;
    }
    bool varied = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        class_index(labels[i], i);
        varied = varied || labels[i] != labels[0];
    }
    if (!varied) {
        throw ValidationError("degenerate labels: every training row has the same score");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Training

Forest train(const FeatureMatrix& features, std::span<const double> labels, const GbdtConfig& config,
             const ValidationSet* validation) {
    config.validate();
    const std::size_t n = features.rows();
    if (n < 2) {
        throw ValidationError("gbdt training needs at least 2 rows");
    }
    if (labels.size() != n) {
        throw ValidationError("labels (" + std::to_string(labels.size()) + ") not aligned with rows (" +
                              std::to_string(n) + ")");
    }
    if (features.cols() == 0) {
        throw ValidationError("gbdt training needs at least one feature column");
    }
    check_labels(config.objective, labels);
    if (validation != nullptr) {
        if (validation->features == nullptr || validation->features->rows() != validation->labels.size()) {
            throw ValidationError("validation features and labels are not aligned");
        }
        if (validation->features->column_names() != features.column_names()) {
            throw ValidationError("validation feature schema differs from training schema");
        }
        for (std::size_t i = 0; i < validation->labels.size(); ++i) {
            class_index(validation->labels[i], i);
        }
    }

    const int k_int = trees_per_round(config.objective);
    const auto k = static_cast<std::size_t>(k_int);
    Forest forest;
    forest.config = config;
    forest.feature_names = features.column_names();
    forest.trees_per_round = k_int;
    forest.base_score.assign(k, 0.0);
    if (config.objective == Objective::squared_error) {
        forest.base_score[0] = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(n);
    }

    const HistogramBinning binning = build_bins(features, config.max_bins);
    const BinnedData data = bin_matrix(features, binning);

    std::vector<double> raw(n * k);
    for (std::size_t r = 0; r < n; ++r) {
        std::copy(forest.base_score.begin(), forest.base_score.end(), raw.begin() + static_cast<std::ptrdiff_t>(r * k));
    }
    forest.initial_loss = mean_loss(config.objective, raw, labels);

    std::vector<double> valid_raw;
    std::vector<int> valid_truth;
    const bool early_stop = validation != nullptr && config.early_stopping_patience > 0;
    if (validation != nullptr) {
        const std::size_t nv = validation->features->rows();
        valid_raw.resize(nv * k);
        for (std::size_t r = 0; r < nv; ++r) {
            std::copy(forest.base_score.begin(), forest.base_score.end(),
                      valid_raw.begin() + static_cast<std::ptrdiff_t>(r * k));
        }
        for (double l : validation->labels) {
            valid_truth.push_back(static_cast<int>(l));
        }
    }

    std::vector<double> grad(n * k), hess(n * k);
    std::vector<double> g_tree(n), h_tree(n);
    std::vector<double> weight;
    double best_qwk = -std::numeric_limits<double>::infinity();
    int best_round = 0;

    for (int round = 0; round < config.n_rounds; ++round) {
        grad_hess(config.objective, raw, labels, grad, hess);
        std::vector<std::uint32_t> sampled;
        if (config.goss.enabled) {
            sampled = goss_sample(grad, n, k, config.goss, derive_seed(config.seed, "goss", static_cast<std::uint64_t>(round)),
                                  weight);
        } else {
            sampled.resize(n);
            std::iota(sampled.begin(), sampled.end(), 0u);
            weight.assign(n, 1.0);
        }

        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t r = 0; r < n; ++r) {
                g_tree[r] = grad[r * k + c] * weight[r];
                h_tree[r] = hess[r * k + c] * weight[r];
            }
            const auto tree_index = static_cast<std::uint64_t>(round) * k + c;
            TreeGrower grower(data, binning, config, g_tree, h_tree,
                              sample_columns(features.cols(), config.colsample_per_tree,
                                             derive_seed(config.seed, "colsample", tree_index)));
            const auto nodes = grower.grow(sampled);
            for (std::size_t r = 0; r < n; ++r) {
                raw[r * k + c] += route(nodes, data, r);
            }
            forest.trees.push_back(to_preorder(nodes));
        }

        RoundLog entry;
        entry.round = round + 1;
        entry.train_loss = mean_loss(config.objective, raw, labels);
        if (!std::isfinite(entry.train_loss)) {
            throw NumericError("training loss became non-finite at round " + std::to_string(round + 1));
        }
        if (validation != nullptr) {
            const std::size_t nv = validation->features->rows();
            const auto* trees = &forest.trees[forest.trees.size() - k];
            for (std::size_t r = 0; r < nv; ++r) {
                const auto row = validation->features->row(r);
                for (std::size_t c = 0; c < k; ++c) {
                    valid_raw[r * k + c] += trees[c].predict(row);
                }
            }
            try {
                entry.valid_qwk = metrics::qwk(valid_truth, labels_from_raw(config.objective, valid_raw, nv));
            } catch (const DegenerateQwkError&) {
                entry.valid_qwk.reset();
            }
        }
        forest.log.push_back(entry);

        if (early_stop) {
            if (entry.valid_qwk && *entry.valid_qwk > best_qwk) {
                best_qwk = *entry.valid_qwk;
                best_round = round + 1;
            }
            if (round + 1 - best_round >= config.early_stopping_patience) {
                break;
            }
        }
    }

    forest.best_round = forest.n_rounds();
    if (early_stop && best_round > 0) {
        forest.best_round = best_round;
        forest.trees.resize(static_cast<std::size_t>(best_round) * k);
    }
    return forest;
}

// ---------------------------------------------------------------------------
// Prediction

std::vector<double> predict_raw(const Forest& forest, const FeatureMatrix& features) {
    if (features.column_names() != forest.feature_names) {
        throw ValidationError("feature schema mismatch: model expects " + std::to_string(forest.feature_names.size()) +
                              " named columns, input has " + std::to_string(features.cols()));
    }
    const auto k = static_cast<std::size_t>(forest.trees_per_round);
    const std::size_t n = features.rows();
    std::vector<double> raw(n * k);
    parallel_for(n, [&](std::size_t r) {
        const auto row = features.row(r);
        double* out = raw.data() + r * k;
        std::copy(forest.base_score.begin(), forest.base_score.end(), out);
        for (std::size_t t = 0; t < forest.trees.size(); ++t) {
            out[t % k] += forest.trees[t].predict(row);
        }
    });
    return raw;
}

std::vector<ScoreDistribution> predict_proba(const Forest& forest, const FeatureMatrix& features) {
    if (forest.config.objective == Objective::squared_error) {
        throw ValidationError("squared_error forests produce continuous scores, not distributions");
    }
    const auto raw = predict_raw(forest, features);
    const auto k = static_cast<std::size_t>(forest.trees_per_round);
    std::vector<ScoreDistribution> out(features.rows());
    for (std::size_t r = 0; r < out.size(); ++r) {
        std::span<const double> z(raw.data() + r * k, k);
        if (forest.config.objective == Objective::multiclass_softmax) {
            softmax(z, out[r]);
        } else {
            std::array<double, ordinal::kThresholds> q{};
            for (std::size_t t = 0; t < k; ++t) q[t] = sigmoid(z[t]);
            out[r] = ordinal::to_distribution(q);
        }
    }
    return out;
}

std::vector<int> predict_labels(const Forest& forest, const FeatureMatrix& features) {
    return labels_from_raw(forest.config.objective, predict_raw(forest, features), features.rows());
}

std::vector<double> predict_continuous(const Forest& forest, const FeatureMatrix& features) {
    if (forest.config.objective != Objective::squared_error) {
        throw ValidationError("continuous predictions require a squared_error forest");
    }
    return predict_raw(forest, features);
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json Forest::to_json() const {
    nlohmann::json trees_json = nlohmann::json::array();
    for (std::size_t t = 0; t < trees.size(); ++t) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : trees[t].nodes) {
            if (n.is_leaf()) {
                nodes.push_back({{"leaf", n.value}, {"count", n.count}});
            } else {
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"gain", n.gain},
                                 {"count", n.count}});
            }
        }
        trees_json.push_back({{"round", t / static_cast<std::size_t>(trees_per_round)},
                              {"class", t % static_cast<std::size_t>(trees_per_round)},
                              {"nodes", nodes}});
    }
    nlohmann::json log_json = nlohmann::json::array();
    for (const auto& e : log) {
        log_json.push_back({{"round", e.round},
                            {"train_loss", e.train_loss},
                            {"valid_qwk", e.valid_qwk ? nlohmann::json(*e.valid_qwk) : nlohmann::json(nullptr)}});
    }
    return {
        {"format", kForestFormat},
        {"tool_version", kToolVersion},
        {"objective", gbdt::to_string(config.objective)},
        {"trees_per_round", trees_per_round},
        {"base_score", base_score},
        {"config", config.to_json()},
        {"feature_names", feature_names},
        {"best_round", best_round},
        {"initial_loss", initial_loss},
        {"log", log_json},
        {"trees", trees_json},
    };
}

Forest Forest::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kForestFormat) {
            throw ValidationError("unsupported forest format '" + j.at("format").get<std::string>() + "'");
        }
        Forest f;
        f.config = GbdtConfig::from_json(j.at("config"));
        f.trees_per_round = j.at("trees_per_round").get<int>();
        if (f.trees_per_round != gbdt::trees_per_round(f.config.objective)) {
            throw ValidationError("trees_per_round inconsistent with objective");
        }
        f.base_score = j.at("base_score").get<std::vector<double>>();
        f.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        f.best_round = j.at("best_round").get<int>();
        f.initial_loss = j.at("initial_loss").get<double>();
        for (const auto& e : j.at("log")) {
            RoundLog r;
            r.round = e.at("round").get<int>();
            r.train_loss = e.at("train_loss").get<double>();
            if (!e.at("valid_qwk").is_null()) {
                r.valid_qwk = e.at("valid_qwk").get<double>();
            }
            f.log.push_back(r);
        }
        for (const auto& t : j.at("trees")) {
            Tree tree;
            for (const auto& n : t.at("nodes")) {
                TreeNode node;
                node.count = n.value("count", std::size_t{0});
                if (n.contains("leaf")) {
                    node.value = n.at("leaf").get<double>();
                } else {
                    node.feature = n.at("feature").get<int>();
                    node.threshold = n.at("threshold").get<double>();
                    node.left = n.at("left").get<int>();
                    node.right = n.at("right").get<int>();
                    node.gain = n.value("gain", 0.0);
                    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= f.feature_names.size()) {
                        throw ValidationError("tree node references an unknown feature");
                    }
                }
                tree.nodes.push_back(node);
            }
            const int size = static_cast<int>(tree.nodes.size());
            for (const auto& node : tree.nodes) {
                if (!node.is_leaf() && (node.left <= 0 || node.left >= size || node.right <= 0 || node.right >= size)) {
                    throw ValidationError("tree node has out-of-range children");
                }
            }
            if (tree.nodes.empty()) {
                throw ValidationError("empty tree in forest");
            }
            f.trees.push_back(std::move(tree));
        }
        if (f.base_score.size() != static_cast<std::size_t>(f.trees_per_round) ||
            f.trees.size() % static_cast<std::size_t>(f.trees_per_round) != 0) {
            throw ValidationError("forest shape inconsistent with trees_per_round");
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed forest: ") + e.what());
    }
}

}  // namespace aes::gbdt
