#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aes/feature_matrix.hpp"
#include "aes/score.hpp"

namespace aes::gbdt {

enum class Objective { multiclass_softmax, ordinal_binary, squared_error };
enum class Growth { leaf_wise, depth_wise };

const char* to_string(Objective o);
const char* to_string(Growth g);
Objective objective_from_string(const std::string& s);
Growth growth_from_string(const std::string& s);

/// Trees fitted per boosting round: 6 (softmax), 5 (ordinal thresholds), 1 (regression).
int trees_per_round(Objective o);

struct GossConfig {
    bool enabled = false;
    double top_fraction = 0.2;    ///< kept by largest |g|
    double other_fraction = 0.1;  ///< sampled from the rest, amplified by (1-a)/b
};

struct GbdtConfig {
    Objective objective = Objective::multiclass_softmax;
    int n_rounds = 500;
    double learning_rate = 0.1;
    Growth growth = Growth::leaf_wise;
    int max_leaves = 31;  ///< leaf-wise budget; <= 0 means unlimited
    int max_depth = -1;   ///< <= 0 means unlimited (depth-wise requires > 0)
    int max_bins = 256;
    int min_samples_leaf = 20;
    double lambda_l2 = 1.0;
    double min_gain = 0.0;
    double colsample_per_tree = 1.0;
    GossConfig goss;
    std::uint64_t seed = 42;
    int early_stopping_patience = 50;  ///< rounds without validation QWK gain; 0 disables

    /// Throws ValidationError when a bound is violated.
    void validate() const;

    /// Depth-wise to depth 6, colsample 0.8, no GOSS.
    static GbdtConfig xgb_like();
    /// Leaf-wise with 31 leaves and GOSS (a = 0.2, b = 0.1).
    static GbdtConfig lgbm_like();
    static GbdtConfig preset(const std::string& name);

    nlohmann::json to_json() const;
    static GbdtConfig from_json(const nlohmann::json& j);
};

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

/// Per-sample gradients and diagonal hessians, laid out n x trees_per_round.
/// raw is n x trees_per_round; labels are scores 1..6 for the classification
/// objectives and real targets for squared_error.
void grad_hess(Objective objective, std::span<const double> raw, std::span<const double> labels,
               std::span<double> grad, std::span<double> hess);

/// Mean per-sample loss: softmax cross-entropy, summed per-threshold logistic
/// loss, or half squared error.
double mean_loss(Objective objective, std::span<const double> raw, std::span<const double> labels);

// ---------------------------------------------------------------------------
// Histogram binning
// ---------------------------------------------------------------------------

/// Per-feature bin upper boundaries. A value x falls in bin
/// b = #{cuts < x}, so x <= cuts[b] for every bin but the last.
struct HistogramBinning {
    int max_bins = 256;
    std::vector<std::vector<double>> cuts;

    std::size_t n_features() const noexcept { return cuts.size(); }
    int n_bins(std::size_t feature) const { return static_cast<int>(cuts[feature].size()) + 1; }
    std::uint8_t bin(std::size_t feature, double x) const;
};

/// Cuts from training values. Features with at most max_bins distinct values
/// get one bin per value (cut at the midpoint of neighbours); otherwise cuts
/// follow empirical quantiles, with exact zero isolated in its own bin.
HistogramBinning build_bins(const FeatureMatrix& train, int max_bins);

/// Midpoint used as the cut between adjacent distinct values lo < hi; always in [lo, hi).
double midpoint_cut(double lo, double hi);

/// Training matrix mapped to bins, feature-major. Mostly-zero features also
/// keep their nonzero entries so histograms can skip implicit zeros.
struct BinnedData {
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::vector<std::uint8_t> bins;  ///< bins[f * n_rows + r]
    std::vector<bool> sparse;
    std::vector<std::uint8_t> zero_bin;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint8_t>>> nonzero;

    std::uint8_t at(std::size_t row, std::size_t feature) const { return bins[feature * n_rows + row]; }
};

BinnedData bin_matrix(const FeatureMatrix& m, const HistogramBinning& binning);

// ---------------------------------------------------------------------------
// Split finding
// ---------------------------------------------------------------------------

struct SplitCandidate {
    int feature = -1;
    int bin = -1;  ///< rows with bin <= this go left
    double threshold = 0.0;
    double gain = 0.0;
    double left_grad = 0, left_hess = 0, right_grad = 0, right_hess = 0;
    std::size_t left_count = 0, right_count = 0;
};

/// Best histogram split of the node holding `rows`:
///   gain = 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)]
/// over every bin boundary of every candidate feature with both sides holding
/// at least min_samples_leaf rows. Ties go to the lower feature index, then
/// the lower threshold. Returns nothing when the best gain is below min_gain
/// or the node is too small to split.
std::optional<SplitCandidate> find_best_split(std::span<const std::uint32_t> rows, const BinnedData& data,
                                              const HistogramBinning& binning, std::span<const double> grad,
                                              std::span<const double> hess, std::span<const int> candidate_features,
                                              double lambda_l2, int min_samples_leaf, double min_gain);

// ---------------------------------------------------------------------------
// Forest
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  ///< leaf output, already scaled by the learning rate
    double gain = 0.0;
    std::size_t count = 0;  ///< sampled training rows that reached the node

    bool is_leaf() const noexcept { return feature < 0; }
};

/// Nodes in preorder; node 0 is the root.
struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> row) const;
};

struct RoundLog {
    int round = 0;  ///< 1-based
    double train_loss = 0.0;
    std::optional<double> valid_qwk;
};

struct Forest {
    GbdtConfig config;
    std::vector<std::string> feature_names;
    std::vector<double> base_score;
    int trees_per_round = 0;
    std::vector<Tree> trees;  ///< round-major: trees[round * trees_per_round + k]
    std::vector<RoundLog> log;
    int best_round = 0;  ///< rounds kept in `trees`
    double initial_loss = 0.0;

    int n_rounds() const { return trees_per_round == 0 ? 0 : static_cast<int>(trees.size()) / trees_per_round; }

    nlohmann::json to_json() const;
    static Forest from_json(const nlohmann::json& j);
};

struct ValidationSet {
    const FeatureMatrix* features = nullptr;
    std::vector<double> labels;
};

/// Boosted fit. Leaf weights are -G/(H+lambda) * learning_rate; the fit is a
/// pure function of (data, labels, config) and is reproducible bit for bit.
/// Throws ValidationError on fewer than 2 rows, misaligned or out-of-range
/// labels, a single-class label vector for classification objectives, or an
/// empty feature set.
Forest train(const FeatureMatrix& features, std::span<const double> labels, const GbdtConfig& config,
             const ValidationSet* validation = nullptr);

/// Raw additive scores, n x trees_per_round. Throws ValidationError when the
/// column names differ from the training schema.
std::vector<double> predict_raw(const Forest& forest, const FeatureMatrix& features);

/// Class distributions (softmax, or ordinal thresholds mapped to classes).
/// Throws ValidationError for the squared-error objective.
std::vector<ScoreDistribution> predict_proba(const Forest& forest, const FeatureMatrix& features);

/// Hard labels: argmax (softmax), threshold count (ordinal) or the rounded,
/// clipped regression output.
std::vector<int> predict_labels(const Forest& forest, const FeatureMatrix& features);

/// Regression output for squared_error forests.
std::vector<double> predict_continuous(const Forest& forest, const FeatureMatrix& features);

}  // namespace aes::gbdt
