#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aes/score.hpp"

namespace aes::ensemble {

using Distributions = std::vector<ScoreDistribution>;

/// Elementwise convex combination. Throws ValidationError when the weight and
/// model counts differ, essay counts differ, or weights are negative or do not
/// sum to 1 within 1e-9.
Distributions weighted_merge(std::span<const Distributions> models, std::span<const double> weights);

/// Argmax labels, ties to the lower score.
std::vector<int> hard_labels(const Distributions& d);

struct WeightSearchOptions {
    std::vector<double> grid{0.3, 0.4, 0.5, 0.6, 0.7};  ///< first-model weights (two-model case)
    bool refine = true;
    double refine_step = 0.05;
    double refine_min = 0.05;
    double refine_max = 0.95;
    double lattice_step = 0.1;  ///< simplex lattice spacing for three or more models
};

struct WeightTrial {
    std::vector<double> weights;
    std::optional<double> qwk;  ///< empty when degenerate
    std::string stage;          ///< coarse | refine | lattice
};

struct WeightSearchResult {
    std::vector<double> weights;
    double qwk = 0.0;
    std::vector<WeightTrial> table;

    nlohmann::json to_json() const;
};

/// Validation QWK of the merged argmax labels.
double merge_qwk(std::span<const Distributions> models, std::span<const int> truth, std::span<const double> weights);

/// Two models: the coarse grid for w1 (w2 = 1 - w1), then, when the grid has
/// more than one point, a hill climb in refine_step moves within
/// [refine_min, refine_max]. Three or more models: every point of the simplex
/// lattice. Ranking: higher QWK, then closer to uniform weights, then
/// lexicographically smaller. Throws DegenerateQwkError when every trial is degenerate.
WeightSearchResult weight_search(std::span<const Distributions> models, std::span<const int> truth,
                                 const WeightSearchOptions& options = {});

/// Modal label; ties go to the tied label closest to the mean vote, then the lower label.
int vote(std::span<const int> votes);

/// Per-essay vote across M >= 2 label vectors of equal length.
std::vector<int> hard_vote(std::span<const std::vector<int>> models);

using ThresholdSet = std::array<double, 5>;

inline constexpr ThresholdSet kInitialThresholds{1.5, 2.5, 3.5, 4.5, 5.5};

/// label = 1 + #{cuts strictly below the score}.
int apply_threshold(double score, const ThresholdSet& cuts);
std::vector<int> apply_thresholds(std::span<const double> scores, const ThresholdSet& cuts);

struct ThresholdFit {
    ThresholdSet cuts = kInitialThresholds;
    double qwk = 0.0;
    std::optional<double> initial_qwk;
    int sweeps = 0;

    nlohmann::json to_json() const;
    static ThresholdFit from_json(const nlohmann::json& j);
};

/// Cyclic coordinate ascent from kInitialThresholds. Each cut moves to the
/// first candidate midpoint (between adjacent distinct scores, keeping the cuts
/// strictly ordered) that strictly raises QWK the most; stops after a sweep
/// with no change. Throws ValidationError for non-finite scores, misaligned
/// inputs or fewer than 2 distinct truth labels, and DegenerateQwkError when
/// all scores are identical.
ThresholdFit fit_thresholds(std::span<const double> scores, std::span<const int> truth);

// ---------------------------------------------------------------------------
// Prediction files: essay_id,p1..p6 or essay_id,score

struct PredictionTable {
    std::vector<std::string> ids;
    Distributions proba;        ///< filled for distribution files
    std::vector<double> score;  ///< filled for score files

    bool is_proba = false;

    /// Hard labels: argmax of distributions, or scores that must be integers 1..6.
    std::vector<int> labels() const;
    /// Rows reordered to `order`; throws ValidationError when ids differ.
    PredictionTable aligned_to(std::span<const std::string> order) const;
};

void write_proba_csv(const std::filesystem::path& path, std::span<const std::string> ids, const Distributions& proba);
void write_score_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                     std::span<const double> scores);
void write_label_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                     std::span<const int> labels);

/// Reads either layout; any CSV with essay_id and score columns (such as a
/// corpus file) is accepted as a score table. Empty scores are rejected.
PredictionTable read_predictions(const std::filesystem::path& path);

}  // namespace aes::ensemble
