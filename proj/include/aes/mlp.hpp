#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aes/feature_matrix.hpp"
#include "aes/score.hpp"

namespace aes::mlp {

enum class Loss { softmax_cross_entropy, ordinal_bce };

const char* to_string(Loss l);
Loss loss_from_string(const std::string& s);

struct MlpConfig {
    std::vector<int> hidden{3200, 1600};
    Loss loss = Loss::softmax_cross_entropy;
    double step_size = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 128;
    int epochs = 8;
    int k_folds = 10;
    std::uint64_t seed = 42;

    /// 6 for softmax, 5 for ordinal thresholds.
    int output_size() const;
    void validate() const;

    nlohmann::json to_json() const;
    static MlpConfig from_json(const nlohmann::json& j);
};

struct EpochLog {
    int epoch = 0;  ///< 1-based
    double train_loss = 0.0;
    std::optional<double> valid_qwk;
};

/// Weights are out x in; activations flow as one column per sample.
struct MlpModel {
    MlpConfig config;
    int input_size = 0;
    std::vector<std::string> feature_names;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    std::vector<EpochLog> log;
    int fold = -1;

    std::vector<int> layer_sizes() const;
    /// Throws NumericError naming the first non-finite parameter.
    void check_finite() const;
};

/// He-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)) and zero biases.
MlpModel init_model(int input_size, const MlpConfig& config, std::uint64_t seed);

/// Output-layer pre-activations, out x n, for inputs given as d x n.
Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& inputs);

/// Copies rows of a feature matrix into a d x n column-per-sample block.
Eigen::MatrixXd to_columns(const FeatureMatrix& m, std::span<const std::size_t> rows);
Eigen::MatrixXd to_columns(const FeatureMatrix& m);

std::vector<ScoreDistribution> predict_proba(const MlpModel& model, const FeatureMatrix& features);
std::vector<int> predict_labels(const MlpModel& model, const FeatureMatrix& features);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Mean batch loss; fills exact gradients when `grads` is non-null.
/// Labels are scores 1..6.
double loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs, std::span<const int> labels,
                          Gradients* grads);

class Adam {
public:
    explicit Adam(const MlpModel& model);

    void step(MlpModel& model, const Gradients& grads);
    int steps() const noexcept { return t_; }

private:
    Gradients m_;
    Gradients v_;
    int t_ = 0;
};

/// Fold id in [0, k) for each of n rows: a seeded shuffle dealt round-robin.
std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed);

struct FoldReport {
    int fold = 0;
    std::size_t n_train = 0;
    std::size_t n_valid = 0;
    std::optional<double> valid_qwk;  ///< empty when degenerate
    double final_train_loss = 0.0;
    std::vector<EpochLog> log;
};

struct FitResult {
    MlpModel best;
    int best_fold = 0;
    std::vector<FoldReport> folds;
    std::optional<double> mean_fold_qwk;

    nlohmann::json report_json() const;
};

/// k-fold training. Each fold trains on its complement; the returned model is
/// the fold with the highest final validation QWK (ties and all-degenerate
/// go to the lowest fold).
FitResult fit(const FeatureMatrix& features, std::span<const int> labels, const MlpConfig& config);

/// Writes model.json plus one f32 little-endian file per tensor into `dir`.
void save_model(const MlpModel& model, const std::filesystem::path& dir);
MlpModel load_model(const std::filesystem::path& dir);

}  // namespace aes::mlp
