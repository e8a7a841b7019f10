#pragma once

#include <array>
#include <cstddef>
#include <span>

#include <json.hpp>

namespace aes::metrics {

/// Score levels 1..6.
inline constexpr int kLevels = 6;

template <typename T>
using LevelMatrix = std::array<std::array<T, kLevels>, kLevels>;
using ConfusionMatrix = LevelMatrix<std::size_t>;

/// Every intermediate of the kappa computation, kept for reports and audits.
/// weights(i,j) = (i-j)^2 / (N-1)^2; observed holds raw joint counts and
/// expected the outer product of the marginals scaled to the same total.
struct QwkContext {
    int levels = kLevels;
    LevelMatrix<double> weights{};
    LevelMatrix<double> observed{};
    LevelMatrix<double> expected{};
    double kappa = 0.0;
};

/// Quadratic weighted kappa of two label sequences over 1..6.
///
/// Counts are accumulated as integers and the quadratic weights are applied
/// in exact integer arithmetic, so swapping the arguments gives a bit-identical
/// result. Throws ValidationError on empty/mismatched input or out-of-range
/// labels and DegenerateQwkError when the expected disagreement is zero.
double qwk(std::span<const int> truth, std::span<const int> predicted);

QwkContext qwk_context(std::span<const int> truth, std::span<const int> predicted);

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted);

struct EvalReport {
    double qwk = 0.0;
    double accuracy = 0.0;
    ConfusionMatrix confusion{};
    std::array<std::size_t, kLevels> truth_counts{};
    std::array<std::size_t, kLevels> predicted_counts{};
    std::size_t n_evaluated = 0;
};

EvalReport evaluate(std::span<const int> truth, std::span<const int> predicted);

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

}  // namespace aes::metrics
