#include "aes/metrics.hpp"

#include <cstdint>
#include <string>

#include "aes/error.hpp"

namespace aes::metrics {

namespace {

void check_inputs(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) {
        throw ValidationError("label sequences differ in length: " + std::to_string(truth.size()) + " vs " +
                              std::to_string(predicted.size()));
    }
    if (truth.empty()) {
        throw ValidationError("cannot score empty label sequences");
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 1 || truth[i] > kLevels || predicted[i] < 1 || predicted[i] > kLevels) {
            throw ValidationError("label out of range 1..6 at position " + std::to_string(i));
        }
    }
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted) {
    check_inputs(truth, predicted);
    ConfusionMatrix m{};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++m[truth[i] - 1][predicted[i] - 1];
    }
    return m;
}

double qwk(std::span<const int> truth, std::span<const int> predicted) {
    const ConfusionMatrix observed = confusion(truth, predicted);
    std::array<std::int64_t, kLevels> row{};
    std::array<std::int64_t, kLevels> col{};
    std::int64_t observed_disagreement = 0;
    for (int i = 0; i < kLevels; ++i) {
        for (int j = 0; j < kLevels; ++j) {
            const auto o = static_cast<std::int64_t>(observed[i][j]);
            row[i] += o;
            col[j] += o;
            observed_disagreement += static_cast<std::int64_t>((i - j) * (i - j)) * o;
        }
    }
    // Sum (i-j)^2 r_i c_j is n times the weighted expected mass; the 1/(N-1)^2
    // factor cancels in the ratio.
    std::int64_t expected_disagreement = 0;
    for (int i = 0; i < kLevels; ++i) {
        for (int j = 0; j < kLevels; ++j) {
            expected_disagreement += static_cast<std::int64_t>((i - j) * (i - j)) * row[i] * col[j];
        }
    }
    if (expected_disagreement == 0) {
        throw DegenerateQwkError("quadratic weighted kappa undefined: both sequences are constant at the same level");
    }
    const auto n = static_cast<double>(truth.size());
    return 1.0 - (static_cast<double>(observed_disagreement) * n) / static_cast<double>(expected_disagreement);
}

QwkContext qwk_context(std::span<const int> truth, std::span<const int> predicted) {
    QwkContext ctx;
    const ConfusionMatrix counts = confusion(truth, predicted);
    std::array<double, kLevels> row{};
    std::array<double, kLevels> col{};
    for (int i = 0; i < kLevels; ++i) {
        for (int j = 0; j < kLevels; ++j) {
            const double d = static_cast<double>(i - j);
            ctx.weights[i][j] = d * d / static_cast<double>((kLevels - 1) * (kLevels - 1));
            ctx.observed[i][j] = static_cast<double>(counts[i][j]);
            row[i] += ctx.observed[i][j];
            col[j] += ctx.observed[i][j];
        }
    }
    const auto n = static_cast<double>(truth.size());
    for (int i = 0; i < kLevels; ++i) {
        for (int j = 0; j < kLevels; ++j) {
            ctx.expected[i][j] = row[i] * col[j] / n;
        }
    }
    ctx.kappa = qwk(truth, predicted);
    return ctx;
}

EvalReport evaluate(std::span<const int> truth, std::span<const int> predicted) {
    EvalReport report;
    report.confusion = confusion(truth, predicted);
    report.qwk = qwk(truth, predicted);
    std::size_t correct = 0;
    for (int i = 0; i < kLevels; ++i) {
        correct += report.confusion[i][i];
        for (int j = 0; j < kLevels; ++j) {
            report.truth_counts[i] += report.confusion[i][j];
            report.predicted_counts[j] += report.confusion[i][j];
        }
    }
    report.n_evaluated = truth.size();
    report.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    return report;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json confusion = nlohmann::json::array();
    for (const auto& r : report.confusion) {
        confusion.push_back(r);
    }
    return {
        {"qwk", report.qwk},
        {"accuracy", report.accuracy},
        {"n_evaluated", report.n_evaluated},
        {"confusion", confusion},
        {"truth_counts", report.truth_counts},
        {"predicted_counts", report.predicted_counts},
    };
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    try {
        EvalReport report;
        report.qwk = j.at("qwk").get<double>();
        report.accuracy = j.at("accuracy").get<double>();
        report.n_evaluated = j.at("n_evaluated").get<std::size_t>();
        const auto& rows = j.at("confusion");
        if (rows.size() != kLevels) {
            throw ValidationError("confusion matrix must be 6x6");
        }
        for (int i = 0; i < kLevels; ++i) {
            report.confusion[i] = rows.at(i).get<std::array<std::size_t, kLevels>>();
        }
        report.truth_counts = j.at("truth_counts").get<std::array<std::size_t, kLevels>>();
        report.predicted_counts = j.at("predicted_counts").get<std::array<std::size_t, kLevels>>();
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed evaluation report: ") + e.what());
    }
}

}  // namespace aes::metrics
