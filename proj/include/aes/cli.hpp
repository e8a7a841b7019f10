#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aes/corpus.hpp"

namespace aes::cli {

/// Runs one invocation. `args` excludes the program name. Returns the exit
/// status: 0 success, 2 usage, 3 validation, 4 I/O, 5 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Artifacts combined by the report subcommand.
struct ReportInputs {
    std::optional<nlohmann::json> stats;
    std::vector<nlohmann::json> evals;  ///< eval.json documents, in table order
    std::vector<nlohmann::json> weight_searches;
    std::vector<nlohmann::json> thresholds;
};

/// Markdown summary; identical inputs give identical bytes. Throws UsageError
/// when no artifact is supplied.
std::string render_report(const ReportInputs& inputs);

/// Score of a synthetic essay: clamp(floor(words / 100), 1, 6).
int synth_score_for_length(std::size_t words);

/// Seeded essays of 50..649 words in paragraphs and sentences, scored by
/// synth_score_for_length.
corpus::Corpus synth_essays(std::size_t count, std::uint64_t seed);

}  // namespace aes::cli
