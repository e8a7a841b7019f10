#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace aes::corpus {

struct EssayRecord {
    std::string essay_id;
    std::string text;
    std::optional<int> score;  ///< 1..6 when present
};

using Corpus = std::vector<EssayRecord>;

/// Column names of the input table. The score column may be absent from the file.
struct Schema {
    std::string id_column = "essay_id";
    std::string text_column = "full_text";
    std::string score_column = "score";
};

/// Loads an RFC-4180 CSV. Rows keep file order; an empty score field means
/// unscored. Throws ValidationError (with the offending line) on a missing
/// id/text column, duplicate or empty id, score outside 1..6, or invalid UTF-8.
Corpus load_corpus(const std::filesystem::path& path, const Schema& schema = {});
Corpus parse_corpus(std::string_view csv_text, const Schema& schema = {}, std::string_view source = "<input>");

/// Statistics over the scored essays; unscored records are counted separately.
struct CorpusStats {
    std::size_t n_essays = 0;
    std::size_t n_unscored = 0;
    std::array<std::size_t, 6> score_histogram{};
    std::size_t word_length_min = 0;
    std::size_t word_length_max = 0;
    /// Bucket start (multiple of kWordBucket) -> essays whose word count falls in it.
    std::map<std::size_t, std::size_t> word_length_histogram;
    std::size_t n_over_500_words = 0;

    static constexpr std::size_t kWordBucket = 100;
};

CorpusStats compute_stats(const Corpus& corpus);
nlohmann::json to_json(const CorpusStats& stats);

struct SplitSpec {
    std::array<double, 3> ratios{0.8, 0.1, 0.1};  ///< train, validation, test
    std::uint64_t seed = 42;
    bool stratified = true;

    void validate() const;
};

struct Split {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

/// Deterministic three-way split. |test| = round(n r_test), |validation| =
/// round(n r_val), train takes the rest; stratified mode applies the rule to
/// each score class and merges. Shuffling is Fisher-Yates over Rng seeded with
/// derive_seed(seed, "split"); classes are shuffled in ascending score order.
/// Ids within each subset keep corpus order. Stratified mode considers scored
/// records only; unstratified mode splits every record.
Split split(const Corpus& corpus, const SplitSpec& spec);

nlohmann::json split_manifest(const SplitSpec& spec, const Split& result);

/// train_ids.txt, validation_ids.txt, test_ids.txt and split.json under `dir`.
void write_split(const std::filesystem::path& dir, const SplitSpec& spec, const Split& result);

}  // namespace aes::corpus
