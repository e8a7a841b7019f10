#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "aes/feature_matrix.hpp"

namespace aes::textfeats {

// ---------------------------------------------------------------------------
// Tokenization
//
// Words are maximal runs of word characters (ASCII letters and digits plus the
// Latin-1/Latin Extended-A/B letters U+00C0..U+024F, except the multiplication
// and division signs), joined across an apostrophe (U+0027 or U+2019) only
// when a word character follows it. Sentences end at '.', '!' or '?' followed
// by whitespace or the end of the paragraph. Paragraphs are separated by one
// or more blank (whitespace-only) lines. Segments without words are dropped.
// ---------------------------------------------------------------------------

struct TokenizationRules {
    /// Words with at least this many code points count as long words.
    std::size_t long_word_length = 7;
};

bool is_valid_utf8(std::string_view text);

/// Word tokens in text order, as views into `text`.
std::vector<std::string_view> words(std::string_view text);

std::size_t count_words(std::string_view text);

/// Number of code points; invalid bytes count as one each.
std::size_t count_codepoints(std::string_view text);

/// Lowercases ASCII and Latin-1 letters and maps U+2019 to an ASCII apostrophe.
std::string casefold(std::string_view word);

struct Sentence {
    std::size_t n_words = 0;
    std::size_t n_chars = 0;  ///< code points of the whitespace-trimmed span
};

struct Paragraph {
    std::vector<Sentence> sentences;
    std::size_t n_words = 0;
};

std::vector<Paragraph> segment(std::string_view text);

// ---------------------------------------------------------------------------
// Handcrafted features
// ---------------------------------------------------------------------------

class Dictionary {
public:
    Dictionary() = default;
    explicit Dictionary(std::unordered_set<std::string> words) : words_(std::move(words)) {}

    /// One word per line; entries are casefolded, blank lines skipped.
    static Dictionary load(const std::filesystem::path& path);

    bool contains(const std::string& folded_word) const { return words_.contains(folded_word); }
    std::size_t size() const noexcept { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

inline constexpr std::size_t kHandcraftedCount = 16;

struct HandcraftedFeatures {
    double n_paragraphs = 0;
    double words_per_paragraph_mean = 0;
    double words_per_paragraph_max = 0;
    double words_per_paragraph_min = 0;
    double spelling_error_count = 0;
    double n_sentences = 0;
    double words_per_sentence_mean = 0;
    double words_per_sentence_max = 0;
    double chars_per_sentence_mean = 0;
    double n_words = 0;
    double n_unique_words = 0;
    double word_length_mean = 0;
    double word_length_std = 0;
    double n_long_words = 0;
    double type_token_ratio = 0;
    double n_chars = 0;

    /// False when no dictionary was supplied; spelling_error_count is then 0.
    bool spelling_checked = false;

    std::array<double, kHandcraftedCount> values() const;
    static const std::array<std::string_view, kHandcraftedCount>& names();
};

HandcraftedFeatures extract_handcrafted(std::string_view text, const Dictionary* dictionary = nullptr,
                                        const TokenizationRules& rules = {});

/// One row per essay in input order; extraction runs in parallel.
FeatureMatrix handcrafted_matrix(std::span<const std::string> ids, std::span<const std::string> texts,
                                 const Dictionary* dictionary = nullptr, const TokenizationRules& rules = {});

// ---------------------------------------------------------------------------
// Vectorizers
// ---------------------------------------------------------------------------

enum class VectorizerKind { tfidf, count };

const char* to_string(VectorizerKind kind);
VectorizerKind vectorizer_kind_from_string(std::string_view s);

inline constexpr std::size_t kDefaultMaxVocab = 20000;
inline constexpr std::size_t kDefaultMinDf = 2;

/// Fitted vocabulary. Immutable after fit; transform never touches it.
class VectorizerModel {
public:
    VectorizerModel(VectorizerKind kind, std::vector<std::string> vocabulary,
                    std::vector<std::size_t> document_frequencies, std::size_t n_docs, std::size_t max_vocab,
                    std::size_t min_df);

    VectorizerKind kind() const noexcept { return kind_; }
    const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
    const std::vector<std::size_t>& document_frequencies() const noexcept { return df_; }
    std::size_t n_docs() const noexcept { return n_docs_; }
    std::size_t max_vocab() const noexcept { return max_vocab_; }
    std::size_t min_df() const noexcept { return min_df_; }
    std::size_t size() const noexcept { return vocabulary_.size(); }

    /// Column of a casefolded term, or -1.
    std::int64_t column(const std::string& term) const;

    /// ln((1 + n_docs) / (1 + df)) + 1
    double idf(std::size_t column) const;

private:
    VectorizerKind kind_;
    std::vector<std::string> vocabulary_;
    std::vector<std::size_t> df_;
    std::size_t n_docs_;
    std::size_t max_vocab_;
    std::size_t min_df_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Vocabulary = casefolded words with df >= min_df, ranked by (df desc, term asc)
/// and truncated to max_vocab. Throws ValidationError on an empty corpus or
/// an empty vocabulary.
VectorizerModel fit_vectorizer(std::span<const std::string> texts, VectorizerKind kind,
                               std::size_t max_vocab = kDefaultMaxVocab, std::size_t min_df = kDefaultMinDf);

struct SparseRow {
    std::vector<std::uint32_t> cols;  ///< strictly increasing
    std::vector<double> values;
};

/// Raw counts (count kind) or L2-normalized tf*idf (tfidf kind); unknown terms ignored.
SparseRow transform(const VectorizerModel& model, std::string_view text);

nlohmann::json to_json(const VectorizerModel& model);
VectorizerModel vectorizer_from_json(const nlohmann::json& j);

struct SparseMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> column_names;
    std::vector<SparseRow> rows;

    FeatureMatrix to_dense() const;
};

SparseMatrix transform_all(const VectorizerModel& model, std::span<const std::string> ids,
                           std::span<const std::string> texts);

/// Triplet CSV "row,col,value"; row indexes `row_ids`. Row ids and column
/// names are stored by the caller (ids file and vectorizer JSON).
void write_triplets(const std::filesystem::path& path, const SparseMatrix& m);
SparseMatrix read_triplets(const std::filesystem::path& path, std::vector<std::string> row_ids,
                           std::vector<std::string> column_names);

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

struct FeaturePart {
    std::string source;  ///< column-name prefix, e.g. "handcrafted", "tfidf"
    FeatureMatrix matrix;
};

/// Horizontal concatenation in declared order with columns renamed "source/name".
/// Rows follow the first part; throws ValidationError when row id sets differ.
FeatureMatrix build_feature_matrix(std::span<const FeaturePart> parts);

}  // namespace aes::textfeats
