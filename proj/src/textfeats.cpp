#include "aes/textfeats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "aes/csv.hpp"
#include "aes/error.hpp"
#include "aes/parallel.hpp"
#include "aes/version.hpp"

namespace aes::textfeats {

namespace {

struct Decoded {
    char32_t cp;
    std::size_t len;
    bool valid;
};

Decoded decode_at(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        return {b0, 1, true};
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
        min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
        min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
        min = 0x10000;
    } else {
        return {0xFFFD, 1, false};
    }
    if (i + len > s.size()) {
        return {0xFFFD, 1, false};
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            return {0xFFFD, 1, false};
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        return {0xFFFD, 1, false};
    }
    return {cp, len, true};
}

bool is_word_char(char32_t c) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) {
        return true;
    }
    return c >= 0xC0 && c <= 0x24F && c != 0xD7 && c != 0xF7;
}

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019; }

bool is_space(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0;
}

bool is_terminator(char32_t c) { return c == '.' || c == '!' || c == '?'; }

struct Cp {
    char32_t cp;
    std::size_t offset;
    std::size_t len;
};

std::vector<Cp> decode_all(std::string_view s) {
    std::vector<Cp> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        auto d = decode_at(s, i);
        out.push_back({d.cp, i, d.len});
        i += d.len;
    }
    return out;
}

/// Word spans as [first, last) indices into the decoded code point array.
std::vector<std::pair<std::size_t, std::size_t>> word_spans(std::span<const Cp> cps) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t i = 0;
    const std::size_t n = cps.size();
    while (i < n) {
        if (!is_word_char(cps[i].cp)) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < n) {
            if (is_word_char(cps[i].cp)) {
                ++i;
            } else if (is_apostrophe(cps[i].cp) && i + 1 < n && is_word_char(cps[i + 1].cp)) {
                i += 2;
            } else {
                break;
            }
        }
        spans.emplace_back(start, i);
    }
    return spans;
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
    for (std::size_t i = 0; i < text.size();) {
        auto d = decode_at(text, i);
        if (!d.valid) {
            return false;
        }
        i += d.len;
    }
    return true;
}

std::vector<std::string_view> words(std::string_view text) {
    const auto cps = decode_all(text);
    std::vector<std::string_view> out;
    for (auto [a, b] : word_spans(cps)) {
        const std::size_t begin = cps[a].offset;
        const std::size_t end = cps[b - 1].offset + cps[b - 1].len;
        out.push_back(text.substr(begin, end - begin));
    }
    return out;
}

std::size_t count_words(std::string_view text) { return word_spans(decode_all(text)).size(); }

std::size_t count_codepoints(std::string_view text) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < text.size(); i += decode_at(text, i).len) {
        ++n;
    }
    return n;
}

std::string casefold(std::string_view word) {
    std::string out;
    out.reserve(word.size());
    for (std::size_t i = 0; i < word.size();) {
        auto d = decode_at(word, i);
        char32_t c = d.cp;
        if (!d.valid) {
            out.push_back(word[i]);
            i += 1;
            continue;
        }
        if (c >= 'A' && c <= 'Z') {
            c += 0x20;
        } else if (c >= 0xC0 && c <= 0xDE && c != 0xD7) {
            c += 0x20;
        } else if (c == 0x2019) {
            c = '\'';
        }
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else if (c < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else if (c < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (c >> 12)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (c >> 18)));
            out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
        i += d.len;
    }
    return out;
}

std::vector<Paragraph> segment(std::string_view text) {
    const auto cps = decode_all(text);
    const std::size_t n = cps.size();

    // Paragraph spans: maximal runs of non-blank lines.
    std::vector<std::pair<std::size_t, std::size_t>> paragraphs;
    std::size_t line_start = 0;
    std::size_t para_start = 0;
    bool in_para = false;
    for (std::size_t i = 0; i <= n; ++i) {
        if (i < n && cps[i].cp != '\n') {
            continue;
        }
        bool blank = true;
        for (std::size_t k = line_start; k < i; ++k) {
            if (!is_space(cps[k].cp)) {
                blank = false;
                break;
            }
        }
        if (blank) {
            if (in_para) {
                paragraphs.emplace_back(para_start, line_start);
                in_para = false;
            }
        } else if (!in_para) {
            para_start = line_start;
            in_para = true;
        }
        line_start = i + 1;
    }
    if (in_para) {
        paragraphs.emplace_back(para_start, n);
    }

    auto words_in = [&](std::size_t a, std::size_t b) {
        return word_spans(std::span<const Cp>(cps).subspan(a, b - a)).size();
    };
    auto trimmed_len = [&](std::size_t a, std::size_t b) -> std::size_t {
        while (a < b && is_space(cps[a].cp)) {
            ++a;
        }
        while (b > a && is_space(cps[b - 1].cp)) {
            --b;
        }
        return b - a;
    };

    std::vector<Paragraph> out;
    for (auto [pa, pb] : paragraphs) {
        Paragraph para;
        std::size_t sentence_start = pa;
        for (std::size_t i = pa; i < pb; ++i) {
            const bool ends = is_terminator(cps[i].cp) && (i + 1 == pb || is_space(cps[i + 1].cp));
            if (ends || i + 1 == pb) {
                const std::size_t w = words_in(sentence_start, i + 1);
                if (w > 0) {
                    para.sentences.push_back({w, trimmed_len(sentence_start, i + 1)});
                    para.n_words += w;
                }
                sentence_start = i + 1;
            }
        }
        if (para.n_words > 0) {
            out.push_back(std::move(para));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Dictionary Dictionary::load(const std::filesystem::path& path) {
    std::unordered_set<std::string> words;
    for (const auto& line : read_lines(path)) {
        std::size_t a = 0;
        std::size_t b = line.size();
        while (a < b && std::isspace(static_cast<unsigned char>(line[a]))) {
            ++a;
        }
        while (b > a && std::isspace(static_cast<unsigned char>(line[b - 1]))) {
            --b;
        }
        if (a < b) {
            words.insert(casefold(std::string_view(line).substr(a, b - a)));
        }
    }
    return Dictionary(std::move(words));
}

std::array<double, kHandcraftedCount> HandcraftedFeatures::values() const {
    return {n_paragraphs,      words_per_paragraph_mean, words_per_paragraph_max, words_per_paragraph_min,
            spelling_error_count, n_sentences,           words_per_sentence_mean, words_per_sentence_max,
            chars_per_sentence_mean, n_words,            n_unique_words,          word_length_mean,
            word_length_std,   n_long_words,             type_token_ratio,        n_chars};
}

const std::array<std::string_view, kHandcraftedCount>& HandcraftedFeatures::names() {
    static const std::array<std::string_view, kHandcraftedCount> kNames = {
        "n_paragraphs",      "words_per_paragraph_mean", "words_per_paragraph_max", "words_per_paragraph_min",
        "spelling_error_count", "n_sentences",           "words_per_sentence_mean", "words_per_sentence_max",
        "chars_per_sentence_mean", "n_words",            "n_unique_words",          "word_length_mean",
        "word_length_std",   "n_long_words",             "type_token_ratio",        "n_chars"};
    return kNames;
}

HandcraftedFeatures extract_handcrafted(std::string_view text, const Dictionary* dictionary,
                                        const TokenizationRules& rules) {
    HandcraftedFeatures f;
    f.spelling_checked = dictionary != nullptr;
    f.n_chars = static_cast<double>(count_codepoints(text));

    const auto paragraphs = segment(text);
    f.n_paragraphs = static_cast<double>(paragraphs.size());
    if (!paragraphs.empty()) {
        double total = 0;
        double lo = static_cast<double>(paragraphs.front().n_words);
        double hi = lo;
        double sentence_words = 0;
        double sentence_chars = 0;
        double sentence_max = 0;
        std::size_t sentences = 0;
        for (const auto& p : paragraphs) {
            const auto w = static_cast<double>(p.n_words);
            total += w;
            lo = std::min(lo, w);
            hi = std::max(hi, w);
            for (const auto& s : p.sentences) {
                ++sentences;
                sentence_words += static_cast<double>(s.n_words);
                sentence_chars += static_cast<double>(s.n_chars);
                sentence_max = std::max(sentence_max, static_cast<double>(s.n_words));
            }
        }
        f.words_per_paragraph_mean = total / f.n_paragraphs;
        f.words_per_paragraph_max = hi;
        f.words_per_paragraph_min = lo;
        f.n_sentences = static_cast<double>(sentences);
        if (sentences > 0) {
            f.words_per_sentence_mean = sentence_words / f.n_sentences;
            f.words_per_sentence_max = sentence_max;
            f.chars_per_sentence_mean = sentence_chars / f.n_sentences;
        }
    }

    const auto tokens = words(text);
    f.n_words = static_cast<double>(tokens.size());
    if (tokens.empty()) {
        return f;
    }
    std::unordered_set<std::string> unique;
    double len_sum = 0;
    double len_sq = 0;
    std::size_t long_words = 0;
    std::size_t misspelled = 0;
    for (auto tok : tokens) {
        auto folded = casefold(tok);
        const auto len = static_cast<double>(count_codepoints(tok));
        len_sum += len;
        len_sq += len * len;
        if (count_codepoints(tok) >= rules.long_word_length) {
            ++long_words;
        }
        if (dictionary != nullptr && !dictionary->contains(folded)) {
            ++misspelled;
        }
        unique.insert(std::move(folded));
    }
    f.n_unique_words = static_cast<double>(unique.size());
    f.word_length_mean = len_sum / f.n_words;
    f.word_length_std = std::sqrt(std::max(0.0, len_sq / f.n_words - f.word_length_mean * f.word_length_mean));
    f.n_long_words = static_cast<double>(long_words);
    f.type_token_ratio = f.n_unique_words / f.n_words;
    f.spelling_error_count = static_cast<double>(misspelled);
    return f;
}

FeatureMatrix handcrafted_matrix(std::span<const std::string> ids, std::span<const std::string> texts,
                                 const Dictionary* dictionary, const TokenizationRules& rules) {
    if (ids.size() != texts.size()) {
        throw ValidationError("ids and texts differ in length");
    }
    std::vector<std::string> names(HandcraftedFeatures::names().begin(), HandcraftedFeatures::names().end());
    FeatureMatrix m(std::move(names), std::vector<std::string>(ids.begin(), ids.end()));
    parallel_for(texts.size(), [&](std::size_t r) {
        const auto values = extract_handcrafted(texts[r], dictionary, rules).values();
        std::copy(values.begin(), values.end(), m.row(r).begin());
    });
    return m;
}

// ---------------------------------------------------------------------------

const char* to_string(VectorizerKind kind) { return kind == VectorizerKind::tfidf ? "tfidf" : "count"; }

VectorizerKind vectorizer_kind_from_string(std::string_view s) {
    if (s == "tfidf") {
        return VectorizerKind::tfidf;
    }
    if (s == "count") {
        return VectorizerKind::count;
    }
    throw ValidationError("unknown vectorizer kind '" + std::string(s) + "'");
}

VectorizerModel::VectorizerModel(VectorizerKind kind, std::vector<std::string> vocabulary,
                                 std::vector<std::size_t> document_frequencies, std::size_t n_docs,
                                 std::size_t max_vocab, std::size_t min_df)
    : kind_(kind), vocabulary_(std::move(vocabulary)), df_(std::move(document_frequencies)), n_docs_(n_docs),
      max_vocab_(max_vocab), min_df_(min_df) {
    if (vocabulary_.size() != df_.size()) {
        throw ValidationError("vocabulary and document frequency arrays differ in length");
    }
    if (vocabulary_.size() > max_vocab_) {
        throw ValidationError("vocabulary exceeds max_vocab");
    }
    for (std::size_t c = 0; c < vocabulary_.size(); ++c) {
        if (df_[c] < min_df_ || df_[c] > n_docs_) {
            throw ValidationError("document frequency of '" + vocabulary_[c] + "' inconsistent with min_df/n_docs");
        }
        if (!index_.emplace(vocabulary_[c], static_cast<std::uint32_t>(c)).second) {
            throw ValidationError("duplicate vocabulary term '" + vocabulary_[c] + "'");
        }
    }
}

std::int64_t VectorizerModel::column(const std::string& term) const {
    auto it = index_.find(term);
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

double VectorizerModel::idf(std::size_t column) const {
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_[column]))) + 1.0;
}

VectorizerModel fit_vectorizer(std::span<const std::string> texts, VectorizerKind kind, std::size_t max_vocab,
                               std::size_t min_df) {
    if (texts.empty()) {
        throw ValidationError("cannot fit a vectorizer on an empty corpus");
    }
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& text : texts) {
        std::unordered_set<std::string> seen;
        for (auto tok : words(text)) {
            seen.insert(casefold(tok));
        }
        for (const auto& t : seen) {
            ++df[t];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (auto& [term, count] : df) {
        if (count >= min_df) {
            ranked.emplace_back(term, count);
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    if (ranked.size() > max_vocab) {
        ranked.resize(max_vocab);
    }
    if (ranked.empty()) {
        throw ValidationError("vectorizer vocabulary is empty after min_df filtering");
    }
    std::vector<std::string> vocab;
    std::vector<std::size_t> dfs;
    for (auto& [term, count] : ranked) {
        vocab.push_back(term);
        dfs.push_back(count);
    }
    return VectorizerModel(kind, std::move(vocab), std::move(dfs), texts.size(), max_vocab, min_df);
}

SparseRow transform(const VectorizerModel& model, std::string_view text) {
    std::map<std::uint32_t, double> counts;
    for (auto tok : words(text)) {
        const auto col = model.column(casefold(tok));
        if (col >= 0) {
            counts[static_cast<std::uint32_t>(col)] += 1.0;
        }
    }
    SparseRow row;
    row.cols.reserve(counts.size());
    row.values.reserve(counts.size());
    for (auto [col, tf] : counts) {
        row.cols.push_back(col);
        row.values.push_back(model.kind() == VectorizerKind::tfidf ? tf * model.idf(col) : tf);
    }
    if (model.kind() == VectorizerKind::tfidf && !row.values.empty()) {
        double norm = 0;
        for (double v : row.values) {
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : row.values) {
            v /= norm;
        }
    }
    return row;
}

nlohmann::json to_json(const VectorizerModel& model) {
    return {
        {"format", kVectorizerFormat},
        {"kind", to_string(model.kind())},
        {"n_docs", model.n_docs()},
        {"max_vocab", model.max_vocab()},
        {"min_df", model.min_df()},
        {"idf", "ln((1+n_docs)/(1+df))+1"},
        {"vocabulary", model.vocabulary()},
        {"document_frequencies", model.document_frequencies()},
    };
}

VectorizerModel vectorizer_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kVectorizerFormat) {
            throw ValidationError("unsupported vectorizer format '" + j.at("format").get<std::string>() + "'");
        }
        return VectorizerModel(vectorizer_kind_from_string(j.at("kind").get<std::string>()),
                               j.at("vocabulary").get<std::vector<std::string>>(),
                               j.at("document_frequencies").get<std::vector<std::size_t>>(),
                               j.at("n_docs").get<std::size_t>(), j.at("max_vocab").get<std::size_t>(),
                               j.at("min_df").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed vectorizer model: ") + e.what());
    }
}

FeatureMatrix SparseMatrix::to_dense() const {
    FeatureMatrix m(column_names, row_ids);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto dst = m.row(r);
        for (std::size_t k = 0; k < rows[r].cols.size(); ++k) {
            dst[rows[r].cols[k]] = rows[r].values[k];
        }
    }
    return m;
}

SparseMatrix transform_all(const VectorizerModel& model, std::span<const std::string> ids,
                           std::span<const std::string> texts) {
    if (ids.size() != texts.size()) {
        throw ValidationError("ids and texts differ in length");
    }
    SparseMatrix m;
    m.row_ids.assign(ids.begin(), ids.end());
    for (const auto& term : model.vocabulary()) {
        m.column_names.push_back(term);
    }
    m.rows.resize(texts.size());
    parallel_for(texts.size(), [&](std::size_t r) { m.rows[r] = transform(model, texts[r]); });
    return m;
}

void write_triplets(const std::filesystem::path& path, const SparseMatrix& m) {
    std::ostringstream os;
    os << "row,col,value\n";
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        for (std::size_t k = 0; k < m.rows[r].cols.size(); ++k) {
            os << r << ',' << m.rows[r].cols[k] << ',' << format_double(m.rows[r].values[k]) << '\n';
        }
    }
    write_file(path, os.str());
}

SparseMatrix read_triplets(const std::filesystem::path& path, std::vector<std::string> row_ids,
                           std::vector<std::string> column_names) {
    const CsvTable table = read_csv(path);
    if (table.header != std::vector<std::string>{"row", "col", "value"}) {
        throw ValidationError(path.string() + ": expected header row,col,value");
    }
    SparseMatrix m;
    m.row_ids = std::move(row_ids);
    m.column_names = std::move(column_names);
    m.rows.resize(m.row_ids.size());
    for (const auto& rec : table.rows) {
        const std::string where = path.string() + " line " + std::to_string(rec.line);
        const auto r = parse_int(rec.fields[0], where);
        const auto c = parse_int(rec.fields[1], where);
        if (r < 0 || static_cast<std::size_t>(r) >= m.rows.size() || c < 0 ||
            static_cast<std::size_t>(c) >= m.column_names.size()) {
            throw ValidationError(where + ": triplet index out of range");
        }
        auto& row = m.rows[static_cast<std::size_t>(r)];
        if (!row.cols.empty() && row.cols.back() >= static_cast<std::uint32_t>(c)) {
            throw ValidationError(where + ": columns must be strictly increasing within a row");
        }
        row.cols.push_back(static_cast<std::uint32_t>(c));
        row.values.push_back(parse_double(rec.fields[2], where));
    }
    return m;
}

FeatureMatrix build_feature_matrix(std::span<const FeaturePart> parts) {
    std::vector<FeatureMatrix> renamed;
    renamed.reserve(parts.size());
    for (const auto& part : parts) {
        std::vector<std::string> names;
        names.reserve(part.matrix.cols());
        for (const auto& n : part.matrix.column_names()) {
            names.push_back(part.source + "/" + n);
        }
        renamed.emplace_back(std::move(names), part.matrix.row_ids(), part.matrix.values());
    }
    return hconcat(renamed);
}

}  // namespace aes::textfeats
