#include "aes/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "aes/csv.hpp"
#include "aes/error.hpp"
#include "aes/rng.hpp"
#include "aes/textfeats.hpp"
#include "aes/version.hpp"

namespace aes::corpus {

Corpus parse_corpus(std::string_view csv_text, const Schema& schema, std::string_view source) {
    const CsvTable table = parse_csv(csv_text, source);
    const auto id_col = table.column(schema.id_column);
    const auto text_col = table.column(schema.text_column);
    const auto score_col = table.column(schema.score_column);
    if (id_col == CsvTable::npos) {
        throw ValidationError(std::string(source) + ": missing id column '" + schema.id_column + "'");
    }
    if (text_col == CsvTable::npos) {
        throw ValidationError(std::string(source) + ": missing text column '" + schema.text_column + "'");
    }

    Corpus corpus;
    corpus.reserve(table.rows.size());
    std::unordered_set<std::string> seen;
    for (const auto& row : table.rows) {
        const std::string where = std::string(source) + ":" + std::to_string(row.line);
        EssayRecord rec;
        rec.essay_id = row.fields[id_col];
        rec.text = row.fields[text_col];
        if (rec.essay_id.empty()) {
            throw ValidationError(where + ": empty essay_id");
        }
        if (!seen.insert(rec.essay_id).second) {
            throw ValidationError(where + ": duplicate essay_id '" + rec.essay_id + "'");
        }
        if (!textfeats::is_valid_utf8(rec.essay_id) || !textfeats::is_valid_utf8(rec.text)) {
            throw ValidationError(where + ": invalid UTF-8 in essay '" + rec.essay_id + "'");
        }
        if (score_col != CsvTable::npos && !row.fields[score_col].empty()) {
            const auto& field = row.fields[score_col];
            long long s = 0;
            try {
                s = parse_int(field, "score");
            } catch (const ValidationError&) {
                throw ValidationError(where + ": score '" + field + "' is not an integer");
            }
            if (s < 1 || s > 6) {
                throw ValidationError(where + ": score " + field + " outside 1..6 for essay '" + rec.essay_id + "'");
            }
            rec.score = static_cast<int>(s);
        }
        corpus.push_back(std::move(rec));
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const Schema& schema) {
    return parse_corpus(read_file(path), schema, path.string());
}

CorpusStats compute_stats(const Corpus& corpus) {
    if (corpus.empty()) {
        throw ValidationError("cannot compute statistics of an empty corpus");
    }
    CorpusStats stats;
    bool first = true;
    for (const auto& rec : corpus) {
        if (!rec.score) {
            ++stats.n_unscored;
            continue;
        }
        ++stats.n_essays;
        ++stats.score_histogram[*rec.score - 1];
        const std::size_t words = textfeats::count_words(rec.text);
        stats.word_length_min = first ? words : std::min(stats.word_length_min, words);
        stats.word_length_max = first ? words : std::max(stats.word_length_max, words);
        first = false;
        ++stats.word_length_histogram[words / CorpusStats::kWordBucket * CorpusStats::kWordBucket];
        if (words > 500) {
            ++stats.n_over_500_words;
        }
    }
    if (stats.n_essays == 0) {
        throw ValidationError("corpus has no scored essays");
    }
    return stats;
}

nlohmann::json to_json(const CorpusStats& stats) {
    nlohmann::json hist = nlohmann::json::object();
    for (int s = 1; s <= 6; ++s) {
        hist[std::to_string(s)] = stats.score_histogram[s - 1];
    }
    nlohmann::json lengths = nlohmann::json::array();
    for (auto [bucket, count] : stats.word_length_histogram) {
        lengths.push_back({{"from", bucket}, {"to", bucket + CorpusStats::kWordBucket - 1}, {"count", count}});
    }
    return {
        {"n_essays", stats.n_essays},
        {"n_unscored", stats.n_unscored},
        {"score_histogram", hist},
        {"word_length_min", stats.word_length_min},
        {"word_length_max", stats.word_length_max},
        {"word_length_histogram", lengths},
        {"n_over_500_words", stats.n_over_500_words},
    };
}

void SplitSpec::validate() const {
    double sum = 0;
    for (double r : ratios) {
        if (!(r > 0.0 && r < 1.0)) {
            throw ValidationError("split ratios must lie in (0,1)");
        }
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("split ratios must sum to 1");
    }
}

namespace {

struct Sizes {
    std::size_t train;
    std::size_t validation;
    std::size_t test;
};

Sizes sizes_for(std::size_t n, const std::array<double, 3>& ratios) {
    const auto test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[2]));
    const auto validation = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[1]));
    if (test + validation > n) {
        throw ValidationError("split ratios leave no room for the training subset");
    }
    return {n - test - validation, validation, test};
}

}  // namespace

Split split(const Corpus& corpus, const SplitSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, "split"));

    std::vector<std::vector<std::size_t>> groups;
    if (spec.stratified) {
        groups.resize(6);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (corpus[i].score) {
                groups[*corpus[i].score - 1].push_back(i);
            }
        }
        if (std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.empty(); })) {
            throw ValidationError("stratified split requested on an unscored corpus");
        }
    } else {
        groups.emplace_back(corpus.size());
        std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
    }
    std::size_t n = 0;
    for (const auto& g : groups) {
        n += g.size();
    }
    if (n < 3) {
        throw ValidationError("need at least 3 essays to split, got " + std::to_string(n));
    }

    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
    for (auto& g : groups) {
        if (g.empty()) {
            continue;
        }
        const Sizes s = sizes_for(g.size(), spec.ratios);
        rng.shuffle(g);
        test.insert(test.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(s.test));
        validation.insert(validation.end(), g.begin() + static_cast<std::ptrdiff_t>(s.test),
                          g.begin() + static_cast<std::ptrdiff_t>(s.test + s.validation));
        train.insert(train.end(), g.begin() + static_cast<std::ptrdiff_t>(s.test + s.validation), g.end());
    }
    if (train.empty() || validation.empty() || test.empty()) {
        throw ValidationError("split ratios yield an empty subset for " + std::to_string(n) + " essays");
    }

    auto ids = [&](std::vector<std::size_t>& idx) {
        std::sort(idx.begin(), idx.end());
        std::vector<std::string> out;
        out.reserve(idx.size());
        for (auto i : idx) {
            out.push_back(corpus[i].essay_id);
        }
        return out;
    };
    return Split{ids(train), ids(validation), ids(test)};
}

nlohmann::json split_manifest(const SplitSpec& spec, const Split& result) {
    return {
        {"ratios", spec.ratios},
        {"seed", spec.seed},
        {"stratified", spec.stratified},
        {"prng", Rng::kName},
        {"seed_derivation", "derive_seed(seed, \"split\")"},
        {"tool_version", kToolVersion},
        {"counts",
         {{"train", result.train.size()}, {"validation", result.validation.size()}, {"test", result.test.size()}}},
        {"files", {{"train", "train_ids.txt"}, {"validation", "validation_ids.txt"}, {"test", "test_ids.txt"}}},
    };
}

void write_split(const std::filesystem::path& dir, const SplitSpec& spec, const Split& result) {
    write_lines(dir / "train_ids.txt", result.train);
    write_lines(dir / "validation_ids.txt", result.validation);
    write_lines(dir / "test_ids.txt", result.test);
    write_file(dir / "split.json", split_manifest(spec, result).dump(2) + "\n");
}

}  // namespace aes::corpus
