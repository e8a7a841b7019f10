#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "aes/cli.hpp"
#include "aes/corpus.hpp"
#include "aes/csv.hpp"
#include "aes/embedstore.hpp"
#include "aes/ensemble.hpp"
#include "aes/error.hpp"
#include "aes/gbdt.hpp"
#include "aes/metrics.hpp"
#include "aes/mlp.hpp"
#include "aes/rng.hpp"
#include "aes/textfeats.hpp"
#include "aes/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace aes::cli {

CLI::Option* add_switch(CLI::App* app, const std::string& name, bool& target, const std::string& description) {
    return app->add_flag("--" + name + ",!--no-" + name, target, description)->default_str(target ? "true" : "false");
}

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::vector<std::string> read_ids(const fs::path& path) {
    std::vector<std::string> ids;
    for (auto& line : read_lines(path)) {
        if (!line.empty()) ids.push_back(std::move(line));
    }
    return ids;
}

/// essay_id -> score from any CSV with essay_id and score columns; empty scores are skipped.
std::unordered_map<std::string, double> load_labels(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const auto id_col = t.column("essay_id");
    const auto score_col = t.column("score");
    if (id_col == CsvTable::npos || score_col == CsvTable::npos) {
        throw ValidationError(path.string() + ": labels need essay_id and score columns");
    }
    std::unordered_map<std::string, double> out;
    for (const auto& row : t.rows) {
        const auto& s = row.fields[score_col];
        if (s.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(row.line);
        if (!out.emplace(row.fields[id_col], parse_double(s, where + " score")).second) {
            throw ValidationError(where + ": duplicate essay_id '" + row.fields[id_col] + "'");
        }
    }
    return out;
}

std::vector<double> labels_for(std::span<const std::string> ids, const std::unordered_map<std::string, double>& labels) {
    std::vector<double> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = labels.find(id);
        if (it == labels.end()) {
            throw ValidationError("no score for essay '" + id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

std::vector<int> int_labels(std::span<const double> v) {
    std::vector<int> out;
    for (double x : v) {
        if (x != std::round(x) || x < 1 || x > 6) {
            throw ValidationError("score " + format_double(x) + " is not a label in 1..6");
        }
        out.push_back(static_cast<int>(x));
    }
    return out;
}

corpus::Schema schema_from(const std::string& id, const std::string& text, const std::string& score) {
    return corpus::Schema{id, text, score};
}

struct SchemaOptions {
    std::string id_column = "essay_id";
    std::string text_column = "full_text";
    std::string score_column = "score";

    void add(CLI::App* app) {
        app->add_option("--id-column", id_column, "Essay id column");
        app->add_option("--text-column", text_column, "Essay text column");
        app->add_option("--score-column", score_column, "Score column");
    }
    corpus::Schema schema() const { return schema_from(id_column, text_column, score_column); }
};

// ---------------------------------------------------------------------------
// Feature bundles: features.json + rows.txt + one file per part

constexpr const char* kBundleManifest = "features.json";

FeatureMatrix load_bundle(const fs::path& dir) {
    const json j = read_json(dir / kBundleManifest);
    try {
        if (j.at("format").get<std::string>() != kFeatureBundleFormat) {
            throw ValidationError("unsupported feature bundle format '" + j.at("format").get<std::string>() + "'");
        }
        const auto rows = read_ids(dir / j.at("rows").get<std::string>());
        std::vector<textfeats::FeaturePart> parts;
        for (const auto& p : j.at("parts")) {
            const auto kind = p.at("kind").get<std::string>();
            const auto source = p.at("source").get<std::string>();
            if (kind == "dense") {
                parts.push_back({source, read_dense_csv(dir / p.at("file").get<std::string>())});
            } else if (kind == "sparse") {
                const auto model = textfeats::vectorizer_from_json(read_json(dir / p.at("vectorizer").get<std::string>()));
                parts.push_back(
                    {source, textfeats::read_triplets(dir / p.at("file").get<std::string>(), rows, model.vocabulary())
                                 .to_dense()});
            } else if (kind == "embedding") {
                const auto set = embed::load_embeddings(dir / p.at("manifest").get<std::string>());
                parts.push_back({source, embed::to_feature_matrix(set)});
            } else {
                throw ValidationError("unknown feature part kind '" + kind + "'");
            }
        }
        if (parts.empty()) {
            throw ValidationError("feature bundle has no parts");
        }
        auto m = textfeats::build_feature_matrix(parts);
        return m.aligned_to(rows);
    } catch (const json::exception& e) {
        throw ValidationError((dir / kBundleManifest).string() + ": " + e.what());
    }
}

struct SplitIds {
    std::vector<std::string> train, validation, test;
};

SplitIds load_split(const fs::path& dir) {
    return {read_ids(dir / "train_ids.txt"), read_ids(dir / "validation_ids.txt"), read_ids(dir / "test_ids.txt")};
}

// ---------------------------------------------------------------------------
// split / stats

void add_split(CLI::App& root, std::vector<Command>& commands) {
    struct P {
        std::string input, out;
        std::vector<double> ratios{0.8, 0.1, 0.1};
        std::uint64_t seed = 42;
        bool stratify = true;
        SchemaOptions schema;
    };
    auto p = std::make_shared<P>();
    auto* app = root.add_subcommand("split", "Deterministic train/validation/test split of a corpus");
    app->add_option("--input", p->input, "Corpus CSV")->required();
    app->add_option("--ratios", p->ratios, "train,validation,test ratios")->delimiter(',')->expected(3);
    app->add_option("--seed", p->seed, "Run seed");
    add_switch(app, "stratify", p->stratify, "Split each score class separately");
    app->add_option("--out", p->out, "Output directory")->required();
    p->schema.add(app);
    commands.push_back({app, {"split"}, &p->out, [p](std::ostream& out) {
                            const auto c = corpus::load_corpus(p->input, p->schema.schema());
                            corpus::SplitSpec spec;
                            spec.ratios = {p->ratios[0], p->ratios[1], p->ratios[2]};
                            spec.seed = p->seed;
                            spec.stratified = p->stratify;
                            const auto s = corpus::split(c, spec);
                            corpus::write_split(p->out, spec, s);
                            out << "split: " << s.train.size() << " train, " << s.validation.size()
                                << " validation, " << s.test.size() << " test\n";
                        }});
}

void add_stats(CLI::App& root, std::vector<Command>& commands) {
    struct P {
        std::string input, out;
        SchemaOptions schema;
    };
    auto p = std::make_shared<P>();
    auto* app = root.add_subcommand("stats", "Corpus statistics");
    app->add_option("--input", p->input, "Corpus CSV")->required();
    app->add_option("--out", p->out, "Output directory")->required();
    p->schema.add(app);
    commands.push_back({app, {"stats"}, &p->out, [p](std::ostream& out) {
                            const auto stats = corpus::compute_stats(corpus::load_corpus(p->input, p->schema.schema()));
                            write_json(fs::path(p->out) / "stats.json", corpus::to_json(stats));
                            out << "stats: " << stats.n_essays << " scored essays, " << stats.n_over_500_words
                                << " over 500 words\n";
                        }});
}

// ---------------------------------------------------------------------------
// featurize

void add_featurize(CLI::App& root, std::vector<Command>& commands) {
    struct P {
        std::string input, split_dir, dictionary, out;
        bool handcrafted = true;
        std::vector<std::string> vectorizers{"tfidf"};
        std::size_t max_vocab = textfeats::kDefaultMaxVocab;
        std::size_t min_df = textfeats::kDefaultMinDf;
        std::vector<std::string> embeddings;
        SchemaOptions schema;
    };
    auto p = std::make_shared<P>();
    auto* app = root.add_subcommand("featurize", "Build a feature bundle from a corpus");
    app->add_option("--input", p->input, "Corpus CSV")->required();
    app->add_option("--split", p->split_dir, "Split directory; vectorizers are fitted on its train ids");
    add_switch(app, "handcrafted", p->handcrafted, "Include handcrafted text features");
    app->add_option("--vectorizers", p->vectorizers, "Any of tfidf, count (or none)")->delimiter(',');
    app->add_option("--max-vocab", p->max_vocab, "Vocabulary cap");
    app->add_option("--min-df", p->min_df, "Minimum document frequency");
    app->add_option("--dictionary", p->dictionary, "Word list for spelling-error counts");
    app->add_option("--embeddings", p->embeddings, "Embedding manifests to append")->delimiter(',');
    app->add_option("--out", p->out, "Output bundle directory")->required();
    p->schema.add(app);
    commands.push_back({app, {"featurize"}, &p->out, [p](std::ostream& out) {
        const auto c = corpus::load_corpus(p->input, p->schema.schema());
        std::vector<std::string> ids, texts;
        for (const auto& r : c) {
            ids.push_back(r.essay_id);
            texts.push_back(r.text);
        }
        std::vector<std::string> fit_texts = texts;
        if (!p->split_dir.empty()) {
            std::unordered_map<std::string, std::size_t> index;
            for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
            fit_texts.clear();
            for (const auto& id : read_ids(fs::path(p->split_dir) / "train_ids.txt")) {
                auto it = index.find(id);
                if (it == index.end()) {
                    throw ValidationError("train id '" + id + "' is not in the corpus");
                }
                fit_texts.push_back(texts[it->second]);
            }
        }
        const fs::path dir = p->out;
        json parts = json::array();
        if (p->handcrafted) {
            std::optional<textfeats::Dictionary> dict;
            if (!p->dictionary.empty()) dict = textfeats::Dictionary::load(p->dictionary);
            const auto m = textfeats::handcrafted_matrix(ids, texts, dict ? &*dict : nullptr);
            write_dense_csv(dir / "handcrafted.csv", m);
            parts.push_back({{"source", "handcrafted"},
                             {"kind", "dense"},
                             {"file", "handcrafted.csv"},
                             {"schema", kHandcraftedSchema},
                             {"spelling_checked", dict.has_value()}});
        }
        for (const auto& name : p->vectorizers) {
            if (name == "none") continue;
            const auto kind = textfeats::vectorizer_kind_from_string(name);
            const auto model = textfeats::fit_vectorizer(fit_texts, kind, p->max_vocab, p->min_df);
            const std::string base = textfeats::to_string(kind);
            write_json(dir / (base + ".vectorizer.json"), textfeats::to_json(model));
            textfeats::write_triplets(dir / (base + ".triplets.csv"), textfeats::transform_all(model, ids, texts));
            parts.push_back({{"source", base},
                             {"kind", "sparse"},
                             {"file", base + ".triplets.csv"},
                             {"vectorizer", base + ".vectorizer.json"}});
        }
        for (const auto& manifest : p->embeddings) {
            const auto set = embed::load_embeddings(manifest);
            std::unordered_set<std::string> have(set.row_ids.begin(), set.row_ids.end());
            if (have.size() != ids.size() ||
                !std::all_of(ids.begin(), ids.end(), [&](const std::string& id) { return have.contains(id); })) {
                throw ValidationError("embedding ids in " + manifest + " do not match the corpus");
            }
            const auto rel = fs::relative(fs::absolute(manifest), fs::absolute(dir)).generic_string();
            parts.push_back({{"source", "embedding"}, {"kind", "embedding"}, {"manifest", rel}});
        }
        if (parts.empty()) {
            throw UsageError("featurize needs at least one feature source");
        }
        write_lines(dir / "rows.txt", ids);
        write_json(dir / kBundleManifest, {{"format", kFeatureBundleFormat},
                                           {"tool_version", kToolVersion},
                                           {"rows", "rows.txt"},
                                           {"n_rows", ids.size()},
                                           {"fit_rows", fit_texts.size()},
                                           {"parts", parts}});
        out << "featurize: " << ids.size() << " rows, " << parts.size() << " parts\n";
    }});
}

// ---------------------------------------------------------------------------
// Embeddings

void add_embed_concat(CLI::App& root, std::vector<Command>& commands) {
    struct P {
        std::vector<std::string> inputs;
        std::string name = "concat", out;
    };
    auto p = std::make_shared<P>();
    auto* app = root.add_subcommand("embed-concat", "Concatenate embedding sets column-wise");
    app->add_option("--inputs", p->inputs, "Embedding manifests in concatenation order")->required()->delimiter(',');
    app->add_option("--name", p->name, "Output file stem");
    app->add_option("--out", p->out, "Output directory")->required();
    commands.push_back({app, {"embed-concat"}, &p->out, [p](std::ostream& out) {
                            std::vector<embed::EmbeddingSet> sets;
                            for (const auto& in : p->inputs) sets.push_back(embed::load_embeddings(in));
                            const auto joined = embed::concat(sets);
                            embed::write_embeddings(joined, p->out, p->name);
                            out << "embed-concat: " << joined.rows() << " rows, dim " << joined.dim() << "\n";
                        }});
}

void add_synth_embeddings(CLI::App& root, std::vector<Command>& commands) {
    struct P {
        std::string corpus, name = "synth", out;
        std::size_t count = 0, dim = 768;
        std::uint64_t seed = 42;
        bool signal = true;
        SchemaOptions schema;
    };
    auto p = std::make_shared<P>();
    auto* app = root.add_subcommand("synth-embeddings", "Deterministic synthetic embedding set");
    app->add_option("--corpus", p->corpus, "Corpus CSV supplying ids (and scores for the signal)");
    app->add_option("--count", p->count, "Row count when no corpus is given");
    app->add_option("--dim", p->dim, "Embedding width");
    app->add_option("--seed", p->seed, "Run seed");
    add_switch(app, "signal", p->signal, "Add a score-dependent direction (needs scores)");
    app->add_option("--name", p->name, "Model name and file stem");
    app->add_option("--out", p->out, "Output directory")->required();
    p->schema.add(app);
    commands.push_back({app, {"synth-embeddings"}, &p->out, [p](std::ostream& out) {
        std::vector<std::string> ids;
        std::vector<int> scores;
        bool all_scored = true;
        std::size_t count = p->count;
        if (!p->corpus.empty()) {
            for (const auto& r : corpus::load_corpus(p->corpus, p->schema.schema())) {
                ids.push_back(r.essay_id);
                scores.push_back(r.score.value_or(0));
                all_scored = all_scored && r.score.has_value();
            }
            count = ids.size();
        }
        if (p->signal && !p->corpus.empty() && !all_scored) {
            throw ValidationError("--signal needs a score for every essay");
        }
        const bool with_scores = p->signal && !p->corpus.empty();
        const auto set = embed::synth_embeddings(derive_seed(p->seed, "synth-embeddings"), count, p->dim,
                                                 with_scores ? &scores : nullptr, ids.empty() ? nullptr : &ids,
                                                 p->name);
        embed::write_embeddings(set, p->out, p->name);
        out << "synth-embeddings: " << set.rows() << " x " << set.dim() << "\n";
    }});
}

void add_synth_essays(CLI::App& root, std::vector<Command>& commands) {
    struct P {
        std::size_t count = 200;
        std::uint64_t seed = 42;
        std::string out;
    };
    auto p = std::make_shared<P>();
    auto* app = root.add_subcommand("synth-essays", "Synthetic corpus whose score is a clipped function of length");
    app->add_option("--count", p->count, "Number of essays");
    app->add_option("--seed", p->seed, "Run seed");
    app->add_option("--out", p->out, "Output directory (essays.csv)")->required();
    commands.push_back({app, {"synth-essays"}, &p->out, [p](std::ostream& out) {
                            const auto c = synth_essays(p->count, derive_seed(p->seed, "synth-essays"));
                            std::ostringstream os;
                            write_csv_row(os, {"essay_id", "full_text", "score"});
                            for (const auto& r : c) {
                                write_csv_row(os, {r.essay_id, r.text, std::to_string(*r.score)});
                            }
                            write_file(fs::path(p->out) / "essays.csv", os.str());
                            out << "synth-essays: " << c.size() << " essays\n";
                        }});
}

// ---------------------------------------------------------------------------
// train

void add_train(CLI::App& root, std::vector<Command>& commands) {
    auto* train = root.add_subcommand("train", "Train a learner");
    train->require_subcommand(1);

    struct G {
        std::string features, labels, split, out;
        std::string preset = "xgb-like";
        std::string objective = "multiclass_softmax";
        std::optional<int> rounds, max_leaves, max_depth, max_bins, min_samples_leaf, patience;
        std::optional<double> learning_rate, lambda, min_gain, colsample;
        std::optional<bool> goss;
        std::uint64_t seed = 42;
    };
    auto g = std::make_shared<G>();
    auto* gb = train->add_subcommand("gbdt", "Gradient-boosted trees");
    gb->add_option("--features", g->features, "Feature bundle directory")->required();
    gb->add_option("--labels", g->labels, "CSV with essay_id and score")->required();
    gb->add_option("--split", g->split, "Split directory")->required();
    gb->add_option("--preset", g->preset, "xgb-like or lgbm-like");
    gb->add_option("--objective", g->objective, "multiclass_softmax, ordinal_binary or squared_error");
    gb->add_option("--rounds", g->rounds, "Boosting rounds");
    gb->add_option("--learning-rate", g->learning_rate, "Shrinkage");
    gb->add_option("--max-leaves", g->max_leaves, "Leaf budget (leaf-wise)");
    gb->add_option("--max-depth", g->max_depth, "Depth limit");
    gb->add_option("--max-bins", g->max_bins, "Histogram bins per feature (<= 256)");
    gb->add_option("--min-samples-leaf", g->min_samples_leaf, "Minimum rows per leaf");
    gb->add_option("--lambda", g->lambda, "L2 penalty on leaf weights");
    gb->add_option("--min-gain", g->min_gain, "Minimum split gain");
    gb->add_option("--colsample", g->colsample, "Feature fraction per tree");
    gb->add_option("--goss", g->goss, "Enable gradient-based one-side sampling (true/false)");
    gb->add_option("--patience", g->patience, "Early-stopping patience (0 disables)");
    gb->add_option("--seed", g->seed, "Run seed");
    gb->add_option("--out", g->out, "Model directory")->required();
    auto g_effective = std::make_shared<json>();
    commands.push_back({gb, {"train", "gbdt"}, &g->out, [g, g_effective](std::ostream& out) {
        auto cfg = gbdt::GbdtConfig::preset(g->preset);
        cfg.objective = gbdt::objective_from_string(g->objective);
        if (g->rounds) cfg.n_rounds = *g->rounds;
        if (g->learning_rate) cfg.learning_rate = *g->learning_rate;
        if (g->max_leaves) cfg.max_leaves = *g->max_leaves;
        if (g->max_depth) cfg.max_depth = *g->max_depth;
        if (g->max_bins) cfg.max_bins = *g->max_bins;
        if (g->min_samples_leaf) cfg.min_samples_leaf = *g->min_samples_leaf;
        if (g->lambda) cfg.lambda_l2 = *g->lambda;
        if (g->min_gain) cfg.min_gain = *g->min_gain;
        if (g->colsample) cfg.colsample_per_tree = *g->colsample;
        if (g->goss) cfg.goss.enabled = *g->goss;
        if (g->patience) cfg.early_stopping_patience = *g->patience;
        cfg.seed = derive_seed(g->seed, "gbdt");
        cfg.validate();
        *g_effective = cfg.to_json();

        const auto x = load_bundle(g->features);
        const auto split = load_split(g->split);
        const auto labels = load_labels(g->labels);
        const auto xtr = x.select_rows(split.train);
        const auto ytr = labels_for(split.train, labels);
        std::optional<FeatureMatrix> xva;
        gbdt::ValidationSet valid;
        if (!split.validation.empty()) {
            xva = x.select_rows(split.validation);
            valid.features = &*xva;
            valid.labels = labels_for(split.validation, labels);
        }
        const auto forest = gbdt::train(xtr, ytr, cfg, xva ? &valid : nullptr);
        write_json(fs::path(g->out) / "model.json", forest.to_json());
        out << "train gbdt: " << forest.n_rounds() << " rounds kept of " << forest.log.size() << "\n";
    }, g_effective});

    struct M {
        std::string features, labels, split, out;
        std::vector<int> hidden{3200, 1600};
        std::string loss = "softmax_cross_entropy";
        double step_size = 0.001;
        int batch_size = 128, epochs = 8, folds = 10;
        std::uint64_t seed = 42;
    };
    auto m = std::make_shared<M>();
    auto* mp = train->add_subcommand("mlp", "Multilayer perceptron with k-fold selection");
    mp->add_option("--features", m->features, "Feature bundle directory")->required();
    mp->add_option("--labels", m->labels, "CSV with essay_id and score")->required();
    mp->add_option("--split", m->split, "Split directory (trains on its train ids)")->required();
    mp->add_option("--hidden", m->hidden, "Hidden layer widths")->delimiter(',');
    mp->add_option("--loss", m->loss, "softmax_cross_entropy or ordinal_bce");
    mp->add_option("--learning-rate", m->step_size, "Adam step size");
    mp->add_option("--batch-size", m->batch_size, "Mini-batch size");
    mp->add_option("--epochs", m->epochs, "Epochs per fold");
    mp->add_option("--folds", m->folds, "Cross-validation folds");
    mp->add_option("--seed", m->seed, "Run seed");
    mp->add_option("--out", m->out, "Model directory")->required();
    auto m_effective = std::make_shared<json>();
    commands.push_back({mp, {"train", "mlp"}, &m->out, [m, m_effective](std::ostream& out) {
        mlp::MlpConfig cfg;
        cfg.hidden = m->hidden;
        cfg.loss = mlp::loss_from_string(m->loss);
        cfg.step_size = m->step_size;
        cfg.batch_size = m->batch_size;
        cfg.epochs = m->epochs;
        cfg.k_folds = m->folds;
        cfg.seed = derive_seed(m->seed, "mlp");
        cfg.validate();
        *m_effective = cfg.to_json();
        const auto x = load_bundle(m->features);
        const auto split = load_split(m->split);
        const auto y = int_labels(labels_for(split.train, load_labels(m->labels)));
        const auto result = mlp::fit(x.select_rows(split.train), y, cfg);
        mlp::save_model(result.best, m->out);
        write_json(fs::path(m->out) / "folds.json", result.report_json());
        out << "train mlp: best fold " << result.best_fold << "\n";
    }, m_effective});
}

// ---------------------------------------------------------------------------
// predict

void add_predict(CLI::App& root, std::vector<Command>& commands) {
    struct P {
        std::string model, features, ids, out;
    };
    auto p = std::make_shared<P>();
    auto* app = root.add_subcommand("predict", "Score essays with a trained model");
    app->add_option("--model", p->model, "Model directory (gbdt or mlp)")->required();
    app->add_option("--features", p->features, "Feature bundle directory")->required();
    app->add_option("--ids", p->ids, "Restrict to the ids in this file, in its order");
    app->add_option("--out", p->out, "Output directory")->required();
    commands.push_back({app, {"predict"}, &p->out, [p](std::ostream& out) {
        auto x = load_bundle(p->features);
        if (!p->ids.empty()) {
            x = x.select_rows(read_ids(p->ids));
        }
        const auto& ids = x.row_ids();
        const fs::path dir = p->out;
        const json manifest = read_json(fs::path(p->model) / "model.json");
        const auto format = manifest.value("format", std::string{});
        std::vector<int> labels;
        if (format == kForestFormat) {
            const auto forest = gbdt::Forest::from_json(manifest);
            if (forest.config.objective == gbdt::Objective::squared_error) {
                ensemble::write_score_csv(dir / "predictions.csv", ids, gbdt::predict_continuous(forest, x));
            } else {
                ensemble::write_proba_csv(dir / "predictions.csv", ids, gbdt::predict_proba(forest, x));
            }
            labels = gbdt::predict_labels(forest, x);
        } else if (format == kMlpFormat) {
            const auto model = mlp::load_model(p->model);
            ensemble::write_proba_csv(dir / "predictions.csv", ids, mlp::predict_proba(model, x));
            labels = mlp::predict_labels(model, x);
        } else {
            throw ValidationError("unrecognized model format '" + format + "'");
        }
        ensemble::write_label_csv(dir / "labels.csv", ids, labels);
        out << "predict: " << ids.size() << " essays\n";
    }});
}

// ---------------------------------------------------------------------------
// evaluate

void add_evaluate(CLI::App& root, std::vector<Command>& commands) {
    struct P {
        std::string preds, truth, ids, name, out;
    };
    auto p = std::make_shared<P>();
    auto* app = root.add_subcommand("evaluate", "QWK, accuracy and confusion matrix of predictions");
    app->add_option("--preds", p->preds, "Prediction CSV (p1..p6 or score)")->required();
    app->add_option("--truth", p->truth, "CSV with essay_id and score")->required();
    app->add_option("--ids", p->ids, "Evaluate only these ids");
    app->add_option("--name", p->name, "Model name used in reports (default: file stem)");
    app->add_option("--out", p->out, "Output directory")->required();
    commands.push_back({app, {"evaluate"}, &p->out, [p](std::ostream& out) {
        auto preds = ensemble::read_predictions(p->preds);
        if (!p->ids.empty()) {
            preds = preds.aligned_to(read_ids(p->ids));
        }
        const auto predicted = preds.labels();
        const auto truth = int_labels(labels_for(preds.ids, load_labels(p->truth)));
        const auto report = metrics::evaluate(truth, predicted);
        json j = metrics::to_json(report);
        j["name"] = p->name.empty() ? fs::path(p->preds).stem().string() : p->name;
        write_json(fs::path(p->out) / "eval.json", j);
        out << "evaluate: qwk " << format_double(report.qwk) << " over " << report.n_evaluated << " essays\n";
    }});
}

// ---------------------------------------------------------------------------
// ensemble

std::vector<ensemble::PredictionTable> load_aligned(const std::vector<std::string>& paths) {
    std::vector<ensemble::PredictionTable> tables;
    for (const auto& path : paths) {
        tables.push_back(ensemble::read_predictions(path));
    }
    for (std::size_t i = 1; i < tables.size(); ++i) {
        tables[i] = tables[i].aligned_to(tables[0].ids);
    }
    return tables;
}

std::vector<ensemble::Distributions> distributions_of(const std::vector<ensemble::PredictionTable>& tables,
                                                      const std::vector<std::string>& paths) {
    std::vector<ensemble::Distributions> out;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (!tables[i].is_proba) {
            throw ValidationError(paths[i] + " holds scores, not p1..p6 distributions");
        }
        out.push_back(tables[i].proba);
    }
    return out;
}

void add_ensemble(CLI::App& root, std::vector<Command>& commands) {
    auto* ens = root.add_subcommand("ensemble", "Combine model predictions");
    ens->require_subcommand(1);

    struct Merge {
        std::vector<std::string> preds;
        std::vector<double> weights;
        std::string out;
    };
    auto mg = std::make_shared<Merge>();
    auto* merge = ens->add_subcommand("merge", "Weighted merge of probability predictions");
    merge->add_option("--preds", mg->preds, "Prediction CSVs")->required()->delimiter(',');
    merge->add_option("--weights", mg->weights, "One weight per model, summing to 1")->required()->delimiter(',');
    merge->add_option("--out", mg->out, "Output directory")->required();
    commands.push_back({merge, {"ensemble", "merge"}, &mg->out, [mg](std::ostream& out) {
                            const auto tables = load_aligned(mg->preds);
                            const auto merged = ensemble::weighted_merge(distributions_of(tables, mg->preds), mg->weights);
                            ensemble::write_proba_csv(fs::path(mg->out) / "predictions.csv", tables[0].ids, merged);
                            ensemble::write_label_csv(fs::path(mg->out) / "labels.csv", tables[0].ids,
                                                      ensemble::hard_labels(merged));
                            out << "ensemble merge: " << merged.size() << " essays\n";
                        }});

    struct Search {
        std::vector<std::string> preds;
        std::string truth, out;
        std::vector<double> grid{0.3, 0.4, 0.5, 0.6, 0.7};
        bool refine = true;
        double refine_step = 0.05, lattice_step = 0.1;
    };
    auto sr = std::make_shared<Search>();
    auto* search = ens->add_subcommand("search", "QWK-driven merge weight search");
    search->add_option("--preds", sr->preds, "Prediction CSVs")->required()->delimiter(',');
    search->add_option("--truth", sr->truth, "CSV with essay_id and score")->required();
    search->add_option("--grid", sr->grid, "First-model weights (two models)")->delimiter(',');
    add_switch(search, "refine", sr->refine, "Hill-climb around the best grid weight");
    search->add_option("--refine-step", sr->refine_step, "Refinement step");
    search->add_option("--lattice-step", sr->lattice_step, "Simplex lattice step (three or more models)");
    search->add_option("--out", sr->out, "Output directory")->required();
    commands.push_back({search, {"ensemble", "search"}, &sr->out, [sr](std::ostream& out) {
        const auto tables = load_aligned(sr->preds);
        const auto models = distributions_of(tables, sr->preds);
        const auto truth = int_labels(labels_for(tables[0].ids, load_labels(sr->truth)));
        ensemble::WeightSearchOptions opt;
        opt.grid = sr->grid;
        opt.refine = sr->refine;
        opt.refine_step = sr->refine_step;
        opt.lattice_step = sr->lattice_step;
        const auto result = ensemble::weight_search(models, truth, opt);
        json j = result.to_json();
        j["models"] = sr->preds;
        write_json(fs::path(sr->out) / "weight_search.json", j);
        const auto merged = ensemble::weighted_merge(models, result.weights);
        ensemble::write_proba_csv(fs::path(sr->out) / "predictions.csv", tables[0].ids, merged);
        ensemble::write_label_csv(fs::path(sr->out) / "labels.csv", tables[0].ids, ensemble::hard_labels(merged));
        out << "ensemble search: qwk " << format_double(result.qwk) << "\n";
    }});

    struct Vote {
        std::vector<std::string> preds;
        std::string out;
    };
    auto vt = std::make_shared<Vote>();
    auto* vote = ens->add_subcommand("vote", "Hard majority vote over label predictions");
    vote->add_option("--preds", vt->preds, "Prediction CSVs (labels or distributions)")->required()->delimiter(',');
    vote->add_option("--out", vt->out, "Output directory")->required();
    commands.push_back({vote, {"ensemble", "vote"}, &vt->out, [vt](std::ostream& out) {
                            const auto tables = load_aligned(vt->preds);
                            std::vector<std::vector<int>> labels;
                            for (const auto& t : tables) labels.push_back(t.labels());
                            const auto voted = ensemble::hard_vote(labels);
                            ensemble::write_label_csv(fs::path(vt->out) / "labels.csv", tables[0].ids, voted);
                            out << "ensemble vote: " << voted.size() << " essays\n";
                        }});

    struct Thresh {
        std::string scores, truth, thresholds, out;
    };
    auto th = std::make_shared<Thresh>();
    auto* thresh = ens->add_subcommand("thresholds", "Fit or apply cut points for continuous scores");
    thresh->add_option("--scores", th->scores, "CSV with essay_id and continuous score")->required();
    thresh->add_option("--truth", th->truth, "Labels to fit against");
    thresh->add_option("--thresholds", th->thresholds, "Previously fitted thresholds.json to apply");
    thresh->add_option("--out", th->out, "Output directory")->required();
    commands.push_back({thresh, {"ensemble", "thresholds"}, &th->out, [th](std::ostream& out) {
        const auto table = ensemble::read_predictions(th->scores);
        if (table.is_proba) {
            throw ValidationError(th->scores + " holds distributions, not continuous scores");
        }
        if (th->truth.empty() == th->thresholds.empty()) {
            throw UsageError("give exactly one of --truth (fit) or --thresholds (apply)");
        }
        ensemble::ThresholdFit fit;
        if (!th->truth.empty()) {
            const auto truth = int_labels(labels_for(table.ids, load_labels(th->truth)));
            fit = ensemble::fit_thresholds(table.score, truth);
            write_json(fs::path(th->out) / "thresholds.json", fit.to_json());
        } else {
            fit = ensemble::ThresholdFit::from_json(read_json(th->thresholds));
        }
        ensemble::write_label_csv(fs::path(th->out) / "labels.csv", table.ids,
                                  ensemble::apply_thresholds(table.score, fit.cuts));
        out << "ensemble thresholds: " << table.ids.size() << " essays\n";
    }});
}

// ---------------------------------------------------------------------------
// report

void add_report(CLI::App& root, std::vector<Command>& commands) {
    struct P {
        std::string stats, out;
        std::vector<std::string> evals, weights, thresholds;
    };
    auto p = std::make_shared<P>();
    auto* app = root.add_subcommand("report", "Markdown summary of evaluation artifacts");
    app->add_option("--stats", p->stats, "stats.json");
    app->add_option("--eval", p->evals, "eval.json files, one table row each")->delimiter(',');
    app->add_option("--weights", p->weights, "weight_search.json files")->delimiter(',');
    app->add_option("--thresholds", p->thresholds, "thresholds.json files")->delimiter(',');
    app->add_option("--out", p->out, "Output directory")->required();
    commands.push_back({app, {"report"}, &p->out, [p](std::ostream& out) {
                            ReportInputs in;
                            if (!p->stats.empty()) in.stats = read_json(p->stats);
                            for (const auto& e : p->evals) in.evals.push_back(read_json(e));
                            for (const auto& w : p->weights) in.weight_searches.push_back(read_json(w));
                            for (const auto& t : p->thresholds) in.thresholds.push_back(read_json(t));
                            write_file(fs::path(p->out) / "report.md", render_report(in));
                            out << "report: " << (fs::path(p->out) / "report.md").string() << "\n";
                        }});
}

}  // namespace

void register_commands(CLI::App& root, std::vector<Command>& commands) {
    add_split(root, commands);
    add_stats(root, commands);
    add_featurize(root, commands);
    add_embed_concat(root, commands);
    add_synth_embeddings(root, commands);
    add_synth_essays(root, commands);
    add_train(root, commands);
    add_predict(root, commands);
    add_evaluate(root, commands);
    add_ensemble(root, commands);
    add_report(root, commands);
}

}  // namespace aes::cli
