#include "aes/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "aes/csv.hpp"
#include "aes/error.hpp"
#include "aes/metrics.hpp"
#include "aes/parallel.hpp"

namespace aes::ensemble {

Distributions weighted_merge(std::span<const Distributions> models, std::span<const double> weights) {
    if (models.empty()) {
        throw ValidationError("weighted_merge needs at least one model");
    }
    if (models.size() != weights.size()) {
        throw ValidationError("weight count (" + std::to_string(weights.size()) + ") differs from model count (" +
                              std::to_string(models.size()) + ")");
    }
    double total = 0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ValidationError("merge weights must be finite and non-negative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("merge weights must sum to 1");
    }
    const std::size_t n = models[0].size();
    for (const auto& m : models) {
        if (m.size() != n) {
            throw ValidationError("models have different essay counts");
        }
    }
    Distributions out(n);
    for (std::size_t i = 0; i < n; ++i) {
        ScoreDistribution p{};
        for (std::size_t m = 0; m < models.size(); ++m) {
            for (std::size_t k = 0; k < p.size(); ++k) {
                p[k] += weights[m] * models[m][i][k];
            }
        }
        out[i] = p;
    }
    return out;
}

std::vector<int> hard_labels(const Distributions& d) {
    std::vector<int> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        out[i] = argmax_label(d[i]);
    }
    return out;
}

double merge_qwk(std::span<const Distributions> models, std::span<const int> truth, std::span<const double> weights) {
    const auto merged = weighted_merge(models, weights);
    if (merged.size() != truth.size()) {
        throw ValidationError("validation labels not aligned with predictions");
    }
    return metrics::qwk(truth, hard_labels(merged));
}

namespace {

double distance_to_uniform(const std::vector<double>& w) {
    const double u = 1.0 / static_cast<double>(w.size());
    double d = 0;
    for (double x : w) d += (x - u) * (x - u);
    return d;
}

constexpr double kWeightTol = 1e-12;

/// Strict total order used to pick the winning trial.
bool ranks_higher(const WeightTrial& a, const WeightTrial& b) {
    const double qa = a.qwk ? *a.qwk : -std::numeric_limits<double>::infinity();
    const double qb = b.qwk ? *b.qwk : -std::numeric_limits<double>::infinity();
    if (qa != qb) {
        return qa > qb;
    }
    const double da = distance_to_uniform(a.weights);
    const double db = distance_to_uniform(b.weights);
    if (std::abs(da - db) > kWeightTol) {
        return da < db;
    }
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
        if (std::abs(a.weights[i] - b.weights[i]) > kWeightTol) {
            return a.weights[i] < b.weights[i];
        }
    }
    return false;
}

WeightTrial run_trial(std::span<const Distributions> models, std::span<const int> truth, std::vector<double> weights,
                      const char* stage) {
    WeightTrial t{std::move(weights), std::nullopt, stage};
    try {
        t.qwk = merge_qwk(models, truth, t.weights);
    } catch (const DegenerateQwkError&) {
    }
    return t;
}

/// Weight vectors with components k*step summing to 1, in lexicographic order.
void lattice(std::size_t m, int units, std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
    if (prefix.size() + 1 == m) {
        prefix.push_back(units);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int k = 0; k <= units; ++k) {
        prefix.push_back(k);
        lattice(m, units - k, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

WeightSearchResult weight_search(std::span<const Distributions> models, std::span<const int> truth,
                                 const WeightSearchOptions& options) {
    if (models.size() < 2) {
        throw ValidationError("weight_search needs at least two models");
    }
    if (truth.empty()) {
        throw ValidationError("weight_search needs validation labels");
    }
    WeightSearchResult result;
    if (models.size() == 2) {
        if (options.grid.empty()) {
            throw ValidationError("weight grid is empty");
        }
        for (double w : options.grid) {
            if (!(w >= 0.0 && w <= 1.0)) {
                throw ValidationError("grid weights must lie in [0, 1]");
            }
        }
        std::vector<WeightTrial> coarse(options.grid.size());
        parallel_for(options.grid.size(), [&](std::size_t i) {
            coarse[i] = run_trial(models, truth, {options.grid[i], 1.0 - options.grid[i]}, "coarse");
        });
        result.table = coarse;
        std::size_t best = 0;
        for (std::size_t i = 1; i < coarse.size(); ++i) {
            if (ranks_higher(coarse[i], coarse[best])) best = i;
        }
        WeightTrial current = coarse[best];
        if (options.refine && options.grid.size() > 1) {
            if (!(options.refine_step > 0)) {
                throw ValidationError("refine_step must be positive");
            }
            auto seen = [&](double w) {
                return std::any_of(result.table.begin(), result.table.end(),
                                   [&](const WeightTrial& t) { return std::abs(t.weights[0] - w) <= kWeightTol; });
            };
            auto trial_at = [&](double w) -> const WeightTrial& {
                for (const auto& t : result.table) {
                    if (std::abs(t.weights[0] - w) <= kWeightTol) return t;
                }
                throw ValidationError("internal: missing weight trial");
            };
            while (true) {
                WeightTrial next = current;
                bool moved = false;
                for (double dir : {-1.0, 1.0}) {
                    // Round to the step lattice so repeated moves do not accumulate drift.
                    const double raw = current.weights[0] + dir * options.refine_step;
                    const double w = std::round(raw / options.refine_step) * options.refine_step;
                    if (w < options.refine_min - kWeightTol || w > options.refine_max + kWeightTol) {
                        continue;
                    }
                    if (!seen(w)) {
                        result.table.push_back(run_trial(models, truth, {w, 1.0 - w}, "refine"));
                    }
                    const WeightTrial& t = trial_at(w);
                    if (ranks_higher(t, next)) {
                        next = t;
                        moved = true;
                    }
                }
                if (!moved) {
                    break;
                }
                current = next;
            }
        }
        if (!current.qwk) {
            throw DegenerateQwkError("every weight trial produced a degenerate QWK");
        }
        result.weights = current.weights;
        result.qwk = *current.qwk;
        return result;
    }

    if (!(options.lattice_step > 0 && options.lattice_step <= 1)) {
        throw ValidationError("lattice_step must be in (0, 1]");
    }
    const int units = static_cast<int>(std::lround(1.0 / options.lattice_step));
    if (std::abs(units * options.lattice_step - 1.0) > 1e-9) {
        throw ValidationError("lattice_step must divide 1");
    }
    std::vector<std::vector<int>> points;
    std::vector<int> prefix;
    lattice(models.size(), units, prefix, points);
    result.table.resize(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        std::vector<double> w(points[i].size());
        for (std::size_t m = 0; m < w.size(); ++m) {
            w[m] = static_cast<double>(points[i][m]) / units;
        }
        result.table[i] = run_trial(models, truth, std::move(w), "lattice");
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.table.size(); ++i) {
        if (ranks_higher(result.table[i], result.table[best])) best = i;
    }
    if (!result.table[best].qwk) {
        throw DegenerateQwkError("every weight trial produced a degenerate QWK");
    }
    result.weights = result.table[best].weights;
    result.qwk = *result.table[best].qwk;
    return result;
}

nlohmann::json WeightSearchResult::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& t : table) {
        rows.push_back({{"weights", t.weights},
                        {"qwk", t.qwk ? nlohmann::json(*t.qwk) : nlohmann::json(nullptr)},
                        {"stage", t.stage}});
    }
    return {{"weights", weights}, {"qwk", qwk}, {"table", rows}};
}

int vote(std::span<const int> votes) {
    if (votes.empty()) {
        throw ValidationError("vote needs at least one label");
    }
    std::array<int, 7> counts{};
    long sum = 0;
    for (int v : votes) {
        if (v < 1 || v > 6) {
            throw ValidationError("vote label " + std::to_string(v) + " outside 1..6");
        }
        ++counts[static_cast<std::size_t>(v)];
        sum += v;
    }
    const int top = *std::max_element(counts.begin(), counts.end());
    const long m = static_cast<long>(votes.size());
    int best = 0;
    long best_dist = 0;
    for (int label = 1; label <= 6; ++label) {
        if (counts[static_cast<std::size_t>(label)] != top) continue;
        // |label - mean| scaled by M to stay in integers.
        const long dist = std::labs(label * m - sum);
        if (best == 0 || dist < best_dist) {
            best = label;
            best_dist = dist;
        }
    }
    return best;
}

std::vector<int> hard_vote(std::span<const std::vector<int>> models) {
    if (models.size() < 2) {
        throw ValidationError("hard_vote needs at least two models");
    }
    const std::size_t n = models[0].size();
    for (const auto& m : models) {
        if (m.size() != n) {
            throw ValidationError("label vectors have different lengths");
        }
    }
    std::vector<int> out(n);
    std::vector<int> votes(models.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < models.size(); ++m) votes[m] = models[m][i];
        out[i] = vote(votes);
    }
    return out;
}

int apply_threshold(double score, const ThresholdSet& cuts) {
    int label = 1;
    for (double c : cuts) {
        label += c < score ? 1 : 0;
    }
    return label;
}

std::vector<int> apply_thresholds(std::span<const double> scores, const ThresholdSet& cuts) {
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = apply_threshold(scores[i], cuts);
    }
    return out;
}

namespace {

std::optional<double> threshold_qwk(std::span<const double> scores, std::span<const int> truth,
                                    const ThresholdSet& cuts, std::vector<int>& buffer) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
        buffer[i] = apply_threshold(scores[i], cuts);
    }
    try {
        return metrics::qwk(truth, buffer);
    } catch (const DegenerateQwkError&) {
        return std::nullopt;
    }
}

}  // namespace

ThresholdFit fit_thresholds(std::span<const double> scores, std::span<const int> truth) {
    if (scores.size() != truth.size() || scores.empty()) {
        throw ValidationError("fit_thresholds needs equal, nonempty score and label vectors");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw ValidationError("non-finite continuous score at row " + std::to_string(i));
        }
    }
    std::vector<int> labels(truth.begin(), truth.end());
    std::sort(labels.begin(), labels.end());
    if (std::unique(labels.begin(), labels.end()) - labels.begin() < 2) {
        throw ValidationError("fit_thresholds needs at least 2 distinct true labels");
    }
    std::vector<double> unique(scores.begin(), scores.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (unique.size() < 2) {
        throw DegenerateQwkError("all continuous scores are identical; no cut can separate them");
    }
    std::vector<double> candidates;
    for (std::size_t i = 0; i + 1 < unique.size(); ++i) {
        double m = unique[i] + (unique[i + 1] - unique[i]) / 2.0;
        if (!(m >= unique[i] && m < unique[i + 1])) m = unique[i];
        candidates.push_back(m);
    }

    std::vector<int> buffer(scores.size());
    ThresholdFit fit;
    fit.initial_qwk = threshold_qwk(scores, truth, fit.cuts, buffer);
    double best = fit.initial_qwk ? *fit.initial_qwk : -std::numeric_limits<double>::infinity();
    bool changed = true;
    while (changed) {
        changed = false;
        ++fit.sweeps;
        for (std::size_t c = 0; c < fit.cuts.size(); ++c) {
            const double lo = c == 0 ? -std::numeric_limits<double>::infinity() : fit.cuts[c - 1];
            const double hi = c + 1 == fit.cuts.size() ? std::numeric_limits<double>::infinity() : fit.cuts[c + 1];
            ThresholdSet trial = fit.cuts;
            std::optional<double> pick;
            for (double m : candidates) {
                if (!(m > lo && m < hi) || m == fit.cuts[c]) continue;
                trial[c] = m;
                const auto q = threshold_qwk(scores, truth, trial, buffer);
                if (q && *q > best) {
                    best = *q;
                    pick = m;
                }
            }
            if (pick) {
                fit.cuts[c] = *pick;
                changed = true;
            }
        }
    }
    if (!std::isfinite(best)) {
        throw DegenerateQwkError("no threshold set produced a non-degenerate QWK");
    }
    fit.qwk = best;
    return fit;
}

nlohmann::json ThresholdFit::to_json() const {
    return {{"cuts", cuts},
            {"qwk", qwk},
            {"initial_qwk", initial_qwk ? nlohmann::json(*initial_qwk) : nlohmann::json(nullptr)},
            {"sweeps", sweeps}};
}

ThresholdFit ThresholdFit::from_json(const nlohmann::json& j) {
    try {
        ThresholdFit f;
        const auto cuts = j.at("cuts").get<std::vector<double>>();
        if (cuts.size() != f.cuts.size()) {
            throw ValidationError("threshold set must have 5 cuts");
        }
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            f.cuts[i] = cuts[i];
            if (!std::isfinite(cuts[i]) || (i > 0 && !(cuts[i] > cuts[i - 1]))) {
                throw ValidationError("threshold cuts must be finite and strictly increasing");
            }
        }
        f.qwk = j.value("qwk", 0.0);
        if (j.contains("initial_qwk") && !j.at("initial_qwk").is_null()) {
            f.initial_qwk = j.at("initial_qwk").get<double>();
        }
        f.sweeps = j.value("sweeps", 0);
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed threshold set: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Prediction files

std::vector<int> PredictionTable::labels() const {
    if (is_proba) {
        return hard_labels(proba);
    }
    std::vector<int> out(score.size());
    for (std::size_t i = 0; i < score.size(); ++i) {
        const double s = score[i];
        if (s != std::round(s) || s < 1 || s > 6) {
            throw ValidationError("score " + format_double(s) + " for essay '" + ids[i] +
                                  "' is not a label in 1..6");
        }
        out[i] = static_cast<int>(s);
    }
    return out;
}

PredictionTable PredictionTable::aligned_to(std::span<const std::string> order) const {
    if (order.size() != ids.size()) {
        throw ValidationError("prediction table has " + std::to_string(ids.size()) + " rows, expected " +
                              std::to_string(order.size()));
    }
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
    PredictionTable out;
    out.is_proba = is_proba;
    for (const auto& id : order) {
        auto it = index.find(id);
        if (it == index.end()) {
            throw ValidationError("essay id '" + id + "' missing from prediction table");
        }
        out.ids.push_back(id);
        if (is_proba) {
            out.proba.push_back(proba[it->second]);
        } else {
            out.score.push_back(score[it->second]);
        }
    }
    return out;
}

namespace {

void write_rows(const std::filesystem::path& path, const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (const auto& r : rows) write_csv_row(os, r);
    write_file(path, os.str());
}

}  // namespace

void write_proba_csv(const std::filesystem::path& path, std::span<const std::string> ids, const Distributions& proba) {
    if (ids.size() != proba.size()) {
        throw ValidationError("ids and distributions differ in length");
    }
    std::vector<std::vector<std::string>> rows{{"essay_id", "p1", "p2", "p3", "p4", "p5", "p6"}};
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::vector<std::string> r{ids[i]};
        for (double p : proba[i]) r.push_back(format_double(p));
        rows.push_back(std::move(r));
    }
    write_rows(path, rows);
}

void write_score_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                     std::span<const double> scores) {
    if (ids.size() != scores.size()) {
        throw ValidationError("ids and scores differ in length");
    }
    std::vector<std::vector<std::string>> rows{{"essay_id", "score"}};
    for (std::size_t i = 0; i < ids.size(); ++i) {
        rows.push_back({ids[i], format_double(scores[i])});
    }
    write_rows(path, rows);
}

void write_label_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                     std::span<const int> labels) {
    std::vector<double> s(labels.begin(), labels.end());
    write_score_csv(path, ids, s);
}

PredictionTable read_predictions(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const auto source = path.string();
    const std::size_t id_col = t.column("essay_id");
    if (id_col == CsvTable::npos) {
        throw ValidationError(source + ": missing essay_id column");
    }
    PredictionTable out;
    std::array<std::size_t, 6> pcols{};
    out.is_proba = true;
    for (std::size_t k = 0; k < 6; ++k) {
        pcols[k] = t.column("p" + std::to_string(k + 1));
        out.is_proba = out.is_proba && pcols[k] != CsvTable::npos;
    }
    const std::size_t score_col = t.column("score");
    if (!out.is_proba && score_col == CsvTable::npos) {
        throw ValidationError(source + ": expected columns p1..p6 or score");
    }
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& row : t.rows) {
        const std::string where = source + ":" + std::to_string(row.line);
        const std::string& id = row.fields[id_col];
        if (id.empty()) {
            throw ValidationError(where + ": empty essay_id");
        }
        if (!seen.emplace(id, out.ids.size()).second) {
            throw ValidationError(where + ": duplicate essay_id '" + id + "'");
        }
        out.ids.push_back(id);
        if (out.is_proba) {
            ScoreDistribution p{};
            double sum = 0;
            for (std::size_t k = 0; k < 6; ++k) {
                p[k] = parse_double(row.fields[pcols[k]], where + " p" + std::to_string(k + 1));
                if (!(p[k] >= 0.0)) {
                    throw ValidationError(where + ": negative or non-finite probability");
                }
                sum += p[k];
            }
            if (std::abs(sum - 1.0) > 1e-6) {
                throw ValidationError(where + ": probabilities sum to " + format_double(sum));
            }
            out.proba.push_back(p);
        } else {
            const std::string& s = row.fields[score_col];
            if (s.empty()) {
                throw ValidationError(where + ": empty score");
            }
            out.score.push_back(parse_double(s, where + " score"));
        }
    }
    return out;
}

}  // namespace aes::ensemble
