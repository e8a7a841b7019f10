#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <string>

#include "aes/cli.hpp"
#include "aes/error.hpp"
#include "aes/metrics.hpp"
#include "aes/rng.hpp"

namespace aes::cli {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string weights_text(const nlohmann::json& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i > 0) s += " / ";
        s += fixed(w[i].get<double>(), 2);
    }
    return s;
}

std::string qwk_cell(const nlohmann::json& q) { return q.is_null() ? "degenerate" : fixed(q.get<double>(), 4); }

}  // namespace

std::string render_report(const ReportInputs& in) {
    if (!in.stats && in.evals.empty() && in.weight_searches.empty() && in.thresholds.empty()) {
        throw UsageError("report needs at least one artifact");
    }
    std::ostringstream md;
    md << "# Essay scoring report\n";
    try {
        if (in.stats) {
            const auto& s = *in.stats;
            md << "\n## Dataset\n\n";
            md << "- Scored essays: " << s.at("n_essays").get<std::size_t>() << "\n";
            md << "- Unscored essays: " << s.at("n_unscored").get<std::size_t>() << "\n";
            md << "- Word count range: " << s.at("word_length_min").get<std::size_t>() << " to "
               << s.at("word_length_max").get<std::size_t>() << "\n";
            md << "- Essays over 500 words: " << s.at("n_over_500_words").get<std::size_t>() << "\n\n";
            md << "| Score | Essays |\n|---:|---:|\n";
            for (int k = 1; k <= 6; ++k) {
                md << "| " << k << " | " << s.at("score_histogram").at(std::to_string(k)).get<std::size_t>() << " |\n";
            }
        }
        if (!in.evals.empty()) {
            md << "\n## Model results\n\n";
            md << "| Model | QWK | Accuracy | Essays |\n|---|---:|---:|---:|\n";
            for (const auto& e : in.evals) {
                const auto r = metrics::eval_report_from_json(e);
                md << "| " << e.value("name", std::string{"(unnamed)"}) << " | " << fixed(r.qwk, 4) << " | "
                   << fixed(r.accuracy, 4) << " | " << r.n_evaluated << " |\n";
            }
            md << "\n## Confusion matrices\n\nRows are true scores, columns predicted scores.\n";
            for (const auto& e : in.evals) {
                const auto r = metrics::eval_report_from_json(e);
                md << "\n### " << e.value("name", std::string{"(unnamed)"}) << "\n\n";
                md << "| true \\ pred | 1 | 2 | 3 | 4 | 5 | 6 |\n|---|---:|---:|---:|---:|---:|---:|\n";
                for (int i = 0; i < metrics::kLevels; ++i) {
                    md << "| " << i + 1;
                    for (int j = 0; j < metrics::kLevels; ++j) {
                        md << " | " << r.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                    }
                    md << " |\n";
                }
            }
        }
        for (const auto& w : in.weight_searches) {
            md << "\n## Ensemble weights\n\n";
            if (w.contains("models")) {
                md << "Models: ";
                for (std::size_t i = 0; i < w.at("models").size(); ++i) {
                    md << (i ? ", " : "") << w.at("models")[i].get<std::string>();
                }
                md << "\n\n";
            }
            md << "Chosen weights " << weights_text(w.at("weights")) << " with validation QWK "
               << fixed(w.at("qwk").get<double>(), 4) << ".\n\n";
            md << "| Weights | Stage | QWK |\n|---|---|---:|\n";
            for (const auto& t : w.at("table")) {
                md << "| " << weights_text(t.at("weights")) << " | " << t.at("stage").get<std::string>() << " | "
                   << qwk_cell(t.at("qwk")) << " |\n";
            }
        }
        for (const auto& t : in.thresholds) {
            md << "\n## Thresholds\n\n";
            md << "Cuts:";
            for (const auto& c : t.at("cuts")) md << " " << fixed(c.get<double>(), 4);
            md << " (QWK " << fixed(t.at("qwk").get<double>(), 4) << ")\n";
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed report artifact: ") + e.what());
    }
    return md.str();
}

int synth_score_for_length(std::size_t words) {
    return static_cast<int>(std::clamp<std::size_t>(words / 100, 1, 6));
}

corpus::Corpus synth_essays(std::size_t count, std::uint64_t seed) {
    static constexpr std::array<const char*, 48> kWords{
        "the",     "students",  "school",   "should",   "because", "people",  "think",    "important",
        "many",    "example",   "reason",   "help",     "their",   "would",   "believe",  "community",
        "could",   "learning",  "online",   "classes",  "time",    "more",    "summer",   "projects",
        "teacher", "driverless", "cars",    "venus",    "face",    "mars",    "evidence", "author",
        "argument", "however",  "also",     "which",    "change",  "world",   "future",   "opinion",
        "support", "different", "technology", "family", "friends", "choice",  "advice",   "career"};
    Rng rng(seed);
    corpus::Corpus out;
    out.reserve(count);
    for (std::size_t e = 0; e < count; ++e) {
        const std::size_t target = 50 + static_cast<std::size_t>(rng.uniform_index(600));
        std::string text;
        std::size_t written = 0;
        while (written < target) {
            const std::size_t sentences = 3 + static_cast<std::size_t>(rng.uniform_index(4));
            if (!text.empty()) text += "\n\n";
            for (std::size_t s = 0; s < sentences && written < target; ++s) {
                const std::size_t len =
                    std::min(target - written, 6 + static_cast<std::size_t>(rng.uniform_index(13)));
                if (s > 0) text += ' ';
                for (std::size_t w = 0; w < len; ++w) {
                    std::string word = kWords[static_cast<std::size_t>(rng.uniform_index(kWords.size()))];
                    if (w == 0) word[0] = static_cast<char>(word[0] - 'a' + 'A');
                    if (w > 0) text += ' ';
                    text += word;
                }
                text += '.';
                written += len;
            }
        }
        char id[32];
        std::snprintf(id, sizeof id, "e%05zu", e);
        out.push_back({id, text, synth_score_for_length(target)});
    }
    return out;
}

}  // namespace aes::cli
