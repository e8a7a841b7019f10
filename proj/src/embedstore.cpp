#include "aes/embedstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "aes/csv.hpp"
#include "aes/error.hpp"
#include "aes/rng.hpp"
#include "aes/version.hpp"

namespace aes::embed {

nlohmann::json EmbeddingManifest::to_json() const {
    nlohmann::json j = {
        {"format_version", format_version},
        {"model_name", model_name},
        {"dim", dim},
        {"pooling", pooling},
        {"count", count},
        {"dtype", dtype},
        {"layout", layout},
        {"data_file", data_file},
        {"ids_file", ids_file},
    };
    if (!sources.empty()) {
        j["sources"] = sources;
    }
    return j;
}

EmbeddingManifest EmbeddingManifest::from_json(const nlohmann::json& j) {
    EmbeddingManifest m;
    try {
        m.format_version = j.at("format_version").get<std::string>();
        if (m.format_version != kEmbeddingFormat) {
            throw ValidationError("unknown embedding format_version '" + m.format_version + "'");
        }
        m.model_name = j.at("model_name").get<std::string>();
        m.dim = j.at("dim").get<std::size_t>();
        m.pooling = j.at("pooling").get<std::string>();
        m.count = j.at("count").get<std::size_t>();
        m.dtype = j.at("dtype").get<std::string>();
        m.layout = j.at("layout").get<std::string>();
        m.data_file = j.at("data_file").get<std::string>();
        m.ids_file = j.at("ids_file").get<std::string>();
        if (j.contains("sources")) {
            m.sources = j.at("sources").get<std::vector<std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed embedding manifest: ") + e.what());
    }
    if (m.dtype != "f32le" || m.layout != "row-major") {
        throw ValidationError("unsupported embedding dtype/layout " + m.dtype + "/" + m.layout);
    }
    if (m.pooling != "cls" && m.pooling != "mean" && m.pooling != "mixed") {
        throw ValidationError("unknown pooling '" + m.pooling + "'");
    }
    if (m.dim == 0) {
        throw ValidationError("embedding dim must be positive");
    }
    return m;
}

void validate(const EmbeddingSet& set) {
    const auto& m = set.manifest;
    if (m.dim == 0) {
        throw ValidationError("embedding dim must be positive");
    }
    if (set.row_ids.size() != m.count || set.matrix.size() != m.count * m.dim) {
        throw ValidationError("embedding set shape does not match manifest (" + std::to_string(m.count) + "x" +
                              std::to_string(m.dim) + ")");
    }
    for (std::size_t r = 0; r < m.count; ++r) {
        for (std::size_t c = 0; c < m.dim; ++c) {
            const float v = set.matrix[r * m.dim + c];
            if (!std::isfinite(v)) {
                throw ValidationError(std::string(std::isnan(v) ? "NaN" : "Inf") + " in embedding '" + m.model_name +
                                      "' at row " + std::to_string(r) + ", col " + std::to_string(c));
            }
        }
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : set.row_ids) {
        if (!seen.insert(id).second) {
            throw ValidationError("duplicate id '" + id + "' in embedding '" + m.model_name + "'");
        }
    }
}

EmbeddingSet load_embeddings(const std::filesystem::path& manifest_path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(manifest_path.string() + ": " + e.what());
    }
    EmbeddingSet set;
    set.manifest = EmbeddingManifest::from_json(j);
    const auto base = manifest_path.parent_path();
    const auto data_path = base / set.manifest.data_file;
    const auto ids_path = base / set.manifest.ids_file;

    const std::string bytes = read_file(data_path);
    const std::size_t expected = set.manifest.count * set.manifest.dim * 4;
    if (bytes.size() != expected) {
        throw ValidationError(data_path.string() + ": size mismatch, expected " + std::to_string(expected) +
                              " bytes, found " + std::to_string(bytes.size()));
    }
    set.matrix.resize(set.manifest.count * set.manifest.dim);
    for (std::size_t i = 0; i < set.matrix.size(); ++i) {
        std::uint32_t u = 0;
        for (int b = 3; b >= 0; --b) {
            u = (u << 8) | static_cast<unsigned char>(bytes[i * 4 + static_cast<std::size_t>(b)]);
        }
        set.matrix[i] = std::bit_cast<float>(u);
    }

    set.row_ids = read_lines(ids_path);
    if (set.row_ids.size() != set.manifest.count) {
        throw ValidationError(ids_path.string() + ": expected " + std::to_string(set.manifest.count) +
                              " ids, found " + std::to_string(set.row_ids.size()));
    }
    validate(set);
    return set;
}

std::filesystem::path write_embeddings(const EmbeddingSet& set, const std::filesystem::path& dir,
                                       const std::string& name) {
    validate(set);
    EmbeddingSet out = set;
    out.manifest.data_file = name + ".emb.bin";
    out.manifest.ids_file = name + ".ids.txt";

    std::string bytes(set.matrix.size() * 4, '\0');
    for (std::size_t i = 0; i < set.matrix.size(); ++i) {
        const auto u = std::bit_cast<std::uint32_t>(set.matrix[i]);
        for (int b = 0; b < 4; ++b) {
            bytes[i * 4 + static_cast<std::size_t>(b)] = static_cast<char>((u >> (8 * b)) & 0xFF);
        }
    }
    write_file(dir / out.manifest.data_file, bytes);
    write_lines(dir / out.manifest.ids_file, set.row_ids);
    const auto manifest_path = dir / (name + ".emb.json");
    write_file(manifest_path, out.manifest.to_json().dump(2) + "\n");
    return manifest_path;
}

EmbeddingSet concat(std::span<const EmbeddingSet> sets) {
    if (sets.empty()) {
        throw ValidationError("nothing to concatenate");
    }
    const auto& ids = sets.front().row_ids;
    EmbeddingSet out;
    out.row_ids = ids;
    out.manifest.count = ids.size();
    out.manifest.pooling = sets.front().manifest.pooling;
    std::string name;
    for (const auto& s : sets) {
        if (s.row_ids != ids) {
            std::unordered_set<std::string> a(ids.begin(), ids.end());
            const bool same_set = s.row_ids.size() == ids.size() &&
                                  std::all_of(s.row_ids.begin(), s.row_ids.end(),
                                              [&](const std::string& id) { return a.contains(id); });
            throw ValidationError(same_set ? "embedding '" + s.manifest.model_name + "' lists ids in a different order"
                                           : "embedding '" + s.manifest.model_name + "' has different ids");
        }
        out.manifest.dim += s.manifest.dim;
        if (s.manifest.pooling != out.manifest.pooling) {
            out.manifest.pooling = "mixed";
        }
        const auto& src = s.manifest.sources.empty() ? std::vector<std::string>{s.manifest.model_name}
                                                     : s.manifest.sources;
        out.manifest.sources.insert(out.manifest.sources.end(), src.begin(), src.end());
    }
    for (std::size_t i = 0; i < out.manifest.sources.size(); ++i) {
        name += (i == 0 ? "" : "+") + out.manifest.sources[i];
    }
    out.manifest.model_name = name;
    out.matrix.reserve(out.manifest.count * out.manifest.dim);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        for (const auto& s : sets) {
            auto row = s.row(r);
            out.matrix.insert(out.matrix.end(), row.begin(), row.end());
        }
    }
    return out;
}

FeatureMatrix to_feature_matrix(const EmbeddingSet& set) {
    std::vector<std::string> names;
    names.reserve(set.dim());
    for (std::size_t c = 0; c < set.dim(); ++c) {
        names.push_back(set.manifest.model_name + "/e" + std::to_string(c));
    }
    std::vector<double> values(set.matrix.begin(), set.matrix.end());
    return FeatureMatrix(std::move(names), set.row_ids, std::move(values));
}

EmbeddingSet synth_embeddings(std::uint64_t seed, std::size_t count, std::size_t dim, const std::vector<int>* scores,
                              const std::vector<std::string>* ids, const std::string& model_name) {
    if (count == 0 || dim == 0) {
        throw ValidationError("synthetic embeddings need count > 0 and dim > 0");
    }
    if (scores != nullptr && scores->size() != count) {
        throw ValidationError("score vector length differs from count");
    }
    if (ids != nullptr && ids->size() != count) {
        throw ValidationError("id list length differs from count");
    }
    Rng rng(derive_seed(seed, "synth-embeddings"));
    std::vector<double> direction(dim);
    double norm = 0;
    for (auto& d : direction) {
        d = rng.normal();
        norm += d * d;
    }
    norm = std::sqrt(norm);
    for (auto& d : direction) {
        d /= norm;
    }

    EmbeddingSet set;
    set.manifest.model_name = model_name;
    set.manifest.dim = dim;
    set.manifest.count = count;
    set.matrix.resize(count * dim);
    for (std::size_t r = 0; r < count; ++r) {
        const double signal = scores != nullptr ? kSynthSignalScale * ((*scores)[r] - 3.5) : 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            set.matrix[r * dim + c] = static_cast<float>(rng.normal() + signal * direction[c]);
        }
    }
    if (ids != nullptr) {
        set.row_ids = *ids;
    } else {
        set.row_ids.reserve(count);
        char buf[32];
        for (std::size_t r = 0; r < count; ++r) {
            std::snprintf(buf, sizeof buf, "synth%06zu", r);
            set.row_ids.emplace_back(buf);
        }
    }
    validate(set);
    return set;
}

}  // namespace aes::embed
