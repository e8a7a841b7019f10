#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aes/feature_matrix.hpp"

namespace aes::embed {

/// On-disk layout: <name>.emb.json (this manifest), <name>.emb.bin (count*dim
/// IEEE-754 binary32 values, little-endian, row-major) and <name>.ids.txt (one
/// essay id per line, row order). File paths are relative to the manifest.
struct EmbeddingManifest {
    std::string format_version = "aes-emb/1";
    std::string model_name;
    std::size_t dim = 0;
    std::string pooling = "cls";  ///< cls | mean; concatenations of mixed poolings record "mixed"
    std::size_t count = 0;
    std::string dtype = "f32le";
    std::string layout = "row-major";
    std::string data_file;
    std::string ids_file;
    std::vector<std::string> sources;  ///< ordered source models; filled by concat

    nlohmann::json to_json() const;
    static EmbeddingManifest from_json(const nlohmann::json& j);
};

struct EmbeddingSet {
    EmbeddingManifest manifest;
    std::vector<float> matrix;  ///< count x dim, row-major
    std::vector<std::string> row_ids;

    std::size_t rows() const noexcept { return row_ids.size(); }
    std::size_t dim() const noexcept { return manifest.dim; }
    std::span<const float> row(std::size_t r) const { return {matrix.data() + r * dim(), dim()}; }
};

/// Checks shape, finiteness (naming the first bad row/col) and id uniqueness.
void validate(const EmbeddingSet& set);

/// Reads the manifest triple without modifying any file. Throws IoError for
/// missing files and ValidationError for size mismatches, NaN/Inf, duplicate
/// ids or an unknown format_version.
EmbeddingSet load_embeddings(const std::filesystem::path& manifest_path);

/// Writes the triple under `dir` and returns the manifest path.
std::filesystem::path write_embeddings(const EmbeddingSet& set, const std::filesystem::path& dir,
                                       const std::string& name);

/// Column-wise concatenation in list order. Inputs must share row ids in the
/// same order. model_name becomes the '+'-joined source list.
EmbeddingSet concat(std::span<const EmbeddingSet> sets);

/// Columns "<model_name>/e<k>", values widened from float exactly.
FeatureMatrix to_feature_matrix(const EmbeddingSet& set);

/// Scale of the score direction added by synth_embeddings when scores are given.
inline constexpr double kSynthSignalScale = 6.0;

/// Deterministic N(0,1) fixture. With `scores`, row r additionally carries
/// kSynthSignalScale * (score_r - 3.5) along a seeded unit direction.
/// Throws ValidationError when count or dim is 0 or scores has the wrong length.
EmbeddingSet synth_embeddings(std::uint64_t seed, std::size_t count, std::size_t dim,
                              const std::vector<int>* scores = nullptr,
                              const std::vector<std::string>* ids = nullptr, const std::string& model_name = "synth");

}  // namespace aes::embed
