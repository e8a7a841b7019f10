#pragma once

namespace aes {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kEmbeddingFormat = "aes-emb/1";
inline constexpr const char* kForestFormat = "aes-gbdt/1";
inline constexpr const char* kMlpFormat = "aes-mlp/1";
inline constexpr const char* kVectorizerFormat = "aes-vec/1";
inline constexpr const char* kFeatureBundleFormat = "aes-features/1";
inline constexpr const char* kHandcraftedSchema = "handcrafted/1";

}  // namespace aes
