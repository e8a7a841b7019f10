#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace aes {

/// Seedable 64-bit generator with portable derived distributions.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are implementation-defined, so the
/// integer, uniform and normal draws below are derived by hand; every
/// consumer that needs cross-platform reproducibility goes through them.
class Rng {
public:
    /// Identity recorded in artifacts that depend on the draw sequence.
    static constexpr const char* kName = "mt19937_64/fisher-yates-v1";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Unbiased integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (no cached second draw).
    double normal();

    /// In-place Fisher-Yates: for i = n-1 down to 1 swap v[i] with v[uniform_index(i+1)].
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Per-stage seed derivation: splitmix64 finalizer over seed, FNV-1a(stage) and index.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage, std::uint64_t index = 0);

}  // namespace aes
