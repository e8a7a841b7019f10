#pragma once

#include <array>
#include <span>

namespace aes::ordinal {

/// Number of cumulative thresholds for scores 1..6.
inline constexpr int kThresholds = 5;

using OrdinalCode = std::array<double, kThresholds>;

/// Score s -> first (s-1) entries 1, the rest 0. Throws ValidationError outside 1..6.
OrdinalCode encode(int score);

/// 1 + number of entries strictly above 0.5. Non-monotone vectors are decoded
/// by the same count rule.
int decode(std::span<const double> probabilities);

/// Class distribution implied by threshold probabilities: P(s) = q_{s-1} - q_s
/// after forcing the q sequence non-increasing (running minimum).
std::array<double, kThresholds + 1> to_distribution(std::span<const double> probabilities);

}  // namespace aes::ordinal
