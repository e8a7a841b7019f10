#include "aes/ordinal.hpp"

#include <algorithm>
#include <string>

#include "aes/error.hpp"

namespace aes::ordinal {

OrdinalCode encode(int score) {
    if (score < 1 || score > kThresholds + 1) {
        throw ValidationError("score " + std::to_string(score) + " outside 1..6");
    }
    OrdinalCode code{};
    for (int t = 0; t < score - 1; ++t) {
        code[t] = 1.0;
    }
    return code;
}

int decode(std::span<const double> probabilities) {
    int score = 1;
    for (double p : probabilities) {
        if (p > 0.5) {
            ++score;
        }
    }
    return score;
}

std::array<double, kThresholds + 1> to_distribution(std::span<const double> probabilities) {
    std::array<double, kThresholds + 1> dist{};
    double prev = 1.0;
    for (std::size_t t = 0; t < probabilities.size() && t < kThresholds; ++t) {
        const double q = std::clamp(std::min(prev, probabilities[t]), 0.0, 1.0);
        dist[t] = prev - q;
        prev = q;
    }
    dist[kThresholds] = prev;
    return dist;
}

}  // namespace aes::ordinal
