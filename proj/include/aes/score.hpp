#pragma once

#include <array>
#include <cmath>
#include <span>

namespace aes {

/// Probability vector over score classes 1..6.
using ScoreDistribution = std::array<double, 6>;

/// Label 1..6 of the largest entry; ties go to the lower score.
inline int argmax_label(std::span<const double> p) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        if (p[k] > p[best]) {
            best = k;
        }
    }
    return static_cast<int>(best) + 1;
}

/// Numerically stable softmax of `logits` into `out` (same length).
inline void softmax(std::span<const double> logits, std::span<double> out) {
    double hi = logits[0];
    for (double v : logits) {
        hi = v > hi ? v : hi;
    }
    double sum = 0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out[k] = std::exp(logits[k] - hi);
        sum += out[k];
    }
    for (auto& v : out) {
        v /= sum;
    }
}

inline double sigmoid(double x) {
    if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace aes
