#pragma once

#include <cmath>
#include <limits>

namespace editodds {

// log(1 + exp(z)) without overflow for large |z|.
inline double softplus(double z) {
    if (z > 0.0) {
        return z + std::log1p(std::exp(-z));
    }
    return std::log1p(std::exp(z));
}

// Pulls a probability into the open interval (0, 1): the smallest normal
// double above 0 and the largest representable double below 1. Keeps log(p)
// and log1p(-p) finite even for constant predictors sitting at exactly 0 or 1.
inline double clamp_probability(double p) {
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    if (p < lo) return lo;
    if (p > hi) return hi;
    return p;
}

// Logistic function, branch on the sign of the argument so that exp() never
// overflows. The result is clamped into the open interval (0, 1).
inline double logistic(double z) {
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        p = e / (1.0 + e);
    }
    return clamp_probability(p);
}

// log(logistic(z)) = -softplus(-z); finite for every finite z.
inline double log_logistic(double z) {
    return -softplus(-z);
}

// Cross-entropy of outcome q in [0,1] against logit z:
//   -q*log(p) - (1-q)*log(1-p)  with p = logistic(z),
// computed from z directly so neither log can hit zero.
inline double logistic_loss(double z, double q) {
    return q * softplus(-z) + (1.0 - q) * softplus(z);
}

}  // namespace editodds
