#pragma once

#include <string>

#include "nle/common.hpp"
#include "nle/prob.hpp"

namespace nle {

inline void require_same_length(const Vector& e, const Vector& o) {
    if (e.size() != o.size()) {
        throw ShapeError("distribution lengths differ: " + std::to_string(e.size()) + " vs " +
                         std::to_string(o.size()));
    }
}

/// KL(e || o) = sum_i e_i log(e_i / o_i). Asymmetric; zero iff e == o.
inline double kl_divergence(const Vector& e, const Vector& o) {
    require_same_length(e, o);
    double d = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (e[i] > 0.0) d += e[i] * (floored_log(e[i]) - floored_log(o[i]));
    }
    return d;
}

/// SKL(e || o) = sum_i (e_i - o_i) log(e_i / o_i) = KL(e||o) + KL(o||e).
inline double skl_divergence(const Vector& e, const Vector& o) {
    require_same_length(e, o);
    double d = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        d += (e[i] - o[i]) * (floored_log(e[i]) - floored_log(o[i]));
    }
    return d;
}

}  // namespace nle
