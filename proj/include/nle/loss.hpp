#pragma once

#include <string>

#include "nle/common.hpp"
#include "nle/prob.hpp"

namespace nle {

/// Soft-target cross entropy: (1/N) sum_n sum_i -t_{n,i} * log o_{n,i},
/// natural log, probabilities floored inside the log. Targets may contain
/// zeros (one-hot is the limiting case); outputs must be valid posteriors.
inline double soft_cross_entropy(const Matrix& outputs, const Matrix& targets) {
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
        throw ShapeError("outputs " + std::to_string(outputs.rows()) + "x" +
                         std::to_string(outputs.cols()) + " vs targets " +
                         std::to_string(targets.rows()) + "x" + std::to_string(targets.cols()));
    }
    if (outputs.rows() == 0) throw ShapeError("empty batch");
    require_prob_rows(targets, "target");
    double total = 0.0;
    for (Eigen::Index n = 0; n < outputs.rows(); ++n) {
        for (Eigen::Index i = 0; i < outputs.cols(); ++i) {
            const double t = targets(n, i);
            if (t != 0.0) total -= t * floored_log(outputs(n, i));
        }
    }
    return total / static_cast<double>(outputs.rows());
}

/// Gradient of soft_cross_entropy with respect to the pre-softmax logits:
/// (outputs - targets) / N. Valid because outputs are exactly softmax(logits).
inline Matrix soft_cross_entropy_logit_grad(const Matrix& outputs, const Matrix& targets) {
    return (outputs - targets) / static_cast<double>(outputs.rows());
}

}  // namespace nle
