#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nle/common.hpp"

namespace nle {

/// log with the probability floor applied. Rejects non-finite or negative
/// input instead of silently flooring it.
inline double floored_log(double p) {
    if (!std::isfinite(p) || p < 0.0) {
        throw NumericDomainError("probability entry " + std::to_string(p) +
                                 " cannot be floored into (0, 1]");
    }
    return std::log(p < kProbFloor ? kProbFloor : p);
}

/// Softmax of one logit row, shifted by the row max so exp never overflows.
inline Vector softmax(const Vector& logits) {
    const double shift = logits.maxCoeff();
    Vector e = (logits.array() - shift).exp();
    return e / e.sum();
}

/// Row-wise softmax of a logit matrix.
inline Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        out.row(n) = softmax(logits.row(n).transpose()).transpose();
    }
    return out;
}

/// True iff v has nonnegative entries summing to 1 within kRowSumTol.
/// Zero entries are allowed: one-hot targets are the limiting case.
inline bool is_prob_row(const Vector& v) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] < 0.0) return false;
        sum += v[i];
    }
    return std::abs(sum - 1.0) <= kRowSumTol;
}

/// True iff v additionally has strictly positive entries (codebook rows).
inline bool is_positive_prob_row(const Vector& v) {
    if (!is_prob_row(v)) return false;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] <= 0.0) return false;
    }
    return true;
}

inline void require_prob_rows(const Matrix& rows, const std::string& what) {
    for (Eigen::Index n = 0; n < rows.rows(); ++n) {
        if (!is_prob_row(rows.row(n).transpose())) {
            throw NumericDomainError(what + " row " + std::to_string(n) +
                                     " is not a probability vector");
        }
    }
}

/// Shannon entropy in nats, with floored logs.
inline double entropy(const Vector& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) h -= p[i] * floored_log(p[i]);
    }
    return h;
}

/// One-hot row pushed just inside the simplex interior: off entries take the
/// probability floor and the hot entry absorbs the difference, so the row
/// still sums to 1 while satisfying the strict-positivity normalization.
inline Vector one_hot_row(int label, int num_classes) {
    if (label < 0 || label >= num_classes) {
        throw ShapeError("one-hot label " + std::to_string(label) + " out of range [0, " +
                         std::to_string(num_classes) + ")");
    }
    Vector row = Vector::Constant(num_classes, kProbFloor);
    row[label] = 1.0 - kProbFloor * (num_classes - 1);
    return row;
}

/// Stack of one_hot_row for a whole label vector.
inline Matrix one_hot_rows(const std::vector<int>& labels, int num_classes) {
    Matrix rows(static_cast<Eigen::Index>(labels.size()), num_classes);
    for (std::size_t n = 0; n < labels.size(); ++n) {
        rows.row(static_cast<Eigen::Index>(n)) = one_hot_row(labels[n], num_classes).transpose();
    }
    return rows;
}

/// Argmax with ties broken toward the lowest index.
inline int argmax_lowest(const Vector& v) {
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

}  // namespace nle
