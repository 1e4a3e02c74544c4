// Test-only oracles, kept independent of the library's computation paths:
// plain-loop divergence sums over raw frames, brute-force grid search,
// closed-form centroids, and central finite differences.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double floored_log(double p) { return std::log(std::max(p, 1e-12)); }

inline double kl(const std::vector<double>& e, const std::vector<double>& o) {
    double d = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] > 0.0) d += e[i] * (floored_log(e[i]) - floored_log(o[i]));
    }
    return d;
}

inline double skl(const std::vector<double>& e, const std::vector<double>& o) {
    double d = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        d += (e[i] - o[i]) * (floored_log(e[i]) - floored_log(o[i]));
    }
    return d;
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

/// Mean KL(e || row_n) directly over frames, no sufficient statistics.
inline double mean_kl_to_rows(const std::vector<double>& e, const Eigen::MatrixXd& rows) {
    double sum = 0.0;
    for (Eigen::Index n = 0; n < rows.rows(); ++n) {
        sum += kl(e, to_std(rows.row(n).transpose()));
    }
    return sum / static_cast<double>(rows.rows());
}

inline double mean_skl_to_rows(const std::vector<double>& e, const Eigen::MatrixXd& rows) {
    double sum = 0.0;
    for (Eigen::Index n = 0; n < rows.rows(); ++n) {
        sum += skl(e, to_std(rows.row(n).transpose()));
    }
    return sum / static_cast<double>(rows.rows());
}

/// Closed-form KL centroid: normalized exp(mean log o).
inline std::vector<double> geometric_mean_centroid(const Eigen::MatrixXd& rows) {
    std::vector<double> mean_log(static_cast<std::size_t>(rows.cols()), 0.0);
    for (Eigen::Index n = 0; n < rows.rows(); ++n) {
        for (Eigen::Index i = 0; i < rows.cols(); ++i) {
            mean_log[static_cast<std::size_t>(i)] += floored_log(rows(n, i));
        }
    }
    double z = 0.0;
    std::vector<double> e(mean_log.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = std::exp(mean_log[i] / static_cast<double>(rows.rows()));
        z += e[i];
    }
    for (double& v : e) v /= z;
    return e;
}

inline std::vector<double> arithmetic_mean_centroid(const Eigen::MatrixXd& rows) {
    std::vector<double> mean(static_cast<std::size_t>(rows.cols()), 0.0);
    for (Eigen::Index n = 0; n < rows.rows(); ++n) {
        for (Eigen::Index i = 0; i < rows.cols(); ++i) {
            mean[static_cast<std::size_t>(i)] += rows(n, i);
        }
    }
    for (double& v : mean) v /= static_cast<double>(rows.rows());
    return mean;
}

/// Brute-force SKL minimizer over the 2-simplex with the given step.
inline std::vector<double> grid_search_skl_2class(const Eigen::MatrixXd& rows, double step = 1e-3) {
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<double> best{0.5, 0.5};
    for (double p = step; p < 1.0 - step / 2; p += step) {
        const std::vector<double> e{p, 1.0 - p};
        const double loss = mean_skl_to_rows(e, rows);
        if (loss < best_loss) {
            best_loss = loss;
            best = e;
        }
    }
    return best;
}

/// Independent two-pass arithmetic mean over one class's rows, summed in
/// the library's documented canonical order (rows sorted lexicographically).
inline std::vector<double> two_pass_class_mean(const Eigen::MatrixXd& outputs,
                                               const std::vector<int>& labels, int cls) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index n = 0; n < outputs.rows(); ++n) {
        if (labels[static_cast<std::size_t>(n)] == cls) rows.push_back(to_std(outputs.row(n).transpose()));
    }
    std::sort(rows.begin(), rows.end());
    std::vector<double> sum(static_cast<std::size_t>(outputs.cols()), 0.0);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) sum[i] += row[i];
    }
    for (double& v : sum) v /= static_cast<double>(rows.size());
    return sum;
}

/// Central finite difference of a scalar function of a vector.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double eps = 1e-6) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + eps;
        const double up = f(probe);
        probe[i] = x[i] - eps;
        const double down = f(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * eps);
    }
    return g;
}

/// Random simplex-interior row via softmax of a Gaussian logit draw.
inline Eigen::VectorXd random_prob_row(std::mt19937_64& rng, int dim, double spread = 1.5) {
    std::normal_distribution<double> normal(0.0, spread);
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z[i] = normal(rng);
    Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
}

inline Eigen::MatrixXd random_prob_rows(std::mt19937_64& rng, int n, int dim, double spread = 1.5) {
    Eigen::MatrixXd rows(n, dim);
    for (int r = 0; r < n; ++r) rows.row(r) = random_prob_row(rng, dim, spread).transpose();
    return rows;
}

}  // namespace oracle
