#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nle/common.hpp"
#include "nle/divergence.hpp"
#include "nle/prob.hpp"

namespace nle {

enum class CodebookMethod { l2, kl, skl };

inline std::string codebook_method_name(CodebookMethod m) {
    switch (m) {
        case CodebookMethod::l2: return "l2";
        case CodebookMethod::kl: return "kl";
        default: return "skl";
    }
}

inline CodebookMethod codebook_method_from_name(const std::string& name) {
    if (name == "l2") return CodebookMethod::l2;
    if (name == "kl") return CodebookMethod::kl;
    if (name == "skl") return CodebookMethod::skl;
    throw ConfigError("unknown codebook method '" + name + "' (expected l2, kl or skl)");
}

/// The embedding matrix: one l-vector per class, plus per-class frame counts.
/// Classes never seen in the source data stay uncovered; looking them up is
/// an error, and it is the caller's job to decide on a fallback.
struct Codebook {
    int num_classes = 0;
    CodebookMethod method = CodebookMethod::l2;
    Matrix rows;                      // num_classes x num_classes; uncovered rows are zero
    std::vector<long long> coverage;  // frames behind each row

    bool covered(int label) const {
        return label >= 0 && label < num_classes && coverage[static_cast<std::size_t>(label)] > 0;
    }

    Vector lookup(int label) const {
        if (label < 0 || label >= num_classes) {
            throw MissingEmbeddingError("class " + std::to_string(label) + " out of range [0, " +
                                        std::to_string(num_classes) + ")");
        }
        if (!covered(label)) {
            throw MissingEmbeddingError("class " + std::to_string(label) +
                                        " has no learned embedding (zero source coverage)");
        }
        return rows.row(label).transpose();
    }

    void validate() const {
        if (num_classes <= 0 || rows.rows() != num_classes || rows.cols() != num_classes ||
            coverage.size() != static_cast<std::size_t>(num_classes)) {
            throw ShapeError("codebook bookkeeping is inconsistent");
        }
        for (int c = 0; c < num_classes; ++c) {
            if (coverage[static_cast<std::size_t>(c)] > 0 &&
                !is_positive_prob_row(rows.row(c).transpose())) {
                throw NumericDomainError("codebook row " + std::to_string(c) +
                                         " violates the l-vector normalization");
            }
        }
    }
};

/// Pre-softmax logit rows backing the KL/SKL codebooks, one per class.
struct LogitTable {
    int num_classes = 0;
    Matrix z;                    // num_classes x num_classes
    std::vector<bool> defined;   // false for classes with zero coverage

    void require_defined(int label) const {
        if (label < 0 || label >= num_classes || !defined[static_cast<std::size_t>(label)]) {
            throw MissingEmbeddingError("logit row for class " + std::to_string(label) +
                                        " is undefined");
        }
    }
};

struct CentroidTrainConfig {
    double learning_rate = 0.5;
    int max_epochs = 2000;
    double convergence_tol = 1e-9;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
        if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
        if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
    }
};

namespace detail {

inline void check_labels(const Matrix& rows, const std::vector<int>& labels, int num_classes) {
    if (rows.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw ShapeError("row count " + std::to_string(rows.rows()) + " vs label count " +
                         std::to_string(labels.size()));
    }
    for (int y : labels) {
        if (y < 0 || y >= num_classes) {
            throw ShapeError("label " + std::to_string(y) + " out of range [0, " +
                             std::to_string(num_classes) + ")");
        }
    }
}

/// Per-class frame indices in a canonical order: sorted by row content
/// (lexicographic). Summing in this order makes every per-class statistic
/// bit-invariant to permutations of the input frames; frames with identical
/// rows are interchangeable addends.
inline std::vector<std::vector<Eigen::Index>> class_indices_canonical(const Matrix& rows,
                                                                      const std::vector<int>& labels,
                                                                      int num_classes) {
    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t n = 0; n < labels.size(); ++n) {
        by_class[static_cast<std::size_t>(labels[n])].push_back(static_cast<Eigen::Index>(n));
    }
    auto row_less = [&rows](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index i = 0; i < rows.cols(); ++i) {
            if (rows(a, i) != rows(b, i)) return rows(a, i) < rows(b, i);
        }
        return false;
    };
    for (auto& idx : by_class) std::sort(idx.begin(), idx.end(), row_less);
    return by_class;
}

/// Sufficient statistics of one class's output rows. Both centroid losses
/// depend on the frames only through these means, so centroid epochs cost
/// O(|C|) regardless of how many frames back the class.
struct ClassStats {
    long long count = 0;
    Vector mean_log_o;       // mean over frames of log o (floored)
    Vector mean_o;           // mean over frames of o
    double mean_o_log_o = 0; // mean over frames of sum_i o_i log o_i
};

inline ClassStats class_stats(const Matrix& outputs, const std::vector<Eigen::Index>& idx) {
    ClassStats s;
    s.count = static_cast<long long>(idx.size());
    s.mean_log_o = Vector::Zero(outputs.cols());
    s.mean_o = Vector::Zero(outputs.cols());
    for (Eigen::Index n : idx) {
        double row_o_log_o = 0.0;
        for (Eigen::Index i = 0; i < outputs.cols(); ++i) {
            const double o = outputs(n, i);
            const double lo = floored_log(o);
            s.mean_log_o[i] += lo;
            s.mean_o[i] += o;
            row_o_log_o += o * lo;
        }
        s.mean_o_log_o += row_o_log_o;
    }
    if (s.count > 0) {
        s.mean_log_o /= static_cast<double>(s.count);
        s.mean_o /= static_cast<double>(s.count);
        s.mean_o_log_o /= static_cast<double>(s.count);
    }
    return s;
}

/// Mean KL(e || o_n) over the class's frames, as a function of the logits z.
inline double kl_centroid_loss(const Vector& z, const ClassStats& s) {
    const Vector e = softmax(z);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        loss += e[i] * (floored_log(e[i]) - s.mean_log_o[i]);
    }
    return loss;
}

inline Vector kl_centroid_grad(const Vector& z, const ClassStats& s) {
    const Vector e = softmax(z);
    Vector g(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        g[i] = floored_log(e[i]) + 1.0 - s.mean_log_o[i];
    }
    const double mean_g = e.dot(g);
    return e.cwiseProduct((g.array() - mean_g).matrix());
}

/// Mean SKL(e || o_n) over the class's frames, as a function of z.
inline double skl_centroid_loss(const Vector& z, const ClassStats& s) {
    const Vector e = softmax(z);
    double loss = s.mean_o_log_o;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double log_e = floored_log(e[i]);
        loss += e[i] * (log_e - s.mean_log_o[i]) - s.mean_o[i] * log_e;
    }
    return loss;
}

inline Vector skl_centroid_grad(const Vector& z, const ClassStats& s) {
    const Vector e = softmax(z);
    Vector g(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double ei = std::max(e[i], kProbFloor);
        g[i] = floored_log(e[i]) + 1.0 - s.mean_log_o[i] - s.mean_o[i] / ei;
    }
    const double mean_g = e.dot(g);
    return e.cwiseProduct((g.array() - mean_g).matrix());
}

struct CentroidFit {
    Vector z;
    std::vector<double> loss_curve;
};

/// Gradient descent on z with step halving: a step is only accepted if it
/// does not increase the loss, so the recorded loss curve is non-increasing.
/// Accepted steps let the rate grow back toward 8x the configured value.
template <typename LossFn, typename GradFn>
CentroidFit centroid_descent(Vector z, const CentroidTrainConfig& cfg, LossFn loss_fn,
                             GradFn grad_fn) {
    CentroidFit fit;
    double loss = loss_fn(z);
    if (!std::isfinite(loss)) throw DivergenceError("centroid loss non-finite at initialization");
    fit.loss_curve.push_back(loss);
    double lr = cfg.learning_rate;
    const double lr_cap = cfg.learning_rate * 8.0;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const Vector g = grad_fn(z);
        bool accepted = false;
        Vector z_next;
        double loss_next = loss;
        for (int halving = 0; halving < 64; ++halving) {
            z_next = z - lr * g;
            loss_next = loss_fn(z_next);
            if (std::isfinite(loss_next) && loss_next <= loss) {
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if (!accepted) break;  // step size exhausted: at the numerical floor
        z = z_next;
        fit.loss_curve.push_back(loss_next);
        const double rel_change = std::abs(loss - loss_next) / std::max(std::abs(loss), 1e-12);
        loss = loss_next;
        lr = std::min(lr * 2.0, lr_cap);
        if (rel_change < cfg.convergence_tol) break;
    }
    if (!std::isfinite(loss)) throw DivergenceError("centroid loss non-finite");
    fit.z = std::move(z);
    return fit;
}

}  // namespace detail

/// L2-minimizing l-vectors: the per-class arithmetic mean of the posterior
/// rows. Rows inherit the simplex normalization from their addends.
inline Codebook learn_l2(const Matrix& outputs, const std::vector<int>& labels, int num_classes) {
    detail::check_labels(outputs, labels, num_classes);
    if (outputs.cols() != num_classes) {
        throw ShapeError("output dim " + std::to_string(outputs.cols()) +
                         " does not match num_classes " + std::to_string(num_classes));
    }
    require_prob_rows(outputs, "output");
    const auto by_class = detail::class_indices_canonical(outputs, labels, num_classes);

    Codebook cb;
    cb.num_classes = num_classes;
    cb.method = CodebookMethod::l2;
    cb.rows = Matrix::Zero(num_classes, num_classes);
    cb.coverage.assign(static_cast<std::size_t>(num_classes), 0);
    for (int c = 0; c < num_classes; ++c) {
        const auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.empty()) continue;
        Vector sum = Vector::Zero(num_classes);
        for (Eigen::Index n : idx) sum += outputs.row(n).transpose();
        cb.rows.row(c) = (sum / static_cast<double>(idx.size())).transpose();
        cb.coverage[static_cast<std::size_t>(c)] = static_cast<long long>(idx.size());
    }
    cb.validate();
    return cb;
}

/// Per-class arithmetic mean of the source net's pre-softmax logit rows;
/// the warm start for the KL/SKL descent.
inline LogitTable init_logits(const Matrix& pre_softmax, const std::vector<int>& labels,
                              int num_classes) {
    detail::check_labels(pre_softmax, labels, num_classes);
    if (pre_softmax.cols() != num_classes) {
        throw ShapeError("logit dim " + std::to_string(pre_softmax.cols()) +
                         " does not match num_classes " + std::to_string(num_classes));
    }
    const auto by_class = detail::class_indices_canonical(pre_softmax, labels, num_classes);

    LogitTable table;
    table.num_classes = num_classes;
    table.z = Matrix::Zero(num_classes, num_classes);
    table.defined.assign(static_cast<std::size_t>(num_classes), false);
    for (int c = 0; c < num_classes; ++c) {
        const auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.empty()) continue;
        Vector sum = Vector::Zero(num_classes);
        for (Eigen::Index n : idx) sum += pre_softmax.row(n).transpose();
        table.z.row(c) = (sum / static_cast<double>(idx.size())).transpose();
        table.defined[static_cast<std::size_t>(c)] = true;
    }
    return table;
}

namespace detail {

template <typename LossFn, typename GradFn>
Codebook learn_divergence_centroids(const Matrix& outputs, const std::vector<int>& labels,
                                    const LogitTable& init, const CentroidTrainConfig& cfg,
                                    CodebookMethod method, LossFn loss_fn, GradFn grad_fn) {
    cfg.validate();
    check_labels(outputs, labels, init.num_classes);
    if (outputs.cols() != init.num_classes) {
        throw ShapeError("output dim does not match the logit table");
    }
    require_prob_rows(outputs, "output");
    const int num_classes = init.num_classes;
    const auto by_class = class_indices_canonical(outputs, labels, num_classes);

    Codebook cb;
    cb.num_classes = num_classes;
    cb.method = method;
    cb.rows = Matrix::Zero(num_classes, num_classes);
    cb.coverage.assign(static_cast<std::size_t>(num_classes), 0);
    // Rows decouple: each class is fit from its own frames only.
    for (int c = 0; c < num_classes; ++c) {
        const auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.empty()) continue;
        init.require_defined(c);
        const ClassStats stats = class_stats(outputs, idx);
        auto fit = centroid_descent(
            init.z.row(c).transpose(), cfg,
            [&](const Vector& z) { return loss_fn(z, stats); },
            [&](const Vector& z) { return grad_fn(z, stats); });
        cb.rows.row(c) = softmax(fit.z).transpose();
        cb.coverage[static_cast<std::size_t>(c)] = static_cast<long long>(idx.size());
    }
    cb.validate();
    return cb;
}

}  // namespace detail

/// KL-minimizing l-vectors: gradient descent on the logits of each row,
/// source outputs held fixed.
inline Codebook learn_kl(const Matrix& outputs, const std::vector<int>& labels,
                         const LogitTable& init, const CentroidTrainConfig& cfg) {
    return detail::learn_divergence_centroids(outputs, labels, init, cfg, CodebookMethod::kl,
                                              detail::kl_centroid_loss, detail::kl_centroid_grad);
}

/// Symmetric-KL l-vectors, same descent with the SKL objective.
inline Codebook learn_skl(const Matrix& outputs, const std::vector<int>& labels,
                          const LogitTable& init, const CentroidTrainConfig& cfg) {
    return detail::learn_divergence_centroids(outputs, labels, init, cfg, CodebookMethod::skl,
                                              detail::skl_centroid_loss, detail::skl_centroid_grad);
}

/// Identity codebook pushed just inside the simplex; the degenerate case
/// where soft-target training collapses to one-hot retraining.
inline Codebook one_hot_codebook(int num_classes) {
    Codebook cb;
    cb.num_classes = num_classes;
    cb.method = CodebookMethod::l2;
    cb.rows = Matrix::Zero(num_classes, num_classes);
    cb.coverage.assign(static_cast<std::size_t>(num_classes), 1);
    for (int c = 0; c < num_classes; ++c) cb.rows.row(c) = one_hot_row(c, num_classes).transpose();
    cb.validate();
    return cb;
}

// ---------------------------------------------------------------------------
// Codebook file format: JSON with num_classes, method name, coverage counts
// and rows. Loading re-validates the normalization of every covered row.
// ---------------------------------------------------------------------------

inline nlohmann::json codebook_to_json(const Codebook& cb) {
    cb.validate();
    nlohmann::json j;
    j["num_classes"] = cb.num_classes;
    j["method"] = codebook_method_name(cb.method);
    j["coverage"] = cb.coverage;
    nlohmann::json rows = nlohmann::json::array();
    for (int c = 0; c < cb.num_classes; ++c) {
        std::vector<double> row(static_cast<std::size_t>(cb.num_classes));
        for (int i = 0; i < cb.num_classes; ++i) row[static_cast<std::size_t>(i)] = cb.rows(c, i);
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

inline Codebook codebook_from_json(const nlohmann::json& j) {
    Codebook cb;
    try {
        cb.num_classes = j.at("num_classes").get<int>();
        cb.method = codebook_method_from_name(j.at("method").get<std::string>());
        cb.coverage = j.at("coverage").get<std::vector<long long>>();
        const auto& rows = j.at("rows");
        if (cb.num_classes <= 0 || rows.size() != static_cast<std::size_t>(cb.num_classes)) {
            throw ShapeError("codebook row count does not match num_classes");
        }
        cb.rows = Matrix::Zero(cb.num_classes, cb.num_classes);
        for (int c = 0; c < cb.num_classes; ++c) {
            auto row = rows.at(static_cast<std::size_t>(c)).get<std::vector<double>>();
            if (row.size() != static_cast<std::size_t>(cb.num_classes)) {
                throw ShapeError("codebook row " + std::to_string(c) + " has wrong length");
            }
            for (int i = 0; i < cb.num_classes; ++i) cb.rows(c, i) = row[static_cast<std::size_t>(i)];
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed codebook document: ") + e.what());
    }
    cb.validate();
    return cb;
}

inline void save_codebook(const Codebook& cb, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << codebook_to_json(cb).dump(2) << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline Codebook load_codebook(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("cannot parse '" + path + "': " + e.what());
    }
    return codebook_from_json(j);
}

}  // namespace nle
