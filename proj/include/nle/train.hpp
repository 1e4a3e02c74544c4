#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "nle/common.hpp"
#include "nle/loss.hpp"
#include "nle/network.hpp"

namespace nle {

enum class Optimizer { sgd, adam };

inline std::string optimizer_name(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adam"; }

inline Optimizer optimizer_from_name(const std::string& name) {
    if (name == "sgd") return Optimizer::sgd;
    if (name == "adam") return Optimizer::adam;
    throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

struct TrainConfig {
    Optimizer optimizer = Optimizer::sgd;
    double learning_rate = 0.05;
    int batch_size = 64;
    int max_epochs = 200;
    double convergence_tol = 1e-6;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
        if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
    }
};

struct TrainResult {
    Network net;
    /// loss_curve[0] is the full-data loss before any update; entry k is the
    /// full-data loss after epoch k.
    std::vector<double> loss_curve;
    int epochs = 0;
};

namespace detail {

struct ForwardCache {
    std::vector<Matrix> activations;      // activations[0] = batch input
    std::vector<Matrix> pre_activations;  // per layer, before the nonlinearity
    Matrix outputs;                       // softmax posteriors
};

inline ForwardCache forward_cache(const Network& net, const Matrix& batch) {
    ForwardCache cache;
    cache.activations.push_back(batch);
    Matrix a = batch;
    for (int l = 0; l < net.num_layers(); ++l) {
        Matrix z = (a * net.weights[l].transpose()).rowwise() + net.biases[l].transpose();
        cache.pre_activations.push_back(z);
        if (l + 1 < net.num_layers()) {
            a = z.unaryExpr([&](double v) { return net.apply_hidden(v); });
            cache.activations.push_back(a);
        } else {
            a = z;
        }
    }
    cache.outputs = softmax_rows(a);
    return cache;
}

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

/// Backprop of the soft cross-entropy through the cached batch.
inline Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& targets) {
    Gradients g;
    g.weights.resize(net.num_layers());
    g.biases.resize(net.num_layers());
    Matrix delta = soft_cross_entropy_logit_grad(cache.outputs, targets);
    for (int l = net.num_layers() - 1; l >= 0; --l) {
        g.weights[l].noalias() = delta.transpose() * cache.activations[l];
        g.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            Matrix deriv;
            if (net.hidden_activation == Activation::relu) {
                deriv = cache.pre_activations[l - 1].unaryExpr(
                    [](double v) { return v > 0.0 ? 1.0 : 0.0; });
            } else {
                deriv = cache.pre_activations[l - 1].unaryExpr(
                    [](double v) { const double t = std::tanh(v); return 1.0 - t * t; });
            }
            delta = (delta * net.weights[l]).cwiseProduct(deriv);
        }
    }
    return g;
}

struct AdamState {
    std::vector<Matrix> mw, vw;
    std::vector<Vector> mb, vb;
    long long step = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit AdamState(const Network& net) {
        for (int l = 0; l < net.num_layers(); ++l) {
            mw.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
            vw.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
            mb.push_back(Vector::Zero(net.biases[l].size()));
            vb.push_back(Vector::Zero(net.biases[l].size()));
        }
    }

    void update(Network& net, const Gradients& g, double lr) {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (int l = 0; l < net.num_layers(); ++l) {
            mw[l] = beta1 * mw[l] + (1.0 - beta1) * g.weights[l];
            vw[l] = beta2 * vw[l] + (1.0 - beta2) * g.weights[l].cwiseProduct(g.weights[l]);
            net.weights[l] -= lr * (mw[l] / c1).cwiseQuotient(((vw[l] / c2).cwiseSqrt().array() + eps).matrix());
            mb[l] = beta1 * mb[l] + (1.0 - beta1) * g.biases[l];
            vb[l] = beta2 * vb[l] + (1.0 - beta2) * g.biases[l].cwiseProduct(g.biases[l]);
            net.biases[l] -= lr * (mb[l] / c1).cwiseQuotient(((vb[l] / c2).cwiseSqrt().array() + eps).matrix());
        }
    }
};

inline void check_train_inputs(const Network& net, const Matrix& features, const Matrix& targets) {
    net.validate();
    net.check_input(features);
    if (features.rows() != targets.rows()) {
        throw ShapeError("feature rows " + std::to_string(features.rows()) +
                         " vs target rows " + std::to_string(targets.rows()));
    }
    if (targets.cols() != net.output_dim()) {
        throw ShapeError("target dim " + std::to_string(targets.cols()) +
                         " does not match network output dim " + std::to_string(net.output_dim()));
    }
    require_prob_rows(targets, "target");
}

}  // namespace detail

/// Mini-batch training against soft targets. Deterministic given the seed:
/// the per-epoch shuffle order is drawn from one seeded generator.
inline TrainResult train(const Network& net0, const Matrix& features, const Matrix& targets,
                         const TrainConfig& cfg) {
    cfg.validate();
    detail::check_train_inputs(net0, features, targets);

    TrainResult result;
    result.net = net0;
    result.loss_curve.push_back(soft_cross_entropy(result.net.forward(features), targets));

    const Eigen::Index n_rows = features.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_rows));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(sub_seed(cfg.seed, "shuffle"));
    detail::AdamState adam(result.net);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n_rows; start += cfg.batch_size) {
            const Eigen::Index size = std::min<Eigen::Index>(cfg.batch_size, n_rows - start);
            Matrix xb(size, features.cols());
            Matrix tb(size, targets.cols());
            for (Eigen::Index r = 0; r < size; ++r) {
                xb.row(r) = features.row(order[static_cast<std::size_t>(start + r)]);
                tb.row(r) = targets.row(order[static_cast<std::size_t>(start + r)]);
            }
            auto cache = detail::forward_cache(result.net, xb);
            auto grads = detail::backward(result.net, cache, tb);
            if (cfg.optimizer == Optimizer::sgd) {
                for (int l = 0; l < result.net.num_layers(); ++l) {
                    result.net.weights[l] -= cfg.learning_rate * grads.weights[l];
                    result.net.biases[l] -= cfg.learning_rate * grads.biases[l];
                }
            } else {
                adam.update(result.net, grads, cfg.learning_rate);
            }
        }
        const double loss = soft_cross_entropy(result.net.forward(features), targets);
        if (!std::isfinite(loss)) {
            throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch));
        }
        const double prev = result.loss_curve.back();
        result.loss_curve.push_back(loss);
        result.epochs = epoch;
        if (std::abs(loss - prev) / std::max(std::abs(prev), 1e-12) < cfg.convergence_tol) break;
    }
    return result;
}

/// Max over all parameters of |analytic - central difference| /
/// max(|analytic|, |numeric|, 1e-12) for the soft cross-entropy loss.
inline double gradient_check(const Network& net, const Matrix& features, const Matrix& targets,
                             double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    detail::check_train_inputs(net, features, targets);
    if (net.num_parameters() > 10000) {
        throw ShapeError("gradient_check expects a small net (<= 1e4 parameters)");
    }

    auto cache = detail::forward_cache(net, features);
    auto grads = detail::backward(net, cache, targets);

    Network probe = net;
    auto loss_at = [&]() { return soft_cross_entropy(probe.forward(features), targets); };
    double worst = 0.0;
    auto check_one = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + epsilon;
        const double up = loss_at();
        param = saved - epsilon;
        const double down = loss_at();
        param = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-12});
        worst = std::max(worst, rel);
    };
    for (int l = 0; l < net.num_layers(); ++l) {
        for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c) {
                check_one(probe.weights[l](r, c), grads.weights[l](r, c));
            }
        }
        for (Eigen::Index i = 0; i < probe.biases[l].size(); ++i) {
            check_one(probe.biases[l][i], grads.biases[l][i]);
        }
    }
    return worst;
}

}  // namespace nle
