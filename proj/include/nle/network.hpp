#pragma once

#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "nle/common.hpp"
#include "nle/prob.hpp"

namespace nle {

enum class Activation { relu, tanh };

inline std::string activation_name(Activation a) {
    return a == Activation::relu ? "relu" : "tanh";
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw ConfigError("unknown activation '" + name + "' (expected relu or tanh)");
}

/// Dense feedforward classifier with a softmax output layer.
///
/// weights[l] has shape dims[l+1] x dims[l]; biases[l] has length dims[l+1].
/// The last layer produces pre-softmax logits; forward() turns them into
/// posterior rows.
struct Network {
    std::vector<int> layer_dims;
    Activation hidden_activation = Activation::relu;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }

    std::size_t num_parameters() const {
        std::size_t n = 0;
        for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
        for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
        return n;
    }

    /// Glorot-uniform init in +-sqrt(6 / (fan_in + fan_out)), seeded.
    static Network create(std::vector<int> dims, Activation act, std::uint64_t seed) {
        if (dims.size() < 2) {
            throw ShapeError("network needs at least an input and an output layer");
        }
        for (int d : dims) {
            if (d <= 0) throw ShapeError("layer dimensions must be positive");
        }
        Network net;
        net.layer_dims = std::move(dims);
        net.hidden_activation = act;
        std::mt19937_64 rng(seed);
        for (std::size_t l = 0; l + 1 < net.layer_dims.size(); ++l) {
            const int fan_in = net.layer_dims[l];
            const int fan_out = net.layer_dims[l + 1];
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            std::uniform_real_distribution<double> uni(-bound, bound);
            Matrix w(fan_out, fan_in);
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = uni(rng);
            }
            net.weights.push_back(std::move(w));
            net.biases.push_back(Vector::Zero(fan_out));
        }
        return net;
    }

    void validate() const {
        if (layer_dims.size() < 2 || weights.size() != layer_dims.size() - 1 ||
            biases.size() != weights.size()) {
            throw ShapeError("network layer bookkeeping is inconsistent");
        }
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
                biases[l].size() != layer_dims[l + 1]) {
                throw ShapeError("layer " + std::to_string(l) + " parameter shapes do not match layer_dims");
            }
        }
    }

    void check_input(const Matrix& features) const {
        if (features.cols() != input_dim()) {
            throw ShapeError("feature dim " + std::to_string(features.cols()) +
                             " does not match network input dim " + std::to_string(input_dim()));
        }
    }

    double apply_hidden(double z) const {
        return hidden_activation == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
    }

    /// Pre-softmax logits for a batch, one row per input row. Rows are
    /// computed independently so the result for a given input row does not
    /// depend on its position in the batch.
    Matrix forward_logits(const Matrix& features) const {
        check_input(features);
        const Eigen::Index n_rows = features.rows();
        Matrix logits(n_rows, output_dim());
        Vector a, z;
        for (Eigen::Index n = 0; n < n_rows; ++n) {
            a = features.row(n).transpose();
            for (int l = 0; l < num_layers(); ++l) {
                z.noalias() = weights[l] * a;
                z += biases[l];
                if (l + 1 < num_layers()) {
                    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = apply_hidden(z[i]);
                }
                a = z;
            }
            logits.row(n) = a.transpose();
        }
        return logits;
    }

    /// Posterior rows (softmax over logits).
    Matrix forward(const Matrix& features) const { return softmax_rows(forward_logits(features)); }
};

// ---------------------------------------------------------------------------
// Serialization: one JSON document with layer_dims, activation name, and
// row-major weight/bias arrays. Doubles are written in shortest round-trip
// decimal form, so load(save(net)) is value-exact.
// ---------------------------------------------------------------------------

inline nlohmann::json network_to_json(const Network& net) {
    net.validate();
    nlohmann::json j;
    j["layer_dims"] = net.layer_dims;
    j["hidden_activation"] = activation_name(net.hidden_activation);
    nlohmann::json layers = nlohmann::json::array();
    for (int l = 0; l < net.num_layers(); ++l) {
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(net.weights[l].size()));
        for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c) w.push_back(net.weights[l](r, c));
        }
        std::vector<double> b(net.biases[l].data(), net.biases[l].data() + net.biases[l].size());
        layers.push_back({{"weights", w}, {"bias", b}});
    }
    j["layers"] = layers;
    return j;
}

inline Network network_from_json(const nlohmann::json& j) {
    Network net;
    try {
        net.layer_dims = j.at("layer_dims").get<std::vector<int>>();
        net.hidden_activation = activation_from_name(j.at("hidden_activation").get<std::string>());
        const auto& layers = j.at("layers");
        if (net.layer_dims.size() < 2 || layers.size() != net.layer_dims.size() - 1) {
            throw ShapeError("layer count does not match layer_dims");
        }
        for (std::size_t l = 0; l + 1 < net.layer_dims.size(); ++l) {
            const int rows = net.layer_dims[l + 1];
            const int cols = net.layer_dims[l];
            auto w = layers.at(l).at("weights").get<std::vector<double>>();
            auto b = layers.at(l).at("bias").get<std::vector<double>>();
            if (w.size() != static_cast<std::size_t>(rows) * cols ||
                b.size() != static_cast<std::size_t>(rows)) {
                throw ShapeError("layer " + std::to_string(l) + " array sizes do not match layer_dims");
            }
            Matrix wm(rows, cols);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) wm(r, c) = w[static_cast<std::size_t>(r) * cols + c];
            }
            net.weights.push_back(std::move(wm));
            net.biases.push_back(Eigen::Map<const Vector>(b.data(), rows));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed network document: ") + e.what());
    }
    net.validate();
    return net;
}

inline void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << network_to_json(net).dump(2) << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("cannot parse '" + path + "': " + e.what());
    }
    return network_from_json(j);
}

}  // namespace nle
