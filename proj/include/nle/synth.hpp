#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "nle/common.hpp"
#include "nle/dataset.hpp"

namespace nle {

/// Affine covariate shift: x -> scale * R(angle) x + translation, with the
/// rotation confined to the first two feature dimensions.
struct ShiftSpec {
    Vector translation;          // length D; empty means zero
    double rotation_angle = 0.0; // radians, dims 0 and 1
    double scale = 1.0;

    Vector apply(const Vector& x) const {
        Vector y = x;
        if (rotation_angle != 0.0 && x.size() >= 2) {
            const double c = std::cos(rotation_angle);
            const double s = std::sin(rotation_angle);
            const double x0 = x[0], x1 = x[1];
            y[0] = c * x0 - s * x1;
            y[1] = s * x0 + c * x1;
        }
        y *= scale;
        if (translation.size() > 0) y += translation;
        return y;
    }

    Vector invert(const Vector& y) const {
        Vector x = y;
        if (translation.size() > 0) x -= translation;
        x /= scale;
        if (rotation_angle != 0.0 && x.size() >= 2) {
            const double c = std::cos(rotation_angle);
            const double s = std::sin(rotation_angle);
            const double x0 = x[0], x1 = x[1];
            x[0] = c * x0 + s * x1;
            x[1] = -s * x0 + c * x1;
        }
        return x;
    }
};

/// Class-conditional isotropic Gaussians for the source domain; the target
/// domain draws from the same Gaussians and pushes every frame through the
/// shift transform. Target adaptation data is deliberately much smaller than
/// the source training data.
struct DomainShiftSpec {
    int num_classes = 10;
    int feature_dim = 8;
    int source_frames_per_class = 2000;
    int target_adapt_frames_per_class = 200;
    int target_test_frames_per_class = 500;
    Matrix class_means;            // C x D; empty -> deterministic default means
    double covariance_scale = 1.0; // isotropic sigma
    ShiftSpec shift;
    std::uint64_t seed = 1;

    void validate() const {
        if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
        if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
        if (source_frames_per_class < 1 || target_adapt_frames_per_class < 1 ||
            target_test_frames_per_class < 1) {
            throw ConfigError("frames_per_class values must be >= 1");
        }
        if (!(covariance_scale > 0.0)) throw ConfigError("covariance_scale must be > 0");
        if (!(shift.scale > 0.0)) throw ConfigError("shift scale must be > 0");
        if (class_means.size() > 0 &&
            (class_means.rows() != num_classes || class_means.cols() != feature_dim)) {
            throw ConfigError("class_means must be num_classes x feature_dim");
        }
        if (shift.translation.size() > 0 && shift.translation.size() != feature_dim) {
            throw ConfigError("shift translation length must equal feature_dim");
        }
    }

    /// Means used for sampling: the explicit matrix if given, otherwise a
    /// fixed seeded draw scaled to give a well-separated but genuinely
    /// overlapping class layout (the task geometry is the same for every
    /// dataset seed).
    Matrix resolved_means() const {
        if (class_means.size() > 0) return class_means;
        std::mt19937_64 rng(0x6c76656374ull);  // fixed: means are part of the task, not the draw
        std::normal_distribution<double> normal(0.0, 1.0);
        Matrix means(num_classes, feature_dim);
        for (int c = 0; c < num_classes; ++c) {
            for (int d = 0; d < feature_dim; ++d) means(c, d) = normal(rng);
        }
        // 1.7-sigma spread puts the Monte Carlo Bayes error of the default
        // 10-class layout near 0.029: separable enough to train a strong
        // source model, overlapping enough that l-vectors carry real
        // inter-class structure.
        return means * (1.7 * covariance_scale);
    }
};

/// The desk-scale default: 10 classes in 8 dims, a large source set, a small
/// adaptation set, and a 1.5-sigma translation plus 20-degree rotation shift.
inline DomainShiftSpec default_task(std::uint64_t seed = 1) {
    DomainShiftSpec spec;
    spec.seed = seed;
    spec.shift.translation = Vector::Constant(spec.feature_dim, 1.5 / std::sqrt(8.0));
    spec.shift.rotation_angle = 20.0 * M_PI / 180.0;
    spec.shift.scale = 1.0;
    return spec;
}

struct GeneratedData {
    Dataset source;
    Dataset source_test;   // held-out source-domain draw
    Dataset target_adapt;
    Dataset target_test;
    /// Source-domain pre-shift draws aligned row-by-row with target_adapt;
    /// only the paired teacher-student comparator consumes these.
    Matrix paired_source_features;
};

namespace detail {

inline Dataset draw_class_gaussians(std::mt19937_64& rng, const Matrix& means, double sigma,
                                    int frames_per_class, const std::string& tag) {
    const int num_classes = static_cast<int>(means.rows());
    const int dim = static_cast<int>(means.cols());
    Dataset ds;
    ds.domain_tag = tag;
    ds.features = Matrix(static_cast<Eigen::Index>(num_classes) * frames_per_class, dim);
    ds.labels.reserve(static_cast<std::size_t>(num_classes) * frames_per_class);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Index row = 0;
    for (int c = 0; c < num_classes; ++c) {
        for (int k = 0; k < frames_per_class; ++k, ++row) {
            for (int d = 0; d < dim; ++d) {
                ds.features(row, d) = means(c, d) + sigma * normal(rng);
            }
            ds.labels.push_back(c);
        }
    }
    return ds;
}

inline void apply_shift_in_place(Dataset& ds, const ShiftSpec& shift) {
    for (Eigen::Index n = 0; n < ds.size(); ++n) {
        ds.features.row(n) = shift.apply(ds.features.row(n).transpose()).transpose();
    }
}

}  // namespace detail

/// Seeded draw of all four datasets. The adapt and test splits are disjoint
/// draws, and no row of any target set corresponds to a row of the source
/// set. Draw order is fixed (source, source_test, adapt, test), so a given
/// seed always produces bit-identical datasets.
inline GeneratedData generate(const DomainShiftSpec& spec) {
    spec.validate();
    const Matrix means = spec.resolved_means();
    std::mt19937_64 rng(splitmix64(spec.seed));

    GeneratedData data;
    data.source = detail::draw_class_gaussians(rng, means, spec.covariance_scale,
                                               spec.source_frames_per_class, "source");
    data.source_test = detail::draw_class_gaussians(rng, means, spec.covariance_scale,
                                                    spec.target_test_frames_per_class, "source_test");
    data.target_adapt = detail::draw_class_gaussians(rng, means, spec.covariance_scale,
                                                     spec.target_adapt_frames_per_class,
                                                     "target_adapt");
    data.target_test = detail::draw_class_gaussians(rng, means, spec.covariance_scale,
                                                    spec.target_test_frames_per_class,
                                                    "target_test");
    data.paired_source_features = data.target_adapt.features;
    detail::apply_shift_in_place(data.target_adapt, spec.shift);
    detail::apply_shift_in_place(data.target_test, spec.shift);
    return data;
}

struct BayesEstimate {
    double error = 0.0;
    double std_error = 0.0;
    long long n_samples = 0;
};

/// Monte Carlo estimate of the Bayes error of the class layout, using the
/// true class-conditional densities (equal priors, shared isotropic
/// covariance, so the Bayes rule is nearest class mean). The shift transform
/// is invertible, so the target task has the same Bayes error.
inline BayesEstimate estimate_bayes_error(const DomainShiftSpec& spec, long long n_samples) {
    spec.validate();
    if (n_samples < 10000) throw ConfigError("estimate_bayes_error needs n_samples >= 1e4");
    const Matrix means = spec.resolved_means();
    std::mt19937_64 rng(sub_seed(spec.seed, "bayes-mc"));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> pick_class(0, spec.num_classes - 1);

    long long wrong = 0;
    Vector x(spec.feature_dim);
    for (long long s = 0; s < n_samples; ++s) {
        const int c = pick_class(rng);
        for (int d = 0; d < spec.feature_dim; ++d) {
            x[d] = means(c, d) + spec.covariance_scale * normal(rng);
        }
        int best = 0;
        double best_dist = (x - means.row(0).transpose()).squaredNorm();
        for (int k = 1; k < spec.num_classes; ++k) {
            const double dist = (x - means.row(k).transpose()).squaredNorm();
            if (dist < best_dist) {
                best_dist = dist;
                best = k;
            }
        }
        if (best != c) ++wrong;
    }
    BayesEstimate est;
    est.n_samples = n_samples;
    est.error = static_cast<double>(wrong) / static_cast<double>(n_samples);
    est.std_error = std::sqrt(est.error * (1.0 - est.error) / static_cast<double>(n_samples));
    return est;
}

// ---------------------------------------------------------------------------
// Spec <-> JSON for sidecars and config files.
// ---------------------------------------------------------------------------

inline nlohmann::json shift_spec_to_json(const ShiftSpec& s) {
    nlohmann::json j;
    j["translation"] = std::vector<double>(s.translation.data(),
                                           s.translation.data() + s.translation.size());
    j["rotation_angle_rad"] = s.rotation_angle;
    j["scale"] = s.scale;
    return j;
}

inline ShiftSpec shift_spec_from_json(const nlohmann::json& j) {
    ShiftSpec s;
    if (j.contains("translation")) {
        auto t = j.at("translation").get<std::vector<double>>();
        s.translation = Eigen::Map<const Vector>(t.data(), static_cast<Eigen::Index>(t.size()));
    }
    s.rotation_angle = j.value("rotation_angle_rad", 0.0);
    s.scale = j.value("scale", 1.0);
    return s;
}

inline nlohmann::json domain_shift_spec_to_json(const DomainShiftSpec& spec) {
    nlohmann::json j;
    j["num_classes"] = spec.num_classes;
    j["feature_dim"] = spec.feature_dim;
    j["source_frames_per_class"] = spec.source_frames_per_class;
    j["target_adapt_frames_per_class"] = spec.target_adapt_frames_per_class;
    j["target_test_frames_per_class"] = spec.target_test_frames_per_class;
    j["covariance_scale"] = spec.covariance_scale;
    j["shift"] = shift_spec_to_json(spec.shift);
    j["seed"] = spec.seed;
    if (spec.class_means.size() > 0) {
        nlohmann::json means = nlohmann::json::array();
        for (Eigen::Index c = 0; c < spec.class_means.rows(); ++c) {
            std::vector<double> row(static_cast<std::size_t>(spec.class_means.cols()));
            for (Eigen::Index d = 0; d < spec.class_means.cols(); ++d) {
                row[static_cast<std::size_t>(d)] = spec.class_means(c, d);
            }
            means.push_back(row);
        }
        j["class_means"] = means;
    }
    return j;
}

inline DomainShiftSpec domain_shift_spec_from_json(const nlohmann::json& j) {
    DomainShiftSpec spec;
    try {
        spec.num_classes = j.value("num_classes", spec.num_classes);
        spec.feature_dim = j.value("feature_dim", spec.feature_dim);
        spec.source_frames_per_class = j.value("source_frames_per_class", spec.source_frames_per_class);
        spec.target_adapt_frames_per_class =
            j.value("target_adapt_frames_per_class", spec.target_adapt_frames_per_class);
        spec.target_test_frames_per_class =
            j.value("target_test_frames_per_class", spec.target_test_frames_per_class);
        spec.covariance_scale = j.value("covariance_scale", spec.covariance_scale);
        if (j.contains("shift")) spec.shift = shift_spec_from_json(j.at("shift"));
        spec.seed = j.value("seed", spec.seed);
        if (j.contains("class_means")) {
            const auto& means = j.at("class_means");
            spec.class_means = Matrix(static_cast<Eigen::Index>(means.size()), spec.feature_dim);
            for (std::size_t c = 0; c < means.size(); ++c) {
                auto row = means.at(c).get<std::vector<double>>();
                if (row.size() != static_cast<std::size_t>(spec.feature_dim)) {
                    throw ConfigError("class_means row has wrong length");
                }
                for (int d = 0; d < spec.feature_dim; ++d) {
                    spec.class_means(static_cast<Eigen::Index>(c), d) = row[static_cast<std::size_t>(d)];
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed task spec: ") + e.what());
    }
    return spec;
}

}  // namespace nle
