#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "nle/codebook.hpp"
#include "nle/common.hpp"
#include "nle/dataset.hpp"
#include "nle/network.hpp"
#include "nle/synth.hpp"
#include "nle/train.hpp"

namespace nle {

enum class Method { unadapted, one_hot, nle_l2, nle_kl, nle_skl, ts };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::unadapted: return "unadapted";
        case Method::one_hot: return "one_hot";
        case Method::nle_l2: return "nle_l2";
        case Method::nle_kl: return "nle_kl";
        case Method::nle_skl: return "nle_skl";
        default: return "ts";
    }
}

inline Method method_from_name(const std::string& name) {
    for (Method m : {Method::unadapted, Method::one_hot, Method::nle_l2, Method::nle_kl,
                     Method::nle_skl, Method::ts}) {
        if (method_name(m) == name) return m;
    }
    throw ConfigError("unknown method '" + name + "'");
}

enum class UncoveredPolicy { error, one_hot_fallback };

/// Architecture of the classifiers; both domains share it, the target model
/// starts from a deep copy of the source parameters.
struct NetworkSpec {
    std::vector<int> hidden_dims{64, 32};
    Activation activation = Activation::relu;

    std::vector<int> layer_dims(int input_dim, int num_classes) const {
        std::vector<int> dims{input_dim};
        dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
        dims.push_back(num_classes);
        return dims;
    }
};

struct RunReport {
    std::string method;
    std::uint64_t seed = 0;
    double error_rate = 0.0;
    int epochs = 0;
    double wall_time_s = 0.0;
    std::vector<double> loss_curve;
    // Phase timings behind the lookup-vs-forward cost comparison.
    double soft_target_build_s = 0.0;
    double teacher_forward_s = 0.0;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Best-of-3 timing of a phase, shielding the tiny lookup phase from
/// scheduler noise.
template <typename Fn>
double time_phase(Fn&& fn) {
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

}  // namespace detail

/// Train the source model from scratch on one-hot targets.
inline TrainResult train_source(const Dataset& train_data, int num_classes, const NetworkSpec& arch,
                                const TrainConfig& cfg, std::uint64_t init_seed) {
    train_data.validate(num_classes);
    std::set<int> distinct(train_data.labels.begin(), train_data.labels.end());
    if (distinct.size() < 2) {
        throw ConfigError("source training data covers " + std::to_string(distinct.size()) +
                          " class(es); need at least 2");
    }
    Network net = Network::create(arch.layer_dims(static_cast<int>(train_data.dim()), num_classes),
                                  arch.activation, init_seed);
    return train(net, train_data.features, one_hot_rows(train_data.labels, num_classes), cfg);
}

/// One forward pass over the source data (capturing posteriors and the
/// pre-softmax logits), then the requested centroid learner.
inline Codebook distill(const Network& source, const Dataset& src, CodebookMethod method,
                        const CentroidTrainConfig& cfg) {
    src.validate(source.output_dim());
    const Matrix logits = source.forward_logits(src.features);
    const Matrix outputs = softmax_rows(logits);
    const int num_classes = source.output_dim();
    switch (method) {
        case CodebookMethod::l2:
            return learn_l2(outputs, src.labels, num_classes);
        case CodebookMethod::kl:
            return learn_kl(outputs, src.labels, init_logits(logits, src.labels, num_classes), cfg);
        default:
            return learn_skl(outputs, src.labels, init_logits(logits, src.labels, num_classes), cfg);
    }
}

struct AdaptResult {
    TrainResult train;
    double soft_target_build_s = 0.0;
};

/// Adapt the target model: look up each target label's l-vector, then train
/// a copy of the source model against those soft targets. Coverage is
/// checked up front; no training happens if any label lacks an embedding.
inline AdaptResult adapt_nle(const Network& init, const Dataset& tgt, const Codebook& cb,
                             const TrainConfig& cfg,
                             UncoveredPolicy policy = UncoveredPolicy::error) {
    tgt.validate(cb.num_classes);
    if (init.output_dim() != cb.num_classes) {
        throw ShapeError("network output dim " + std::to_string(init.output_dim()) +
                         " vs codebook classes " + std::to_string(cb.num_classes));
    }
    if (policy == UncoveredPolicy::error) {
        std::set<int> uncovered;
        for (int y : tgt.labels) {
            if (!cb.covered(y)) uncovered.insert(y);
        }
        if (!uncovered.empty()) {
            std::string list;
            for (int y : uncovered) list += (list.empty() ? "" : ", ") + std::to_string(y);
            throw MissingEmbeddingError("target labels without embeddings: " + list);
        }
    }

    AdaptResult result;
    Matrix soft_targets(tgt.size(), cb.num_classes);
    result.soft_target_build_s = detail::time_phase([&] {
        for (Eigen::Index n = 0; n < tgt.size(); ++n) {
            const int y = tgt.labels[static_cast<std::size_t>(n)];
            soft_targets.row(n) = cb.covered(y) ? cb.lookup(y).transpose()
                                                : one_hot_row(y, cb.num_classes).transpose();
        }
    });
    result.train = train(init, tgt.features, soft_targets, cfg);
    return result;
}

/// Plain re-training of the source model on the target data with (floored)
/// one-hot targets.
inline TrainResult retrain_one_hot(const Network& init, const Dataset& tgt, int num_classes,
                                   const TrainConfig& cfg) {
    tgt.validate(num_classes);
    if (init.output_dim() != num_classes) {
        throw ShapeError("network output dim does not match num_classes");
    }
    return train(init, tgt.features, one_hot_rows(tgt.labels, num_classes), cfg);
}

struct TsResult {
    TrainResult train;
    double teacher_forward_s = 0.0;
};

/// Teacher-student comparator: needs frame-by-frame paired features. The
/// teacher's posterior for each source-side frame is the training target for
/// the student on the matching target-side frame; minimizing that cross
/// entropy matches minimizing the teacher-student KL up to a constant.
inline TsResult ts_learn(const Network& teacher, const Network& student_init,
                         const Matrix& paired_source_features,
                         const Matrix& paired_target_features, const TrainConfig& cfg) {
    if (paired_source_features.rows() != paired_target_features.rows()) {
        throw PairingError("paired feature row counts differ: " +
                           std::to_string(paired_source_features.rows()) + " vs " +
                           std::to_string(paired_target_features.rows()));
    }
    TsResult result;
    Matrix teacher_targets;
    result.teacher_forward_s =
        detail::time_phase([&] { teacher_targets = teacher.forward(paired_source_features); });
    result.train = train(student_init, paired_target_features, teacher_targets, cfg);
    return result;
}

/// Error rate by argmax, ties broken toward the lowest class index.
inline double error_rate(const Network& net, const Dataset& eval) {
    eval.validate(net.output_dim());
    const Matrix outputs = net.forward(eval.features);
    long long wrong = 0;
    for (Eigen::Index n = 0; n < eval.size(); ++n) {
        if (argmax_lowest(outputs.row(n).transpose()) != eval.labels[static_cast<std::size_t>(n)]) {
            ++wrong;
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(eval.size());
}

inline RunReport evaluate(const Network& net, const Dataset& eval, const std::string& method = "",
                          std::uint64_t seed = 0) {
    RunReport report;
    report.method = method;
    report.seed = seed;
    report.error_rate = error_rate(net, eval);
    return report;
}

// ---------------------------------------------------------------------------
// The comparison harness.
// ---------------------------------------------------------------------------

struct ExperimentSpec {
    DomainShiftSpec task = default_task();
    NetworkSpec arch;
    TrainConfig source_cfg;
    TrainConfig adapt_cfg;
    CentroidTrainConfig centroid_cfg;
    std::vector<Method> methods{Method::unadapted, Method::one_hot, Method::nle_l2,
                                Method::nle_kl, Method::nle_skl};
    int num_seeds = 10;
    std::uint64_t master_seed = 1;
    UncoveredPolicy policy = UncoveredPolicy::error;
    /// Measured wall times make reports non-reproducible byte-for-byte, so
    /// they are off by default and live in the JSON report when enabled.
    bool record_wall_time = false;

    void validate() const {
        task.validate();
        source_cfg.validate();
        adapt_cfg.validate();
        centroid_cfg.validate();
        if (num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
        if (methods.empty()) return;
        std::set<std::string> seen;
        for (Method m : methods) {
            if (!seen.insert(method_name(m)).second) {
                throw ConfigError("method '" + method_name(m) + "' listed twice");
            }
        }
    }
};

struct CompareResult {
    std::vector<RunReport> runs;   // grouped by method in request order, seeds ascending
    std::vector<RunReport> means;  // one per method, request order
};

namespace detail {

struct SeedContext {
    std::uint64_t run_seed = 0;
    GeneratedData data;
    TrainResult source;
};

inline SeedContext make_seed_context(const ExperimentSpec& spec, int seed_index) {
    SeedContext ctx;
    ctx.run_seed = sub_seed(spec.master_seed, "run/" + std::to_string(seed_index));
    DomainShiftSpec task = spec.task;
    task.seed = sub_seed(ctx.run_seed, "data");
    ctx.data = generate(task);
    TrainConfig source_cfg = spec.source_cfg;
    source_cfg.seed = sub_seed(ctx.run_seed, "source-train");
    ctx.source = train_source(ctx.data.source, spec.task.num_classes, spec.arch, source_cfg,
                              sub_seed(ctx.run_seed, "source-init"));
    return ctx;
}

inline RunReport run_method(const ExperimentSpec& spec, const SeedContext& ctx, Method method) {
    const auto t0 = std::chrono::steady_clock::now();
    TrainConfig adapt_cfg = spec.adapt_cfg;
    adapt_cfg.seed = sub_seed(ctx.run_seed, "adapt");

    RunReport report;
    report.method = method_name(method);
    report.seed = ctx.run_seed;
    switch (method) {
        case Method::unadapted: {
            report.error_rate = error_rate(ctx.source.net, ctx.data.target_test);
            break;
        }
        case Method::one_hot: {
            auto fit = retrain_one_hot(ctx.source.net, ctx.data.target_adapt,
                                       spec.task.num_classes, adapt_cfg);
            report.error_rate = error_rate(fit.net, ctx.data.target_test);
            report.epochs = fit.epochs;
            report.loss_curve = std::move(fit.loss_curve);
            break;
        }
        case Method::nle_l2:
        case Method::nle_kl:
        case Method::nle_skl: {
            const CodebookMethod cm = method == Method::nle_l2   ? CodebookMethod::l2
                                      : method == Method::nle_kl ? CodebookMethod::kl
                                                                 : CodebookMethod::skl;
            const Codebook cb = distill(ctx.source.net, ctx.data.source, cm, spec.centroid_cfg);
            auto fit = adapt_nle(ctx.source.net, ctx.data.target_adapt, cb, adapt_cfg, spec.policy);
            report.error_rate = error_rate(fit.train.net, ctx.data.target_test);
            report.epochs = fit.train.epochs;
            report.loss_curve = std::move(fit.train.loss_curve);
            report.soft_target_build_s = fit.soft_target_build_s;
            break;
        }
        case Method::ts: {
            auto fit = ts_learn(ctx.source.net, ctx.source.net, ctx.data.paired_source_features,
                                ctx.data.target_adapt.features, adapt_cfg);
            report.error_rate = error_rate(fit.train.net, ctx.data.target_test);
            report.epochs = fit.train.epochs;
            report.loss_curve = std::move(fit.train.loss_curve);
            report.teacher_forward_s = fit.teacher_forward_s;
            break;
        }
    }
    report.wall_time_s = seconds_since(t0);
    if (!spec.record_wall_time) {
        report.wall_time_s = 0.0;
        report.soft_target_build_s = 0.0;
        report.teacher_forward_s = 0.0;
    }
    return report;
}

}  // namespace detail

/// Run every requested method over num_seeds shared seeds. Each seed shares
/// its datasets and source model across methods; reports come back grouped
/// by method in request order with a mean row per method.
inline CompareResult compare(const ExperimentSpec& spec) {
    spec.validate();
    CompareResult result;
    if (spec.methods.empty()) return result;

    std::vector<detail::SeedContext> contexts;
    contexts.reserve(static_cast<std::size_t>(spec.num_seeds));
    for (int k = 0; k < spec.num_seeds; ++k) {
        contexts.push_back(detail::make_seed_context(spec, k));
    }
    for (Method m : spec.methods) {
        RunReport mean;
        mean.method = method_name(m);
        double error_sum = 0.0;
        double epoch_sum = 0.0;
        double wall_sum = 0.0;
        for (const auto& ctx : contexts) {
            result.runs.push_back(detail::run_method(spec, ctx, m));
            const auto& r = result.runs.back();
            error_sum += r.error_rate;
            epoch_sum += r.epochs;
            wall_sum += r.wall_time_s;
        }
        mean.error_rate = error_sum / spec.num_seeds;
        mean.epochs = static_cast<int>(epoch_sum / spec.num_seeds + 0.5);
        mean.wall_time_s = wall_sum / spec.num_seeds;
        result.means.push_back(std::move(mean));
    }
    return result;
}

}  // namespace nle
