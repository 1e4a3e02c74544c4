#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nle/common.hpp"
#include "nle/pipeline.hpp"
#include "nle/synth.hpp"
#include "nle/train.hpp"

namespace nle {

/// One JSON document drives every stage. Precedence: command-line flags
/// override config fields, which override these defaults.
struct ExperimentConfig {
    std::string data_dir = "data";
    std::string model_dir = "models";
    std::string report_dir = "reports";
    DomainShiftSpec task = default_task();
    NetworkSpec arch;
    TrainConfig source_train;
    TrainConfig adapt_train;
    CentroidTrainConfig centroid;
    std::vector<Method> methods{Method::unadapted, Method::one_hot, Method::nle_l2,
                                Method::nle_kl, Method::nle_skl};
    int num_seeds = 10;
    std::uint64_t seed = 1;
    UncoveredPolicy policy = UncoveredPolicy::error;
    bool record_wall_time = false;

    ExperimentConfig() {
        source_train.learning_rate = 0.05;
        source_train.batch_size = 128;
        source_train.max_epochs = 60;
        source_train.convergence_tol = 1e-5;
        adapt_train.learning_rate = 0.02;
        adapt_train.batch_size = 32;
        adapt_train.max_epochs = 150;
        adapt_train.convergence_tol = 1e-6;
    }

    ExperimentSpec experiment_spec() const {
        ExperimentSpec spec;
        spec.task = task;
        spec.arch = arch;
        spec.source_cfg = source_train;
        spec.adapt_cfg = adapt_train;
        spec.centroid_cfg = centroid;
        spec.methods = methods;
        spec.num_seeds = num_seeds;
        spec.master_seed = seed;
        spec.policy = policy;
        spec.record_wall_time = record_wall_time;
        return spec;
    }

    /// Validation failures throw ConfigError; soft concerns land in
    /// warnings (e.g. a full-scale senone inventory on a desk-scale setup).
    std::vector<std::string> validate() const {
        experiment_spec().validate();
        if (data_dir.empty() || model_dir.empty() || report_dir.empty()) {
            throw ConfigError("data_dir, model_dir and report_dir must be non-empty");
        }
        std::error_code ec;
        for (const auto& dir : {data_dir, model_dir, report_dir}) {
            const auto resolved = std::filesystem::weakly_canonical(dir, ec);
            if (ec || resolved.empty()) {
                throw ConfigError("path '" + dir + "' is not resolvable: " + ec.message());
            }
        }
        std::vector<std::string> warnings;
        if (task.num_classes == 9404) {
            warnings.push_back(
                "num_classes=9404 matches a full-scale ASR senone inventory; the desk-scale "
                "default is 10 and runtimes will be very long");
        } else if (task.num_classes > 100) {
            warnings.push_back("num_classes=" + std::to_string(task.num_classes) +
                               " exceeds desk-scale defaults; expect long runtimes");
        }
        return warnings;
    }
};

inline nlohmann::json train_config_to_json(const TrainConfig& cfg) {
    return {{"optimizer", optimizer_name(cfg.optimizer)},
            {"learning_rate", cfg.learning_rate},
            {"batch_size", cfg.batch_size},
            {"max_epochs", cfg.max_epochs},
            {"convergence_tol", cfg.convergence_tol}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base) {
    if (j.contains("optimizer")) base.optimizer = optimizer_from_name(j.at("optimizer").get<std::string>());
    base.learning_rate = j.value("learning_rate", base.learning_rate);
    base.batch_size = j.value("batch_size", base.batch_size);
    base.max_epochs = j.value("max_epochs", base.max_epochs);
    base.convergence_tol = j.value("convergence_tol", base.convergence_tol);
    return base;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["paths"] = {{"data_dir", cfg.data_dir}, {"model_dir", cfg.model_dir},
                  {"report_dir", cfg.report_dir}};
    j["task"] = domain_shift_spec_to_json(cfg.task);
    j["network"] = {{"hidden_dims", cfg.arch.hidden_dims},
                    {"activation", activation_name(cfg.arch.activation)}};
    j["source_train"] = train_config_to_json(cfg.source_train);
    j["adapt_train"] = train_config_to_json(cfg.adapt_train);
    j["centroid"] = {{"learning_rate", cfg.centroid.learning_rate},
                     {"max_epochs", cfg.centroid.max_epochs},
                     {"convergence_tol", cfg.centroid.convergence_tol}};
    std::vector<std::string> method_names;
    for (Method m : cfg.methods) method_names.push_back(method_name(m));
    j["methods"] = method_names;
    j["num_seeds"] = cfg.num_seeds;
    j["seed"] = cfg.seed;
    j["uncovered_label_policy"] =
        cfg.policy == UncoveredPolicy::error ? "error" : "one_hot";
    j["record_wall_time"] = cfg.record_wall_time;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            cfg.data_dir = p.value("data_dir", cfg.data_dir);
            cfg.model_dir = p.value("model_dir", cfg.model_dir);
            cfg.report_dir = p.value("report_dir", cfg.report_dir);
        }
        if (j.contains("task")) cfg.task = domain_shift_spec_from_json(j.at("task"));
        if (j.contains("network")) {
            const auto& n = j.at("network");
            if (n.contains("hidden_dims")) cfg.arch.hidden_dims = n.at("hidden_dims").get<std::vector<int>>();
            if (n.contains("activation")) {
                cfg.arch.activation = activation_from_name(n.at("activation").get<std::string>());
            }
        }
        if (j.contains("source_train")) {
            cfg.source_train = train_config_from_json(j.at("source_train"), cfg.source_train);
        }
        if (j.contains("adapt_train")) {
            cfg.adapt_train = train_config_from_json(j.at("adapt_train"), cfg.adapt_train);
        }
        if (j.contains("centroid")) {
            const auto& c = j.at("centroid");
            cfg.centroid.learning_rate = c.value("learning_rate", cfg.centroid.learning_rate);
            cfg.centroid.max_epochs = c.value("max_epochs", cfg.centroid.max_epochs);
            cfg.centroid.convergence_tol = c.value("convergence_tol", cfg.centroid.convergence_tol);
        }
        if (j.contains("methods")) {
            cfg.methods.clear();
            for (const auto& name : j.at("methods")) {
                cfg.methods.push_back(method_from_name(name.get<std::string>()));
            }
        }
        cfg.num_seeds = j.value("num_seeds", cfg.num_seeds);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("uncovered_label_policy")) {
            const auto policy = j.at("uncovered_label_policy").get<std::string>();
            if (policy == "error") {
                cfg.policy = UncoveredPolicy::error;
            } else if (policy == "one_hot") {
                cfg.policy = UncoveredPolicy::one_hot_fallback;
            } else {
                throw ConfigError("unknown uncovered_label_policy '" + policy + "'");
            }
        }
        cfg.record_wall_time = j.value("record_wall_time", cfg.record_wall_time);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse config '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

/// Hash of the canonical (normalized, key-sorted) config dump; stamped into
/// JSON reports next to the build identifier.
inline std::string config_hash(const ExperimentConfig& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_to_json(cfg).dump())));
    return buf;
}

}  // namespace nle
