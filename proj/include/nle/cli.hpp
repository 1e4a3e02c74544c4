#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nle/config.hpp"
#include "nle/report.hpp"

#ifndef NLE_GIT_DESCRIBE
#define NLE_GIT_DESCRIBE "unknown"
#endif

namespace nle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;

namespace detail {

struct CommonFlags {
    std::string config_path;
    std::string data_dir;
    std::string model_dir;
    std::string report_dir;
    std::vector<std::string> methods;
    std::int64_t num_seeds = -1;
    std::int64_t seed = -1;
    std::string uncovered_policy;
    bool record_wall_time = false;

    void attach(CLI::App* cmd, bool with_experiment_flags) {
        cmd->add_option("-c,--config", config_path, "JSON config file (defaults used when absent)");
        cmd->add_option("--data-dir", data_dir, "override the config data_dir");
        cmd->add_option("--model-dir", model_dir, "override the config model_dir");
        cmd->add_option("--report-dir", report_dir, "override the config report_dir");
        if (with_experiment_flags) {
            cmd->add_option("--methods", methods, "override the config method list");
            cmd->add_option("--num-seeds", num_seeds, "override the config num_seeds");
            cmd->add_option("--seed", seed, "override the config master seed");
            cmd->add_option("--uncovered-policy", uncovered_policy,
                            "uncovered target labels: error | one_hot");
            cmd->add_flag("--record-wall-time", record_wall_time,
                          "record measured wall times in reports (breaks byte-level reproducibility)");
        }
    }

    /// Precedence: flags > config file > defaults.
    ExperimentConfig resolve() const {
        ExperimentConfig cfg =
            config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (!data_dir.empty()) cfg.data_dir = data_dir;
        if (!model_dir.empty()) cfg.model_dir = model_dir;
        if (!report_dir.empty()) cfg.report_dir = report_dir;
        if (!methods.empty()) {
            cfg.methods.clear();
            for (const auto& name : methods) cfg.methods.push_back(method_from_name(name));
        }
        if (num_seeds >= 0) cfg.num_seeds = static_cast<int>(num_seeds);
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (!uncovered_policy.empty()) {
            if (uncovered_policy == "error") {
                cfg.policy = UncoveredPolicy::error;
            } else if (uncovered_policy == "one_hot") {
                cfg.policy = UncoveredPolicy::one_hot_fallback;
            } else {
                throw ConfigError("unknown uncovered policy '" + uncovered_policy + "'");
            }
        }
        if (record_wall_time) cfg.record_wall_time = true;
        return cfg;
    }
};

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline void cmd_validate_config(const CommonFlags& flags, bool dump, std::ostream& out,
                                std::ostream& err) {
    ExperimentConfig cfg = flags.resolve();
    for (const auto& warning : cfg.validate()) err << "warning: " << warning << "\n";
    if (dump) {
        out << config_to_json(cfg).dump(2) << "\n";
    } else {
        out << "config ok (hash " << config_hash(cfg) << ")\n";
    }
}

inline void cmd_generate(const CommonFlags& flags, std::ostream& out) {
    ExperimentConfig cfg = flags.resolve();
    cfg.validate();
    ensure_dir(cfg.data_dir);
    const GeneratedData data = generate(cfg.task);
    const nlohmann::json sidecar = domain_shift_spec_to_json(cfg.task);
    for (const auto* ds : {&data.source, &data.source_test, &data.target_adapt, &data.target_test}) {
        const std::string path = join_path(cfg.data_dir, ds->domain_tag + ".csv");
        save_dataset_csv(*ds, path);
        save_sidecar(sidecar, path);
    }
    Dataset paired;
    paired.features = data.paired_source_features;
    paired.labels = data.target_adapt.labels;
    paired.domain_tag = "paired_source";
    const std::string paired_path = join_path(cfg.data_dir, "paired_source.csv");
    save_dataset_csv(paired, paired_path);
    save_sidecar(sidecar, paired_path);
    out << "wrote source/source_test/target_adapt/target_test/paired_source to " << cfg.data_dir
        << "\n";
}

inline Dataset load_named_dataset(const ExperimentConfig& cfg, const std::string& name) {
    return load_dataset_csv(join_path(cfg.data_dir, name + ".csv"), name);
}

inline void cmd_train_source(const CommonFlags& flags, std::string model_out, std::ostream& out) {
    ExperimentConfig cfg = flags.resolve();
    cfg.validate();
    const Dataset source = load_named_dataset(cfg, "source");
    TrainConfig train_cfg = cfg.source_train;
    const std::uint64_t run_seed = sub_seed(cfg.seed, "run/0");
    train_cfg.seed = sub_seed(run_seed, "source-train");
    const TrainResult fit = train_source(source, cfg.task.num_classes, cfg.arch, train_cfg,
                                         sub_seed(run_seed, "source-init"));
    if (model_out.empty()) {
        ensure_dir(cfg.model_dir);
        model_out = join_path(cfg.model_dir, "source_model.json");
    }
    save_network(fit.net, model_out);
    out << "trained source model in " << fit.epochs << " epochs, final loss "
        << fit.loss_curve.back() << ", saved to " << model_out << "\n";
    std::error_code ec;
    if (std::filesystem::exists(join_path(cfg.data_dir, "source_test.csv"), ec)) {
        const Dataset held_out = load_named_dataset(cfg, "source_test");
        out << "held-out source error rate: " << error_rate(fit.net, held_out) << "\n";
    }
}

inline void cmd_distill(const CommonFlags& flags, const std::string& model_path,
                        const std::string& method, std::string codebook_out, std::ostream& out) {
    ExperimentConfig cfg = flags.resolve();
    cfg.validate();
    const Network source = load_network(model_path.empty()
                                            ? join_path(cfg.model_dir, "source_model.json")
                                            : model_path);
    const Dataset src = load_named_dataset(cfg, "source");
    const Codebook cb = distill(source, src, codebook_method_from_name(method), cfg.centroid);
    if (codebook_out.empty()) {
        ensure_dir(cfg.model_dir);
        codebook_out = join_path(cfg.model_dir, "codebook_" + method + ".json");
    }
    save_codebook(cb, codebook_out);
    int uncovered = 0;
    for (int c = 0; c < cb.num_classes; ++c) {
        if (!cb.covered(c)) ++uncovered;
    }
    out << "learned " << method << " codebook (" << cb.num_classes - uncovered << "/"
        << cb.num_classes << " classes covered), saved to " << codebook_out << "\n";
}

inline void cmd_adapt(const CommonFlags& flags, const std::string& model_path,
                      const std::string& codebook_path, std::string model_out, std::ostream& out) {
    ExperimentConfig cfg = flags.resolve();
    cfg.validate();
    const Network source = load_network(model_path.empty()
                                            ? join_path(cfg.model_dir, "source_model.json")
                                            : model_path);
    if (codebook_path.empty()) throw ConfigError("adapt requires --codebook");
    const Codebook cb = load_codebook(codebook_path);
    const Dataset tgt = load_named_dataset(cfg, "target_adapt");
    TrainConfig adapt_cfg = cfg.adapt_train;
    adapt_cfg.seed = sub_seed(sub_seed(cfg.seed, "run/0"), "adapt");
    const AdaptResult fit = adapt_nle(source, tgt, cb, adapt_cfg, cfg.policy);
    if (model_out.empty()) {
        ensure_dir(cfg.model_dir);
        model_out = join_path(cfg.model_dir, "adapted_" + codebook_method_name(cb.method) + ".json");
    }
    save_network(fit.train.net, model_out);
    out << "adapted model in " << fit.train.epochs << " epochs, final loss "
        << fit.train.loss_curve.back() << ", saved to " << model_out << "\n";
}

inline void cmd_evaluate(const CommonFlags& flags, const std::string& model_path,
                         const std::string& dataset_name, std::ostream& out) {
    ExperimentConfig cfg = flags.resolve();
    cfg.validate();
    const Network net = load_network(model_path.empty()
                                         ? join_path(cfg.model_dir, "source_model.json")
                                         : model_path);
    const Dataset eval = load_named_dataset(cfg, dataset_name);
    out << "error_rate," << ::nle::detail::format_fixed(error_rate(net, eval), 6) << "\n";
}

inline void cmd_compare(const CommonFlags& flags, std::ostream& out) {
    ExperimentConfig cfg = flags.resolve();
    cfg.validate();
    const CompareResult result = compare(cfg.experiment_spec());
    ensure_dir(cfg.report_dir);
    write_text_file(reports_to_csv(result), join_path(cfg.report_dir, "report.csv"));
    write_text_file(reports_to_json(result, NLE_GIT_DESCRIBE, config_hash(cfg)).dump(2) + "\n",
                    join_path(cfg.report_dir, "report.json"));
    if (!result.runs.empty()) {
        const Summary summary = summarize(result.runs);
        write_text_file(summary.to_csv(), join_path(cfg.report_dir, "summary.csv"));
        write_text_file(summary.to_text(), join_path(cfg.report_dir, "summary.txt"));
        out << summary.to_text();
    }
    out << "reports written to " << cfg.report_dir << "\n";
}

}  // namespace detail

/// Entry point shared by the binary and the tests. args excludes the program
/// name. Exit codes: 0 success, 1 runtime failure, 2 usage/unknown
/// subcommand, 3 config validation failure.
inline int run_command(std::vector<std::string> args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    CLI::App app{"label-embedding domain adaptation toolkit"};
    app.require_subcommand(1);

    detail::CommonFlags flags;
    bool dump_config = false;
    std::string model_path, codebook_path, model_out, codebook_out;
    std::string method = "l2";
    std::string dataset_name = "target_test";

    auto* validate_cmd = app.add_subcommand("validate-config", "validate (and optionally dump) a config");
    flags.attach(validate_cmd, true);
    validate_cmd->add_flag("--dump", dump_config, "print the normalized config JSON");

    auto* generate_cmd = app.add_subcommand("generate", "generate the synthetic source/target datasets");
    flags.attach(generate_cmd, true);

    auto* train_cmd = app.add_subcommand("train-source", "train the source-domain model");
    flags.attach(train_cmd, true);
    train_cmd->add_option("--model-out", model_out, "where to write the trained model");

    auto* distill_cmd = app.add_subcommand("distill", "learn an l-vector codebook from the source model");
    flags.attach(distill_cmd, true);
    distill_cmd->add_option("--model", model_path, "source model JSON");
    distill_cmd->add_option("--method", method, "l2 | kl | skl")->capture_default_str();
    distill_cmd->add_option("--codebook-out", codebook_out, "where to write the codebook");

    auto* adapt_cmd = app.add_subcommand("adapt", "adapt the model to target data with a codebook");
    flags.attach(adapt_cmd, true);
    adapt_cmd->add_option("--model", model_path, "source model JSON");
    adapt_cmd->add_option("--codebook", codebook_path, "codebook JSON")->required();
    adapt_cmd->add_option("--model-out", model_out, "where to write the adapted model");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "error rate of a model on a dataset");
    flags.attach(evaluate_cmd, true);
    evaluate_cmd->add_option("--model", model_path, "model JSON");
    evaluate_cmd->add_option("--dataset", dataset_name, "dataset name inside data_dir")
        ->capture_default_str();

    auto* compare_cmd = app.add_subcommand("compare", "run the multi-method comparison suite");
    flags.attach(compare_cmd, true);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "nle: error: " << e.what() << "\n";
        err << app.help();
        return kExitUsage;
    }

    try {
        if (validate_cmd->parsed()) {
            detail::cmd_validate_config(flags, dump_config, out, err);
        } else if (generate_cmd->parsed()) {
            detail::cmd_generate(flags, out);
        } else if (train_cmd->parsed()) {
            detail::cmd_train_source(flags, model_out, out);
        } else if (distill_cmd->parsed()) {
            detail::cmd_distill(flags, model_path, method, codebook_out, out);
        } else if (adapt_cmd->parsed()) {
            detail::cmd_adapt(flags, model_path, codebook_path, model_out, out);
        } else if (evaluate_cmd->parsed()) {
            detail::cmd_evaluate(flags, model_path, dataset_name, out);
        } else if (compare_cmd->parsed()) {
            detail::cmd_compare(flags, out);
        }
    } catch (const ConfigError& e) {
        err << "nle: error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "nle: error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace nle::cli
