#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nle/common.hpp"
#include "nle/pipeline.hpp"

namespace nle {

namespace detail {

inline std::string format_fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

}  // namespace detail

/// CSV emission: one row per run (method, seed, error_rate, epochs,
/// wall_time_s) followed by one mean row per method with "mean" in the seed
/// column. Fixed formatting keeps identical results byte-identical.
inline std::string reports_to_csv(const CompareResult& result) {
    std::string csv = "method,seed,error_rate,epochs,wall_time_s\n";
    for (const auto& r : result.runs) {
        csv += r.method + "," + std::to_string(r.seed) + "," + detail::format_fixed(r.error_rate, 6) +
               "," + std::to_string(r.epochs) + "," + detail::format_fixed(r.wall_time_s, 6) + "\n";
    }
    for (const auto& r : result.means) {
        csv += r.method + ",mean," + detail::format_fixed(r.error_rate, 6) + "," +
               std::to_string(r.epochs) + "," + detail::format_fixed(r.wall_time_s, 6) + "\n";
    }
    return csv;
}

inline nlohmann::json run_report_to_json(const RunReport& r) {
    nlohmann::json j;
    j["method"] = r.method;
    j["seed"] = r.seed;
    j["error_rate"] = r.error_rate;
    j["epochs"] = r.epochs;
    j["wall_time_s"] = r.wall_time_s;
    j["loss_curve"] = r.loss_curve;
    j["soft_target_build_s"] = r.soft_target_build_s;
    j["teacher_forward_s"] = r.teacher_forward_s;
    return j;
}

/// JSON emission with provenance (build identifier and config hash).
inline nlohmann::json reports_to_json(const CompareResult& result, const std::string& git_describe,
                                      const std::string& config_hash) {
    nlohmann::json j;
    j["git_describe"] = git_describe;
    j["config_hash"] = config_hash;
    j["runs"] = nlohmann::json::array();
    for (const auto& r : result.runs) j["runs"].push_back(run_report_to_json(r));
    j["means"] = nlohmann::json::array();
    for (const auto& r : result.means) j["means"].push_back(run_report_to_json(r));
    return j;
}

inline void write_text_file(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Summary table: per-method mean, std, and relative error reduction against
// the one_hot baseline, (baseline - method) / baseline.
// ---------------------------------------------------------------------------

struct SummaryRow {
    std::string method;
    double mean_error = 0.0;
    double std_error = 0.0;  // sample standard deviation across seeds
    bool has_relative = false;
    double relative_reduction_pct = 0.0;
};

struct Summary {
    std::vector<SummaryRow> rows;
    bool has_baseline = false;
    std::string notice;

    std::string to_text() const;
    std::string to_csv() const;
};

inline Summary summarize(const std::vector<RunReport>& reports) {
    if (reports.empty()) throw ConfigError("cannot summarize an empty report list");
    Summary summary;
    std::vector<std::string> order;
    for (const auto& r : reports) {
        if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
    }
    for (const auto& method : order) {
        SummaryRow row;
        row.method = method;
        std::vector<double> errors;
        for (const auto& r : reports) {
            if (r.method == method) errors.push_back(r.error_rate);
        }
        double sum = 0.0;
        for (double e : errors) sum += e;
        row.mean_error = sum / static_cast<double>(errors.size());
        if (errors.size() > 1) {
            double sq = 0.0;
            for (double e : errors) sq += (e - row.mean_error) * (e - row.mean_error);
            row.std_error = std::sqrt(sq / static_cast<double>(errors.size() - 1));
        }
        summary.rows.push_back(std::move(row));
    }
    const auto baseline = std::find_if(summary.rows.begin(), summary.rows.end(),
                                       [](const SummaryRow& r) { return r.method == "one_hot"; });
    if (baseline != summary.rows.end() && baseline->mean_error > 0.0) {
        summary.has_baseline = true;
        for (auto& row : summary.rows) {
            row.has_relative = true;
            row.relative_reduction_pct =
                (baseline->mean_error - row.mean_error) / baseline->mean_error * 100.0;
        }
    } else {
        summary.notice = "no one_hot baseline in reports; relative column omitted";
    }
    return summary;
}

inline std::string Summary::to_text() const {
    std::ostringstream out;
    out << std::left << std::setw(12) << "method" << std::right << std::setw(12) << "mean_err"
        << std::setw(12) << "std";
    if (has_baseline) out << std::setw(16) << "rel_vs_one_hot";
    out << "\n";
    for (const auto& row : rows) {
        out << std::left << std::setw(12) << row.method << std::right << std::setw(12)
            << detail::format_fixed(row.mean_error, 4) << std::setw(12)
            << detail::format_fixed(row.std_error, 4);
        if (has_baseline) {
            out << std::setw(15) << detail::format_fixed(row.relative_reduction_pct, 2) << "%";
        }
        out << "\n";
    }
    if (!notice.empty()) out << "note: " << notice << "\n";
    return out.str();
}

inline std::string Summary::to_csv() const {
    std::string csv = has_baseline ? "method,mean_error,std,relative_reduction_vs_one_hot_pct\n"
                                   : "method,mean_error,std\n";
    for (const auto& row : rows) {
        csv += row.method + "," + detail::format_fixed(row.mean_error, 6) + "," +
               detail::format_fixed(row.std_error, 6);
        if (has_baseline) csv += "," + detail::format_fixed(row.relative_reduction_pct, 4);
        csv += "\n";
    }
    return csv;
}

}  // namespace nle
