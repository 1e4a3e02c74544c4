#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "nle/common.hpp"

namespace nle {

/// Feature frames with integer class labels. Source and target datasets are
/// independent draws; nothing pairs their rows.
struct Dataset {
    Matrix features;          // N x D
    std::vector<int> labels;  // N, values in [0, num_classes)
    std::string domain_tag;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }

    void validate(int num_classes) const {
        if (features.rows() < 1) throw ShapeError("dataset '" + domain_tag + "' is empty");
        if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
            throw ShapeError("dataset '" + domain_tag + "' has " + std::to_string(features.rows()) +
                             " feature rows but " + std::to_string(labels.size()) + " labels");
        }
        for (int y : labels) {
            if (y < 0 || y >= num_classes) {
                throw ShapeError("dataset '" + domain_tag + "' label " + std::to_string(y) +
                                 " out of range [0, " + std::to_string(num_classes) + ")");
            }
        }
    }
};

namespace detail {

/// Shortest decimal form that parses back to the same double.
inline std::string double_to_string(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

/// CSV with header f0..f{D-1},label. Feature values are written in shortest
/// round-trip decimal form, so read(write(ds)) is value-exact.
inline void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (Eigen::Index d = 0; d < ds.dim(); ++d) out << "f" << d << ",";
    out << "label\n";
    for (Eigen::Index n = 0; n < ds.size(); ++n) {
        for (Eigen::Index d = 0; d < ds.dim(); ++d) {
            out << detail::double_to_string(ds.features(n, d)) << ",";
        }
        out << ds.labels[static_cast<std::size_t>(n)] << "\n";
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline Dataset load_dataset_csv(const std::string& path, std::string domain_tag = "") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
    std::size_t dim = 0;
    {
        std::stringstream header(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(header, col, ',')) cols.push_back(col);
        if (cols.empty() || cols.back() != "label") {
            throw IoError("'" + path + "' header must end with a label column");
        }
        dim = cols.size() - 1;
    }
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            if (col < dim) {
                double v = 0.0;
                auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (res.ec != std::errc{}) {
                    throw IoError("'" + path + "' row " + std::to_string(n_rows + 1) +
                                  ": bad number '" + cell + "'");
                }
                values.push_back(v);
            } else {
                labels.push_back(std::stoi(cell));
            }
            ++col;
        }
        if (col != dim + 1) {
            throw IoError("'" + path + "' row " + std::to_string(n_rows + 1) +
                          " has " + std::to_string(col) + " cells, expected " +
                          std::to_string(dim + 1));
        }
        ++n_rows;
    }
    if (n_rows == 0) throw IoError("'" + path + "' has no data rows");
    Dataset ds;
    ds.domain_tag = std::move(domain_tag);
    ds.features = Matrix(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(dim));
    for (std::size_t n = 0; n < n_rows; ++n) {
        for (std::size_t d = 0; d < dim; ++d) {
            ds.features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)) =
                values[n * dim + d];
        }
    }
    ds.labels = std::move(labels);
    return ds;
}

/// Provenance sidecar written next to each generated CSV.
inline void save_sidecar(const nlohmann::json& spec_doc, const std::string& csv_path) {
    const std::string path = csv_path + ".spec.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << spec_doc.dump(2) << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace nle
