#include "causalsynth/panel.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace causalsynth {

std::size_t PanelDataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw std::runtime_error("PanelDataset: no column named '" + name + "'");
}

void PanelDataset::validate() const {
    if (static_cast<std::size_t>(values.cols()) != columns.size()) {
        throw std::runtime_error("PanelDataset: column count mismatch");
    }
    if (values.rows() < 2) {
        throw std::runtime_error("PanelDataset: need at least 2 rows");
    }
    if (!values.allFinite()) {
        throw std::runtime_error("PanelDataset: non-finite entry");
    }
    std::size_t prev = 0;
    for (std::size_t i = 0; i < window_starts.size(); ++i) {
        if (window_starts[i] >= rows() || (i > 0 && window_starts[i] <= prev)) {
            throw std::runtime_error("PanelDataset: bad window boundary");
        }
        prev = window_starts[i];
    }
}

PanelDataset PanelDataset::head(std::size_t n) const {
    PanelDataset out;
    out.columns = columns;
    out.time_indexed = time_indexed;
    out.values = values.topRows(static_cast<Eigen::Index>(std::min(n, rows())));
    for (std::size_t s : window_starts) {
        if (s < out.rows()) out.window_starts.push_back(s);
    }
    return out;
}

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_csv(const PanelDataset& data, const std::string& path) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
        if (c) out << ',';
        out << data.columns[c];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < data.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
            if (c) out << ',';
            out << format_g9(data.values(r, c));
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

PanelDataset read_csv(const std::string& path, bool time_indexed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);

    PanelDataset out;
    out.time_indexed = time_indexed;

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.columns = split_csv_line(line);

    std::vector<double> entries;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != out.columns.size()) {
            throw std::runtime_error("CSV row width mismatch in " + path);
        }
        for (const auto& f : fields) {
            std::size_t pos = 0;
            const double v = std::stod(f, &pos);
            if (pos != f.size()) throw std::runtime_error("bad CSV number '" + f + "' in " + path);
            entries.push_back(v);
        }
        ++n_rows;
    }

    const std::size_t k = out.columns.size();
    out.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = entries[r * k + c];
        }
    }
    out.validate();
    return out;
}

void write_sidecar(const PanelDataset& data, const std::string& csv_path) {
    nlohmann::json j;
    j["time_indexed"] = data.time_indexed;
    j["window_starts"] = data.window_starts;
    std::ofstream out(csv_path + ".meta.json");
    if (!out) throw std::runtime_error("cannot open sidecar for writing: " + csv_path);
    out << j.dump(2) << '\n';
}

void apply_sidecar_if_present(PanelDataset& data, const std::string& csv_path) {
    const std::string meta = csv_path + ".meta.json";
    if (!std::filesystem::exists(meta)) return;
    std::ifstream in(meta);
    nlohmann::json j;
    in >> j;
    data.time_indexed = j.value("time_indexed", data.time_indexed);
    data.window_starts = j.value("window_starts", std::vector<std::size_t>{});
}

}  // namespace causalsynth
