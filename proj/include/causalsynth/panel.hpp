#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace causalsynth {

/// Time-indexed matrix of named series. The unit of exchange between the
/// simulator, the generators and the estimators.
///
/// `window_starts` is only populated for datasets assembled from independent
/// generated windows; estimators use it to drop lag pairs that would straddle
/// a window boundary. An empty vector means one contiguous series.
struct PanelDataset {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // T x K, row order = time order when time_indexed
    bool time_indexed = true;
    std::vector<std::size_t> window_starts;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

    /// Index of a named column; throws if absent.
    std::size_t column_index(const std::string& name) const;

    Eigen::VectorXd column(const std::string& name) const { return values.col(column_index(name)); }

    /// Throws unless the dataset is structurally sound: K = |columns|,
    /// T >= 2, no NaN/Inf entries, window starts sorted and in range.
    void validate() const;

    PanelDataset head(std::size_t n) const;
};

/// CSV with a header row, one row per time step, 9 significant digits.
void write_csv(const PanelDataset& data, const std::string& path);
PanelDataset read_csv(const std::string& path, bool time_indexed = true);

/// Sidecar JSON carrying what the CSV cannot: time ordering flag and window
/// boundaries. Written next to the CSV as <path>.meta.json.
void write_sidecar(const PanelDataset& data, const std::string& csv_path);
void apply_sidecar_if_present(PanelDataset& data, const std::string& csv_path);

std::string format_g9(double v);

}  // namespace causalsynth
