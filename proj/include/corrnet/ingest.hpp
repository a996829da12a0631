#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "corrnet/corr.hpp"

namespace corrnet {

// External channel x time matrix (EEG-style CSV export).
struct ExternalMatrix {
    Eigen::MatrixXd values;  // rows = channels, cols = time points
    std::string provenance;

    int channels() const { return static_cast<int>(values.rows()); }
    int samples() const { return static_cast<int>(values.cols()); }

    // hand the matrix to the shared windowing/correlation path
    const TimeSeriesMatrix& as_series() const { return values; }
};

// Numeric CSV, one row per channel. '#' lines are comments; the delimiter
// (comma or whitespace) is detected from the first data row and must be
// uniform within the file. Rejects ragged rows, non-numeric cells and
// non-finite values with coordinates.
ExternalMatrix load_csv_matrix(const std::filesystem::path& path);

// 17 significant digits, so a reload reproduces values exactly
void write_csv_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values);

}  // namespace corrnet
