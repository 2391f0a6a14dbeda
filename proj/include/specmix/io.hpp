#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace specmix {

/// Write a numeric matrix as plain CSV, preceded by a header row when column
/// names are given. Values are rendered with the shortest representation that
/// round-trips to the same double.
void write_csv(const std::string& path, const Eigen::MatrixXd& matrix,
               const std::vector<std::string>& header = {});

/// Read a plain numeric CSV. A single non-numeric first row is treated as a
/// header and skipped; ragged rows or non-numeric cells elsewhere raise
/// DataError.
Eigen::MatrixXd read_csv(const std::string& path);

/// Read an integer label vector from a one-column CSV (optional header).
std::vector<int> read_labels(const std::string& path);

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double value);

}  // namespace specmix
