#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wdrc {

struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Comma-separated numbers; blank lines and lines starting with '#' are skipped.
NumericTable read_numeric_csv(const std::filesystem::path& path, bool header);

/// Row-major CSV matrix (no header).
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// Splits a CSV line on commas and trims surrounding blanks.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace wdrc
