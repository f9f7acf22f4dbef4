#pragma once

#include <string>
#include <vector>

#include "core/types.hpp"

namespace spls {

struct CsvTable {
  Matrix values;
  std::vector<std::string> names;  // empty when the file had no header
};

// Comma-separated numeric table, '.' decimal point, optional single header
// row. Errors carry 1-based file line (and column) positions.
CsvTable load_csv(const std::string& path, bool has_header);

// Renders with 17 significant digits so a load round-trips bit-for-bit.
std::string csv_text(const Matrix& values, const std::vector<std::string>& names);
void save_csv(const Matrix& values, const std::vector<std::string>& names, const std::string& path);

// Single column of labels, one per line, no header.
std::vector<std::string> load_labels(const std::string& path);

// Assembles a Dataset from predictor/response csv files (+ optional labels).
Dataset load_dataset_csv(const std::string& x_path, const std::string& y_path, bool has_header,
                         const std::string& subjects_path = "");

}  // namespace spls
