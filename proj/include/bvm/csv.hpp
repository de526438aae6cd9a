#pragma once

#include <Eigen/Dense>
#include <string>

#include "bvm/errors.hpp"

namespace bvm {

// Reads a numeric matrix from a CSV file: one header row (skipped), then
// one observation per line, comma separated. All data rows must have the
// same number of fields.
Eigen::MatrixXd load_csv_matrix(const std::string& path);

}  // namespace bvm
