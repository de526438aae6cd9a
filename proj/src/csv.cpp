#include "bvm/csv.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace bvm {

Eigen::MatrixXd load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("load_csv_matrix: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("load_csv_matrix: '" + path + "' is empty");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        const double value = std::stod(field, &used);
        while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) {
          ++used;
        }
        if (used != field.size()) throw std::invalid_argument(field);
        row.push_back(value);
      } catch (const std::exception&) {
        throw InvalidInput("load_csv_matrix: '" + path + "' line " + std::to_string(line_no) +
                           ": cannot parse '" + field + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidInput("load_csv_matrix: '" + path + "' line " + std::to_string(line_no) +
                         ": expected " + std::to_string(rows.front().size()) + " fields, got " +
                         std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("load_csv_matrix: '" + path + "' has no data rows");

  Eigen::MatrixXd out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.front().size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

}  // namespace bvm
