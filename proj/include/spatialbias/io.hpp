#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spatialbias/weights.hpp"

namespace spatialbias {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; SchemaError naming the column when missing.
  std::size_t column(const std::string& name) const;
};

/// Comma-separated, header row required, optional double quotes around fields.
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

double parse_double(const std::string& text, const std::string& context);

/// Shortest text that reads back to the same double.
std::string format_double(double value);

/// Header `id,x,y`. Rejects duplicate ids and non-finite coordinates.
std::vector<Location> read_locations_csv(const std::string& path);
void write_locations_csv(const std::string& path, const std::vector<Location>& locations);

/// Square 0/1 matrix with a leading id column, reordered to `order`. The
/// header row is `id,<id_1>,...,<id_n>`.
Eigen::MatrixXd read_adjacency_csv(const std::string& path, const std::vector<Location>& order);

void write_weights_csv(const std::string& path, const WeightMatrix& w,
                       const std::vector<Location>& locations);

}  // namespace spatialbias
