#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "spatialbias/error.hpp"
#include "spatialbias/io.hpp"

namespace spatialbias {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line, const std::string& path, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? current : trim(current));
      current.clear();
      was_quoted = false;
    } else {
      current += c;
    }
  }
  require(!quoted, ErrorCode::IOError, path + ":" + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(was_quoted ? current : trim(current));
  return fields;
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  fail(ErrorCode::SchemaError, "missing column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IOError, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line, path, line_no);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    require(fields.size() == table.header.size(), ErrorCode::SchemaError,
            path + ":" + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                " fields, found " + std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
  }
  require(!table.header.empty(), ErrorCode::SchemaError, "'" + path + "' has no header row");
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IOError, "cannot write '" + path + "'");
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << quote_if_needed(fields[i]);
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  require(out.good(), ErrorCode::IOError, "write to '" + path + "' failed");
}

double parse_double(const std::string& text, const std::string& context) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  require(ec == std::errc() && ptr == end && !t.empty(), ErrorCode::TypeError,
          context + ": '" + text + "' is not a number");
  return value;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::vector<Location> read_locations_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t id = table.column("id");
  const std::size_t x = table.column("x");
  const std::size_t y = table.column("y");
  std::vector<Location> out;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    require(seen.insert(row[id]).second, ErrorCode::JoinError, "duplicate location id '" + row[id] + "'");
    Location loc{row[id], parse_double(row[x], "x of " + row[id]), parse_double(row[y], "y of " + row[id])};
    require(std::isfinite(loc.x) && std::isfinite(loc.y), ErrorCode::TypeError,
            "non-finite coordinate for '" + row[id] + "'");
    out.push_back(std::move(loc));
  }
  return out;
}

void write_locations_csv(const std::string& path, const std::vector<Location>& locations) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& l : locations) rows.push_back({l.id, format_double(l.x), format_double(l.y)});
  write_csv(path, {"id", "x", "y"}, rows);
}

Eigen::MatrixXd read_adjacency_csv(const std::string& path, const std::vector<Location>& order) {
  const CsvTable table = read_csv(path);
  require(!table.header.empty() && table.header[0] == "id", ErrorCode::SchemaError,
          "adjacency header must start with 'id'");
  std::map<std::string, std::size_t> col_of;
  for (std::size_t c = 1; c < table.header.size(); ++c) col_of[table.header[c]] = c;
  std::map<std::string, const std::vector<std::string>*> row_of;
  for (const auto& row : table.rows) row_of[row[0]] = &row;

  const auto n = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = row_of.find(order[i].id);
    require(r != row_of.end(), ErrorCode::JoinError, "adjacency has no row for '" + order[i].id + "'");
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto c = col_of.find(order[j].id);
      require(c != col_of.end(), ErrorCode::JoinError, "adjacency has no column for '" + order[j].id + "'");
      a(i, j) = parse_double((*r->second)[c->second], "adjacency entry");
    }
  }
  return a;
}

void write_weights_csv(const std::string& path, const WeightMatrix& w, const std::vector<Location>& locations) {
  require(static_cast<Eigen::Index>(locations.size()) == w.n(), ErrorCode::ShapeError,
          "location count does not match the weight matrix");
  std::vector<std::string> header{"id"};
  for (const auto& l : locations) header.push_back(l.id);
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < w.n(); ++i) {
    std::vector<std::string> row{locations[static_cast<std::size_t>(i)].id};
    for (Eigen::Index j = 0; j < w.n(); ++j) row.push_back(format_double(w.weights()(i, j)));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

}  // namespace spatialbias
