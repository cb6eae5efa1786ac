#include "zqsync/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace zqsync {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void write_line(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].find_first_of(",\n\"") != std::string::npos)
      throw std::invalid_argument("write_csv: cell needs quoting: " + cells[i]);
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_csv(std::ostream& os, const CsvTable& table) {
  write_line(os, table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::invalid_argument("write_csv: ragged row");
    write_line(os, row);
  }
}

void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(os, table);
  if (!os) throw std::runtime_error("write failed: " + path);
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) return table;
  table.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != table.header.size()) throw std::runtime_error(path + ": ragged row");
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace zqsync
