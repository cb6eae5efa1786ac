#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zqsync {

/// Fixed 17-significant-digit formatting, so values round-trip exactly.
std::string format_real(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(std::ostream& os, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

/// Parses a file written by write_csv (no quoting); throws on ragged rows.
CsvTable read_csv_file(const std::string& path);

}  // namespace zqsync
