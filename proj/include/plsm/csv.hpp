#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace plsm {

/// Header-named table of string cells (RFC 4180 quoting, comma separated).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position, or throws InputError naming the missing column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  /// Parses a column as doubles; empty or "NA" cells become NaN only if allow_missing.
  std::vector<double> numeric(std::string_view name, bool allow_missing = false) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::vector<std::string> split_list(std::string_view text, char sep = ',');

/// Shortest round-trip text for a double; NaN is written as "NA".
std::string format_double(double v);

}  // namespace plsm
