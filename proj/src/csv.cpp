#include "plsm/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "plsm/common.hpp"

namespace plsm {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

// Reads one logical record; quoted fields may contain commas, quotes ("") and newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false, any = false, quoted = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
      quoted = true;
    } else if (c == ',') {
      fields.push_back(quoted ? field : trim(field));
      field.clear();
      quoted = false;
    } else if (c == '\n') {
      fields.push_back(quoted ? field : trim(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw InputError("csv: unterminated quoted field");
  if (!any) return false;
  fields.push_back(quoted ? field : trim(field));
  return true;
}

bool blank(const std::vector<std::string>& rec) {
  return std::all_of(rec.begin(), rec.end(), [](const std::string& s) { return s.empty(); });
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError("csv: missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::numeric(std::string_view name, bool allow_missing) const {
  const std::size_t col = column(name);
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string& cell = rows[i][col];
    if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
      if (!allow_missing)
        throw InputError("csv: missing value in column '" + std::string(name) + "' at row " + std::to_string(i + 1));
      out[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
      throw InputError("csv: non-numeric value '" + cell + "' in column '" + std::string(name) + "' at row " +
                       std::to_string(i + 1));
    out[i] = v;
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> rec;
  while (read_record(in, rec)) {
    if (blank(rec)) continue;
    table.header = rec;
    break;
  }
  if (table.header.empty()) throw InputError("csv: empty input (no header)");
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) table.header[0].erase(0, 3);
  while (read_record(in, rec)) {
    if (blank(rec)) continue;
    if (rec.size() != table.header.size())
      throw InputError("csv: row " + std::to_string(table.rows.size() + 1) + " has " + std::to_string(rec.size()) +
                       " fields, header has " + std::to_string(table.header.size()));
    table.rows.push_back(rec);
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_csv(in);
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) pos = text.size();
    std::string item = trim(text.substr(start, pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace plsm
