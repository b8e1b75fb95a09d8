#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pbdsim::io {

/// A comma-separated table with a mandatory header row. Blank lines and lines
/// starting with '#' are skipped; cells are whitespace-trimmed.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line of each row

  /// Column index of `name`, or throws ParseError.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;

  /// Parses cell (row, col) as a double; ParseError names source:line.
  double number(std::size_t row, std::size_t col) const;
  double number(std::size_t row, const std::string& name) const { return number(row, column(name)); }
  const std::string& text(std::size_t row, std::size_t col) const { return rows.at(row).at(col); }
};

CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::string& path);

/// Shortest-roundtrip-safe, locale-independent formatting used by every CSV
/// writer so outputs are byte-stable.
std::string format_double(double v);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

/// Strict double parse (whole string must be consumed). Accepts "a/b" fractions.
bool parse_double(const std::string& s, double& out);

}  // namespace pbdsim::io
