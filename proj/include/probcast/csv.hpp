#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace probcast::csv {

/// Minimal RFC-4180-ish reader: comma separated, optional double quotes,
/// no embedded newlines.
class Table {
 public:
  static Table read_file(const std::string& path);
  static Table read(std::istream& in, const std::string& source_name = "<stream>");

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  /// Line number (1-based, header = 1) of the given data row.
  std::size_t line_of(std::size_t row) const { return line_numbers_[row]; }

  /// Column index by exact header name.
  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws DataError naming the missing column.
  std::size_t require(std::string_view name) const;

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> line_numbers_;
};

std::vector<std::string> split_line(std::string_view line);

/// Empty, "NA"/"NaN" or unparseable cells yield nullopt.
std::optional<double> parse_number(std::string_view cell);
/// Throws DataError with context when the cell is not a number.
double require_number(std::string_view cell, std::string_view context);

/// Shortest round-trip representation of a double.
std::string format_number(double value);

}  // namespace probcast::csv
