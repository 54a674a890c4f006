// Delimited text tables.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tlreg {

/// Header plus string cells. Quoted fields ("a;b", "say ""hi""") are unquoted.
struct CsvFrame {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column, or -1.
  [[nodiscard]] int column_index(std::string_view name) const;
};

CsvFrame parse_csv(std::string_view text, char delimiter = ',');
CsvFrame read_csv(const std::filesystem::path& path, char delimiter = ',');

/// Numeric table with named columns.
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] int column_index(std::string_view name) const;
  [[nodiscard]] std::vector<double> column(std::string_view name) const;
  [[nodiscard]] std::size_t size() const { return rows.size(); }
};

/// Parses every cell as a number; errors name the offending row and column.
RawTable to_numeric(const CsvFrame& frame);
RawTable load_csv(const std::filesystem::path& path, char delimiter = ',');

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace tlreg
