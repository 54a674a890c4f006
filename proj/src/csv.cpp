#include "tlreg/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tlreg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
      was_quoted = true;
    } else if (ch == delimiter) {
      cells.push_back(was_quoted ? cell : std::string(trim(cell)));
      cell.clear();
      was_quoted = false;
    } else if (!(was_quoted && (ch == ' ' || ch == '\t' || ch == '\r'))) {
      cell.push_back(ch);
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quote");
  cells.push_back(was_quoted ? cell : std::string(trim(cell)));
  return cells;
}

int find_column(const std::vector<std::string>& columns, std::string_view name) {
  auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

}  // namespace

int CsvFrame::column_index(std::string_view name) const { return find_column(columns, name); }
int RawTable::column_index(std::string_view name) const { return find_column(columns, name); }

std::vector<double> RawTable::column(std::string_view name) const {
  const int c = column_index(name);
  if (c < 0) throw std::invalid_argument("table has no column '" + std::string(name) + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
  return out;
}

CsvFrame parse_csv(std::string_view text, char delimiter) {
  CsvFrame frame;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line, delimiter);
    if (!have_header) {
      frame.columns = std::move(cells);
      std::set<std::string> unique(frame.columns.begin(), frame.columns.end());
      if (unique.size() != frame.columns.size()) throw std::runtime_error("csv: duplicate column names in header");
      have_header = true;
      continue;
    }
    if (cells.size() != frame.columns.size()) {
      throw std::runtime_error("csv: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                               " fields, header has " + std::to_string(frame.columns.size()));
    }
    frame.rows.push_back(std::move(cells));
  }
  if (!have_header) throw std::runtime_error("csv: missing header row");
  return frame;
}

CsvFrame read_csv(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("csv: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), delimiter);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

RawTable to_numeric(const CsvFrame& frame) {
  RawTable table;
  table.columns = frame.columns;
  table.rows.reserve(frame.rows.size());
  for (std::size_t r = 0; r < frame.rows.size(); ++r) {
    std::vector<double> row;
    row.reserve(frame.columns.size());
    for (std::size_t c = 0; c < frame.columns.size(); ++c) {
      try {
        row.push_back(parse_double(frame.rows[r][c]));
      } catch (const std::invalid_argument&) {
        throw std::runtime_error("csv: non-numeric cell '" + frame.rows[r][c] + "' at data row " +
                                 std::to_string(r + 1) + ", column '" + frame.columns[c] + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, char delimiter) {
  return to_numeric(read_csv(path, delimiter));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

}  // namespace tlreg
