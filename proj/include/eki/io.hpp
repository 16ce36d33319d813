#pragma once

// Locale-independent text output shared by the CSV, SVG and report writers.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace eki {

/// Shortest round-trip decimal representation, independent of the C locale.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// Fixed-precision representation (used for SVG coordinates).
inline std::string format_fixed(double x, int precision) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

/// One CSV cell. Numbers are formatted with format_number.
class Cell {
 public:
  Cell(double x) : text_(format_number(x)) {}
  Cell(int x) : text_(std::to_string(x)) {}
  Cell(long x) : text_(std::to_string(x)) {}
  Cell(long long x) : text_(std::to_string(x)) {}
  Cell(unsigned x) : text_(std::to_string(x)) {}
  Cell(unsigned long x) : text_(std::to_string(x)) {}
  Cell(unsigned long long x) : text_(std::to_string(x)) {}
  Cell(bool x) : text_(x ? "1" : "0") {}
  Cell(const char* s) : text_(s) {}
  Cell(std::string s) : text_(std::move(s)) {}

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// In-memory CSV table with a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::initializer_list<Cell> cells) {
    std::vector<std::string> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(c.text());
    if (row.size() != header_.size()) throw std::invalid_argument("CsvTable: row width does not match header");
    rows_.push_back(std::move(row));
  }

  std::size_t rows() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    append_line(out, header_);
    for (const auto& r : rows_) append_line(out, r);
    return out;
  }

  void write(const std::filesystem::path& path) const { write_text(path, str()); }

  static void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
  }

 private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Flat "key: value" report.
class KeyValueReport {
 public:
  void add(std::string key, const Cell& value) { lines_.emplace_back(std::move(key), value.text()); }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : lines_) out += k + ": " + v + "\n";
    return out;
  }

  void write(const std::filesystem::path& path) const { CsvTable::write_text(path, str()); }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

}  // namespace eki
