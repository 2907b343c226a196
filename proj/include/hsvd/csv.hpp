#pragma once

// Locale-free number formatting and parsing for CSV and key=value files.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hsvd {

/// 17 significant digits, '.' decimal point; round-trips every finite double.
std::string format_double(double value);

double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
/// Comma-separated lists; empty input gives an empty list.
std::vector<double> parse_double_list(std::string_view text);
std::vector<std::int64_t> parse_int_list(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Writes one CSV row; doubles go through format_double.
class CsvRow {
 public:
  CsvRow& operator<<(double v);
  CsvRow& operator<<(std::int64_t v);
  CsvRow& operator<<(int v) { return *this << static_cast<std::int64_t>(v); }
  CsvRow& operator<<(long long v) { return *this << static_cast<std::int64_t>(v); }
  CsvRow& operator<<(std::string_view v);
  CsvRow& operator<<(const char* v) { return *this << std::string_view(v); }
  CsvRow& operator<<(bool v) { return *this << std::string_view(v ? "true" : "false"); }

  const std::string& str() const { return line_; }

 private:
  void sep();
  std::string line_;
  bool first_ = true;
};

inline std::ostream& operator<<(std::ostream& out, const CsvRow& row) { return out << row.str() << '\n'; }

}  // namespace hsvd
