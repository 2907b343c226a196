#include <hsvd/csv.hpp>
#include <hsvd/error.hpp>

#include <charconv>
#include <cmath>

namespace hsvd {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
    throw Error(ErrorKind::BadConfig, "not a finite number: '" + std::string(text) + "'");
  return v;
}

std::int64_t parse_int(std::string_view text) {
  text = trim(text);
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorKind::BadConfig, "not an integer: '" + std::string(text) + "'");
  return v;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(item));
  return out;
}

std::vector<std::int64_t> parse_int_list(std::string_view text) {
  std::vector<std::int64_t> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse_int(item));
  return out;
}

void CsvRow::sep() {
  if (!first_) line_ += ',';
  first_ = false;
}

CsvRow& CsvRow::operator<<(double v) {
  sep();
  line_ += format_double(v);
  return *this;
}

CsvRow& CsvRow::operator<<(std::int64_t v) {
  sep();
  line_ += std::to_string(v);
  return *this;
}

CsvRow& CsvRow::operator<<(std::string_view v) {
  sep();
  line_ += v;
  return *this;
}

}  // namespace hsvd
