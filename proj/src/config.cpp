#include <hsvd/config.hpp>
#include <hsvd/csv.hpp>
#include <hsvd/error.hpp>

#include <fstream>
#include <sstream>

namespace hsvd {

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos || trim(body.substr(0, eq)).empty())
      throw Error(ErrorKind::BadConfig, "line " + std::to_string(number) + ": expected key=value");
    cfg.values_[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int64_t> KeyValueConfig::get_int(const std::string& key) const {
  if (auto v = get(key)) return parse_int(*v);
  return std::nullopt;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  if (auto v = get(key)) return parse_double(*v);
  return std::nullopt;
}

std::optional<std::vector<double>> KeyValueConfig::get_double_list(const std::string& key) const {
  if (auto v = get(key)) return parse_double_list(*v);
  return std::nullopt;
}

std::optional<std::vector<std::int64_t>> KeyValueConfig::get_int_list(const std::string& key) const {
  if (auto v = get(key)) return parse_int_list(*v);
  return std::nullopt;
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_)
    if (!known.count(key)) throw Error(ErrorKind::BadConfig, "unknown key '" + key + "'");
}

}  // namespace hsvd
