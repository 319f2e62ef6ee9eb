#include "reprindt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "reprindt/error.hpp"

namespace reprindt {

std::string trim(std::string_view text) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

std::vector<std::string> split(std::string_view text, char delimiter) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(delimiter, start);
    if (pos == std::string_view::npos) {
      parts.push_back(trim(text.substr(start)));
      return parts;
    }
    parts.push_back(trim(text.substr(start, pos - start)));
    start = pos + 1;
  }
}

double parse_double(std::string_view text, const std::string& what) {
  const std::string s = trim(text);
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorCode::config, what + ": expected a finite number, got '" + s + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view text, const std::string& what) {
  const std::string s = trim(text);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::config, what + ": expected an integer, got '" + s + "'");
  }
  return value;
}

bool ConfigSection::has(std::string_view key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const ConfigEntry& e) { return e.key == key; });
}

std::optional<std::string> ConfigSection::get(std::string_view key) const {
  std::optional<std::string> found;
  for (const auto& e : entries_) {
    if (e.key == key) found = e.value;
  }
  return found;
}

std::vector<std::string> ConfigSection::get_all(std::string_view key) const {
  std::vector<std::string> values;
  for (const auto& e : entries_) {
    if (e.key == key) values.push_back(e.value);
  }
  return values;
}

std::string ConfigSection::qualified(std::string_view key) const {
  return name_ + "." + std::string(key);
}

void ConfigSection::require_known_keys(std::initializer_list<std::string_view> known) const {
  for (const auto& e : entries_) {
    if (std::find(known.begin(), known.end(), e.key) == known.end()) {
      throw Error(ErrorCode::config,
                  "unknown key '" + qualified(e.key) + "' (line " + std::to_string(e.line) + ")");
    }
  }
}

double ConfigSection::get_double(std::string_view key, double fallback) const {
  const auto value = get(key);
  return value ? parse_double(*value, qualified(key)) : fallback;
}

std::int64_t ConfigSection::get_int(std::string_view key, std::int64_t fallback) const {
  const auto value = get(key);
  return value ? parse_int(*value, qualified(key)) : fallback;
}

bool ConfigSection::get_bool(std::string_view key, bool fallback) const {
  const auto value = get(key);
  if (!value) return fallback;
  if (*value == "true" || *value == "yes" || *value == "1" || *value == "on") return true;
  if (*value == "false" || *value == "no" || *value == "0" || *value == "off") return false;
  throw Error(ErrorCode::config, qualified(key) + ": expected a boolean, got '" + *value + "'");
}

std::vector<double> ConfigSection::get_double_list(std::string_view key,
                                                   std::vector<double> fallback) const {
  const auto value = get(key);
  if (!value) return fallback;
  std::vector<double> out;
  for (const auto& item : split(*value, ',')) out.push_back(parse_double(item, qualified(key)));
  return out;
}

std::vector<std::string> ConfigSection::get_list(std::string_view key,
                                                 std::vector<std::string> fallback) const {
  const auto value = get(key);
  if (!value) return fallback;
  auto items = split(*value, ',');
  for (const auto& item : items) {
    if (item.empty()) throw Error(ErrorCode::config, qualified(key) + ": empty list item");
  }
  return items;
}

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile file;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::config, source + ":" + std::to_string(line_no) + ": malformed section header");
      }
      std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty()) {
        throw Error(ErrorCode::config, source + ":" + std::to_string(line_no) + ": empty section name");
      }
      if (file.section(name) != nullptr) {
        throw Error(ErrorCode::config, source + ":" + std::to_string(line_no) + ": duplicate section [" + name + "]");
      }
      file.sections_.emplace_back(std::move(name));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config, source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (file.sections_.empty()) {
      throw Error(ErrorCode::config, source + ":" + std::to_string(line_no) + ": key outside of a section");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    // Inline comments need a preceding space so '#' can still appear in values.
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    if (key.empty()) {
      throw Error(ErrorCode::config, source + ":" + std::to_string(line_no) + ": empty key");
    }
    file.sections_.back().add({std::move(key), std::move(value), line_no});
  }
  return file;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open config file '" + path + "'");
  return parse(in, path);
}

const ConfigSection* ConfigFile::section(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.name() == name) return &s;
  }
  return nullptr;
}

void ConfigFile::require_known_sections(std::initializer_list<std::string_view> known) const {
  for (const auto& s : sections_) {
    if (std::find(known.begin(), known.end(), s.name()) == known.end()) {
      throw Error(ErrorCode::config, "unknown section [" + s.name() + "]");
    }
  }
}

}  // namespace reprindt
