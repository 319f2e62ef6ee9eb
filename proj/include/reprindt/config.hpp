#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reprindt {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// One `[name]` block of a sectioned key-value file. Keys may repeat; order
// of appearance is kept.
class ConfigSection {
 public:
  ConfigSection() = default;
  explicit ConfigSection(std::string name) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }
  const std::vector<ConfigEntry>& entries() const noexcept { return entries_; }
  void add(ConfigEntry entry) { entries_.push_back(std::move(entry)); }

  bool has(std::string_view key) const;
  // Last value wins for single-valued keys.
  std::optional<std::string> get(std::string_view key) const;
  std::vector<std::string> get_all(std::string_view key) const;

  // Throws ConfigError naming `section.key` for anything not listed.
  void require_known_keys(std::initializer_list<std::string_view> known) const;

  std::string qualified(std::string_view key) const;

  double get_double(std::string_view key, double fallback) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<double> get_double_list(std::string_view key, std::vector<double> fallback) const;
  std::vector<std::string> get_list(std::string_view key, std::vector<std::string> fallback) const;

 private:
  std::string name_;
  std::vector<ConfigEntry> entries_;
};

class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
  static ConfigFile load(const std::string& path);

  const ConfigSection* section(std::string_view name) const;
  const std::vector<ConfigSection>& sections() const noexcept { return sections_; }
  void require_known_sections(std::initializer_list<std::string_view> known) const;

 private:
  std::vector<ConfigSection> sections_;
};

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

double parse_double(std::string_view text, const std::string& what);
std::int64_t parse_int(std::string_view text, const std::string& what);

}  // namespace reprindt
