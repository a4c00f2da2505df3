#pragma once

#include <filesystem>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kvwave {

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigSection {
  /// Empty for the keys before the first header.
  std::string name;
  int line = 0;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(std::string_view key) const;
};

/// Line-oriented `key = value` document with `[section]` headers and `#`
/// comments. Duplicate keys within a section and duplicate sections are
/// errors naming both lines.
class ConfigDocument {
 public:
  static ConfigDocument parse(std::string_view text, std::string source = "<string>");
  static ConfigDocument load(const std::filesystem::path& path);

  const std::string& source() const { return source_; }
  const ConfigSection& root() const { return sections_.front(); }
  const ConfigSection* section(std::string_view name) const;
  const std::vector<ConfigSection>& sections() const { return sections_; }

  /// "source:line: message" as a ConfigError.
  [[noreturn]] void fail(int line, const std::string& message) const;

  double get_double(const ConfigEntry& e) const;
  int get_int(const ConfigEntry& e) const;
  std::uint64_t get_u64(const ConfigEntry& e) const;
  /// Comma-separated list of numbers; `expected` = 0 accepts any length ≥ 1.
  std::vector<double> get_doubles(const ConfigEntry& e, std::size_t expected = 0) const;
  std::vector<int> get_ints(const ConfigEntry& e, std::size_t expected = 0) const;

 private:
  std::string source_;
  std::vector<ConfigSection> sections_;
};

}  // namespace kvwave
