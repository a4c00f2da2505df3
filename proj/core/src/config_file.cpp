#include "kvwave/config_file.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "kvwave/error.hpp"

namespace kvwave {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_')) {
    return false;
  }
  for (char ch : s) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.')) return false;
  }
  return true;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

const ConfigEntry* ConfigSection::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

ConfigDocument ConfigDocument::parse(std::string_view text, std::string source) {
  ConfigDocument doc;
  doc.source_ = std::move(source);
  doc.sections_.push_back(ConfigSection{"", 0, {}});

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') doc.fail(line_no, "malformed section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) doc.fail(line_no, "invalid section name '" + std::string(name) + "'");
      for (const auto& s : doc.sections_) {
        if (s.name == name) {
          doc.fail(line_no, "duplicate section [" + std::string(name) + "] (first defined on line " +
                                std::to_string(s.line) + ")");
        }
      }
      doc.sections_.push_back(ConfigSection{std::string(name), line_no, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) doc.fail(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!valid_name(key)) doc.fail(line_no, "invalid key '" + std::string(key) + "'");
    if (value.empty()) doc.fail(line_no, "missing value for key '" + std::string(key) + "'");
    ConfigSection& sec = doc.sections_.back();
    if (const ConfigEntry* prev = sec.find(key)) {
      doc.fail(line_no, "duplicate key '" + std::string(key) + "' on lines " +
                            std::to_string(prev->line) + " and " + std::to_string(line_no));
    }
    sec.entries.push_back(ConfigEntry{std::string(key), std::string(value), line_no});
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const ConfigSection* ConfigDocument::section(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

void ConfigDocument::fail(int line, const std::string& message) const {
  throw ConfigError(source_ + ":" + std::to_string(line) + ": " + message);
}

double ConfigDocument::get_double(const ConfigEntry& e) const {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(e.line, "malformed number '" + e.value + "' for key '" + e.key + "'");
  if (!std::isfinite(v)) fail(e.line, "non-finite number for key '" + e.key + "'");
  return v;
}

int ConfigDocument::get_int(const ConfigEntry& e) const {
  int v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(e.line, "malformed integer '" + e.value + "' for key '" + e.key + "'");
  return v;
}

std::uint64_t ConfigDocument::get_u64(const ConfigEntry& e) const {
  std::uint64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(e.line, "malformed unsigned integer '" + e.value + "' for key '" + e.key + "'");
  return v;
}

std::vector<double> ConfigDocument::get_doubles(const ConfigEntry& e, std::size_t expected) const {
  std::vector<double> out;
  for (auto item : split_list(e.value)) {
    ConfigEntry tmp{e.key, std::string(item), e.line};
    out.push_back(get_double(tmp));
  }
  if (expected != 0 && out.size() != expected) {
    fail(e.line, "key '" + e.key + "' expects " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

std::vector<int> ConfigDocument::get_ints(const ConfigEntry& e, std::size_t expected) const {
  std::vector<int> out;
  for (auto item : split_list(e.value)) {
    ConfigEntry tmp{e.key, std::string(item), e.line};
    out.push_back(get_int(tmp));
  }
  if (expected != 0 && out.size() != expected) {
    fail(e.line, "key '" + e.key + "' expects " + std::to_string(expected) + " comma-separated integers");
  }
  return out;
}

}  // namespace kvwave
