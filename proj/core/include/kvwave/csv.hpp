#pragma once

#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

namespace kvwave {

/// Shortest-safe text for a double: 17 significant digits.
std::string format_double(double value);

/// In-memory CSV table with `\n` line endings.
class CsvTable {
 public:
  explicit CsvTable(std::initializer_list<std::string_view> header);

  CsvTable& row() { pending_ = true; return *this; }
  CsvTable& operator<<(double value);
  CsvTable& operator<<(long long value);
  CsvTable& operator<<(int value) { return *this << static_cast<long long>(value); }
  CsvTable& operator<<(std::string_view text);

  std::string str() const;
  std::size_t rows() const { return rows_; }

 private:
  void separator();

  std::ostringstream out_;
  std::size_t columns_ = 0;
  std::size_t column_ = 0;
  std::size_t rows_ = 0;
  bool pending_ = false;
};

/// Writes `content` to a sibling temporary file and renames it onto `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace kvwave
