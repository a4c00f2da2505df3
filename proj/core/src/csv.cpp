#include "kvwave/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace kvwave {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

CsvTable::CsvTable(std::initializer_list<std::string_view> header) : columns_(header.size()) {
  bool first = true;
  for (auto h : header) {
    if (!first) out_ << ',';
    out_ << h;
    first = false;
  }
  out_ << '\n';
}

void CsvTable::separator() {
  if (pending_) {
    if (rows_ > 0 && column_ != columns_) throw std::logic_error("CSV row has wrong column count");
    if (rows_ > 0) out_ << '\n';
    pending_ = false;
    column_ = 0;
    ++rows_;
  }
  if (column_ > 0) out_ << ',';
  ++column_;
}

CsvTable& CsvTable::operator<<(double value) {
  separator();
  out_ << format_double(value);
  return *this;
}

CsvTable& CsvTable::operator<<(long long value) {
  separator();
  out_ << value;
  return *this;
}

CsvTable& CsvTable::operator<<(std::string_view text) {
  separator();
  out_ << text;
  return *this;
}

std::string CsvTable::str() const {
  std::string s = out_.str();
  if (rows_ > 0) s += '\n';
  return s;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace kvwave
