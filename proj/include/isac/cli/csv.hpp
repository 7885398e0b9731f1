#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace isac::cli {

/// One CSV field. Doubles use the shortest decimal that round-trips.
class CsvCell {
 public:
  CsvCell(double v);
  CsvCell(int v) : text_(std::to_string(v)) {}
  CsvCell(long v) : text_(std::to_string(v)) {}
  CsvCell(long long v) : text_(std::to_string(v)) {}
  CsvCell(unsigned v) : text_(std::to_string(v)) {}
  CsvCell(unsigned long v) : text_(std::to_string(v)) {}
  CsvCell(unsigned long long v) : text_(std::to_string(v)) {}
  CsvCell(const char* s);
  CsvCell(const std::string& s);

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  void row(std::initializer_list<CsvCell> cells);
  void row(const std::vector<CsvCell>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

}  // namespace isac::cli
