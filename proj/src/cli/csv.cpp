#include "isac/cli/csv.hpp"

#include "isac/common.hpp"
#include "isac/format.hpp"

namespace isac::cli {
namespace {

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvCell::CsvCell(double v) : text_(format_shortest(v)) {}
CsvCell::CsvCell(const char* s) : text_(quoted(s)) {}
CsvCell::CsvCell(const std::string& s) : text_(quoted(s)) {}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path, std::ios::binary), columns_(header.size()), path_(path) {
  if (!out_) throw Error("cannot write '" + path.string() + "'");
  std::vector<CsvCell> cells(header.begin(), header.end());
  row(cells);
}

void CsvWriter::row(std::initializer_list<CsvCell> cells) { row(std::vector<CsvCell>(cells)); }

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_)
    throw InvalidParameter("csv: row of " + std::to_string(cells.size()) + " fields in '" + path_.string() +
                           "' with " + std::to_string(columns_) + " columns");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i].text();
  out_ << '\n';
  if (!out_) throw Error("write failed for '" + path_.string() + "'");
}

}  // namespace isac::cli
