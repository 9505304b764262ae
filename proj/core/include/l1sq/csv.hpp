#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace l1sq {

/// Headed CSV table of string cells. Cells containing a comma, quote or
/// newline are quoted on output, with embedded quotes doubled.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws ShapeMismatch if the row width differs from the header.
  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;  // FormatError if absent
  double number(std::size_t row, const std::string& name) const;

  bool operator==(const CsvTable&) const = default;
};

/// Shortest round-trip decimal form ("inf", "-inf", "nan" for non-finite).
std::string format_number(double v);
std::string format_number(std::size_t v);
double parse_number(const std::string& text);

void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);
void save_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable load_csv(const std::filesystem::path& path);

}  // namespace l1sq
