#include "l1sq/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "l1sq/error.hpp"

namespace l1sq {

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) {
    throw Error(ErrorCode::kShapeMismatch, "CSV row width differs from header");
  }
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::kFormatError, "CSV has no column " + name);
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  return parse_number(rows.at(row).at(column(name)));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_number(std::size_t v) { return std::to_string(v); }

double parse_number(const std::string& text) {
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  if (text == "nan") return NAN;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kFormatError, "not a number: '" + text + "'");
  }
  return v;
}

namespace {

void write_cell(std::ostream& out, const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) {
    out << cell;
    return;
  }
  out.put('"');
  for (char c : cell) {
    if (c == '"') out.put('"');
    out.put(c);
  }
  out.put('"');
}

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out.put(',');
    write_cell(out, cells[i]);
  }
  out.put('\n');
}

// Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& cells) {
  cells.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string cell;
  bool quoted = false;
  for (;;) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw Error(ErrorCode::kFormatError, "CSV: unterminated quote");
      break;
    }
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          cell.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      cell.push_back(static_cast<char>(c));
    }
  }
  cells.push_back(std::move(cell));
  return true;
}

}  // namespace

void write_csv(std::ostream& out, const CsvTable& table) {
  write_line(out, table.header);
  for (const auto& row : table.rows) write_line(out, row);
  if (!out) throw Error(ErrorCode::kIoError, "failed writing CSV");
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  if (!read_record(in, table.header)) throw Error(ErrorCode::kFormatError, "CSV: no header");
  std::vector<std::string> row;
  while (read_record(in, row)) {
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::kFormatError,
                  "CSV line " + std::to_string(table.rows.size() + 2) + ": wrong width");
    }
    table.rows.push_back(row);
  }
  return table;
}

void save_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  write_csv(out, table);
}

CsvTable load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_csv(in);
}

}  // namespace l1sq
