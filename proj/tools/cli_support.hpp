#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "l1sq/csv.hpp"

namespace l1sq::cli {

/// "a..b" steps arithmetically by `default_step` (or "a..b:step"); "x,y,z"
/// lists values; a single number is a one-element list. Values are rounded
/// to 12 decimals so 0.1 + 0.05 prints as 0.15.
std::vector<double> parse_real_range(const std::string& text, double default_step = 0.05);

/// "a..b" doubles from a up to b (or "a..b:step" adds step); "x,y,z" lists
/// values. Throws ConfigInvalid on malformed input.
std::vector<std::size_t> parse_size_range(const std::string& text);

/// Writes `table` to `out`, or to stdout when `out` is empty.
void emit_table(const CsvTable& table, const std::filesystem::path& out);

}  // namespace l1sq::cli
