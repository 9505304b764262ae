#include "cli_support.hpp"

#include <charconv>
#include <cmath>
#include <iostream>

#include "l1sq/error.hpp"

namespace l1sq::cli {
namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
T parse_scalar(const std::string& text) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kConfigInvalid, "not a number: '" + text + "'");
  }
  return v;
}

struct RangeParts {
  std::string lo;
  std::string hi;
  std::string step;
};

bool split_range(const std::string& text, RangeParts& out) {
  const std::size_t dots = text.find("..");
  if (dots == std::string::npos) return false;
  out.lo = text.substr(0, dots);
  std::string rest = text.substr(dots + 2);
  const std::size_t colon = rest.find(':');
  if (colon != std::string::npos) {
    out.step = rest.substr(colon + 1);
    rest.resize(colon);
  }
  out.hi = rest;
  return true;
}

double round12(double v) { return std::round(v * 1e12) / 1e12; }

}  // namespace

std::vector<double> parse_real_range(const std::string& text, double default_step) {
  RangeParts parts;
  std::vector<double> out;
  if (split_range(text, parts)) {
    const double lo = parse_scalar<double>(parts.lo);
    const double hi = parse_scalar<double>(parts.hi);
    const double step = parts.step.empty() ? default_step : parse_scalar<double>(parts.step);
    if (!(step > 0.0) || hi < lo) throw Error(ErrorCode::kConfigInvalid, "bad range " + text);
    for (std::size_t i = 0;; ++i) {
      const double v = round12(lo + static_cast<double>(i) * step);
      if (v > hi + 1e-9 * std::max(1.0, std::abs(hi))) break;
      out.push_back(v);
    }
    return out;
  }
  for (const std::string& p : split(text, ',')) out.push_back(parse_scalar<double>(p));
  return out;
}

std::vector<std::size_t> parse_size_range(const std::string& text) {
  RangeParts parts;
  std::vector<std::size_t> out;
  if (split_range(text, parts)) {
    const auto lo = parse_scalar<std::size_t>(parts.lo);
    const auto hi = parse_scalar<std::size_t>(parts.hi);
    if (lo == 0 || hi < lo) throw Error(ErrorCode::kConfigInvalid, "bad range " + text);
    if (parts.step.empty()) {
      for (std::size_t v = lo; v <= hi; v *= 2) out.push_back(v);
    } else {
      const auto step = parse_scalar<std::size_t>(parts.step);
      if (step == 0) throw Error(ErrorCode::kConfigInvalid, "bad range step " + text);
      for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
    }
    return out;
  }
  for (const std::string& p : split(text, ',')) out.push_back(parse_scalar<std::size_t>(p));
  return out;
}

void emit_table(const CsvTable& table, const std::filesystem::path& out) {
  if (out.empty()) {
    write_csv(std::cout, table);
  } else {
    save_csv(out, table);
  }
}

}  // namespace l1sq::cli
