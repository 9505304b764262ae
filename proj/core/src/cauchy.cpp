#include "l1sq/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "l1sq/error.hpp"

namespace l1sq {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kDomainError, "Rng::below(0)");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::cauchy() {
  const double num = normal();
  double den = normal();
  while (std::abs(den) < kCauchyDenominatorFloor) den = normal();
  return num / den;
}

DenseMatrix sample_cauchy_matrix(std::size_t rows, std::size_t cols, Seed seed) {
  Rng rng(seed);
  std::vector<double> data(rows * cols);
  for (double& x : data) x = rng.cauchy();
  return DenseMatrix(rows, cols, std::move(data));
}

TailBounds half_cauchy_tail_bounds(double t) {
  if (!(t >= 1.0)) {
    throw Error(ErrorCode::kDomainError, "tail bounds require t >= 1");
  }
  return {t, 1.0 / (std::numbers::pi * t), 2.0 / (std::numbers::pi * t)};
}

double half_cauchy_exact_tail(double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::kDomainError, "tail requires t >= 0");
  if (t == 0.0) return 1.0;
  return 2.0 / std::numbers::pi * std::atan(1.0 / t);
}

double half_cauchy_cdf(double x) {
  if (x <= 0.0) return 0.0;
  return 2.0 / std::numbers::pi * std::atan(x);
}

double half_cauchy_quantile(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kDomainError, "quantile level must lie in [0, 1)");
  }
  return std::tan(std::numbers::pi * p / 2.0);
}

double half_cauchy_ks_statistic(std::vector<double>& samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = half_cauchy_cdf(samples[i]);
    sup = std::max(sup, std::max(static_cast<double>(i + 1) / n - f,
                                 f - static_cast<double>(i) / n));
  }
  return sup;
}

namespace {

// Linear-interpolated quantile of sorted data (type 7).
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

StabilityReport check_l1_stability(const Vector& v, std::size_t d, std::size_t trials,
                                   Seed seed) {
  const double norm = l1_norm(v);
  if (norm == 0.0) throw Error(ErrorCode::kZeroVector, "stability check needs v != 0");
  if (trials < 1000) throw Error(ErrorCode::kConfigInvalid, "trials must be >= 1000");
  if (d == 0) throw Error(ErrorCode::kConfigInvalid, "d must be >= 1");

  std::vector<double> ratios;
  ratios.reserve(d * trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const DenseMatrix p = sample_cauchy_matrix(d, v.dim(), derive_seed(seed, t));
    const Vector pv = matvec(p, v);
    for (double x : pv.values()) ratios.push_back(std::abs(x) / norm);
  }

  StabilityReport report;
  report.samples = ratios.size();
  report.l1_norm = norm;
  report.ks_statistic = half_cauchy_ks_statistic(ratios);  // sorts
  for (std::size_t i = 0; i < StabilityReport::kLevels.size(); ++i) {
    report.empirical_quantiles[i] = sorted_quantile(ratios, StabilityReport::kLevels[i]);
    report.reference_quantiles[i] = half_cauchy_quantile(StabilityReport::kLevels[i]);
  }
  report.median_ratio = report.empirical_quantiles[1];
  return report;
}

}  // namespace l1sq
