#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "l1sq/linalg.hpp"

namespace l1sq {

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(const Seed&, const Seed&) = default;
};

/// SplitMix64 finalizer; used to derive decorrelated stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed for substream `stream_id` of `master`. Distinct (master, id) pairs map
/// to statistically independent generators.
constexpr Seed derive_seed(Seed master, std::uint64_t stream_id) noexcept {
  return Seed{splitmix64(splitmix64(master.value) ^ splitmix64(~stream_id))};
}

/// Random stream seeded from a Seed. Normal variates use the Marsaglia polar
/// method on top of mt19937_64 so the stream is identical across standard
/// libraries (std::normal_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed.value) {}
  Rng(Seed master, std::uint64_t stream_id) : Rng(derive_seed(master, stream_id)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  double normal();
  /// Standard Cauchy as the ratio of two standard normals; denominators with
  /// magnitude below kCauchyDenominatorFloor are redrawn.
  double cauchy();
  double half_cauchy() { return std::abs(cauchy()); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline constexpr double kCauchyDenominatorFloor = 1e-300;

/// d x D matrix of iid standard Cauchy entries; a pure function of its inputs.
DenseMatrix sample_cauchy_matrix(std::size_t rows, std::size_t cols, Seed seed);

struct TailBounds {
  double t;
  double lower;  // 1/(pi t)
  double upper;  // 2/(pi t)
};

/// Two-sided bound on P[X >= t] for X half-Cauchy, valid for t >= 1.
/// Throws DomainError when t < 1.
TailBounds half_cauchy_tail_bounds(double t);

/// P[X >= t] = (2/pi) atan(1/t) for half-Cauchy X; equals 1 at t = 0.
double half_cauchy_exact_tail(double t);
/// F(x) = (2/pi) atan(x).
double half_cauchy_cdf(double x);
/// Inverse CDF tan(pi p / 2).
double half_cauchy_quantile(double p);

struct StabilityReport {
  std::size_t samples = 0;
  double l1_norm = 0.0;
  double median_ratio = 0.0;  // median |(Pv)_i| / ||v||_1
  static constexpr std::array<double, 4> kLevels = {0.25, 0.5, 0.75, 0.9};
  std::array<double, 4> empirical_quantiles{};  // of |(Pv)_i| / ||v||_1
  std::array<double, 4> reference_quantiles{};  // tan(pi p / 2)
  double ks_statistic = 0.0;                    // sup |F_n - F|
};

/// Draws `trials` independent d x D Cauchy matrices, pools all d*trials
/// entries of Pv and compares |(Pv)_i| / ||v||_1 with the half-Cauchy law.
/// Throws ZeroVector for v == 0 and ConfigInvalid for trials < 1000.
StabilityReport check_l1_stability(const Vector& v, std::size_t d, std::size_t trials,
                                   Seed seed);

/// Sup-norm distance between the empirical CDF of `samples` and the
/// half-Cauchy CDF. Sorts `samples` in place.
double half_cauchy_ks_statistic(std::vector<double>& samples);

}  // namespace l1sq
