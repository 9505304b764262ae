#include <numbers>

#include "helpers.hpp"

using namespace l1sq;
using std::numbers::pi;

namespace {

double median_abs(std::span<const double> values) {
  std::vector<double> a;
  for (double v : values) a.push_back(std::abs(v));
  std::nth_element(a.begin(), a.begin() + a.size() / 2, a.end());
  return a[a.size() / 2];
}

}  // namespace

TEST_SUITE("cauchy_sampling") {
  TEST_CASE("seed derivation is deterministic and spreads streams") {
    CHECK(derive_seed(Seed{1}, 0) == derive_seed(Seed{1}, 0));
    CHECK(derive_seed(Seed{1}, 0) != derive_seed(Seed{1}, 1));
    CHECK(derive_seed(Seed{1}, 0) != derive_seed(Seed{2}, 0));
    // Reference SplitMix64 output for state 0.
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
  }

  TEST_CASE("Rng streams are reproducible") {
    Rng a(Seed{42}), b(Seed{42});
    for (int i = 0; i < 100; ++i) {
      CHECK(a.normal() == b.normal());
      CHECK(a.cauchy() == b.cauchy());
      CHECK(a.below(17) == b.below(17));
    }
    Rng c(Seed{5});
    for (int i = 0; i < 1000; ++i) {
      const auto k = c.below(7);
      CHECK(k < 7);
      const double u = c.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
    CHECK_THROWS_CODE(c.below(0), ErrorCode::kDomainError);
  }

  TEST_CASE("normal generator has unit variance") {
    Rng rng(Seed{3});
    double s = 0.0, s2 = 0.0;
    constexpr int kN = 200000;
    for (int i = 0; i < kN; ++i) {
      const double x = rng.normal();
      s += x;
      s2 += x * x;
    }
    CHECK(std::abs(s / kN) < 0.01);
    CHECK(std::abs(s2 / kN - 1.0) < 0.02);
  }

  TEST_CASE("sample_cauchy_matrix is a pure function of its arguments") {
    const DenseMatrix a = sample_cauchy_matrix(20, 30, Seed{9});
    const DenseMatrix b = sample_cauchy_matrix(20, 30, Seed{9});
    CHECK(a == b);
    CHECK(a.rows() == 20);
    CHECK(a.cols() == 30);
    CHECK(sample_cauchy_matrix(20, 30, Seed{10}) != a);
    for (double v : a.values()) CHECK(std::isfinite(v));
  }

  TEST_CASE("Cauchy matrix median and tail") {
    const DenseMatrix m = sample_cauchy_matrix(100, 100, Seed{1234});
    const double med = median_abs(m.values());
    CHECK(med >= 0.9);
    CHECK(med <= 1.1);

    const DenseMatrix t = sample_cauchy_matrix(50, 200, Seed{77});
    const double n = static_cast<double>(t.size());
    double hits = 0.0;
    for (double v : t.values()) hits += std::abs(v) >= 10.0 ? 1.0 : 0.0;
    const double p = hits / n;
    const TailBounds b = half_cauchy_tail_bounds(10.0);
    const double se = std::sqrt(b.upper * (1.0 - b.upper) / n);
    CHECK(p >= b.lower - 3.0 * se);
    CHECK(p <= b.upper + 3.0 * se);
  }

  TEST_CASE("tail bounds") {
    const TailBounds b1 = half_cauchy_tail_bounds(1.0);
    CHECK(b1.lower == doctest::Approx(1.0 / pi));
    CHECK(b1.upper == doctest::Approx(2.0 / pi));
    CHECK(b1.lower == doctest::Approx(0.3183).epsilon(1e-4));
    CHECK(b1.upper == doctest::Approx(0.6366).epsilon(1e-4));
    const TailBounds b2 = half_cauchy_tail_bounds(2.0);
    CHECK(b2.lower == doctest::Approx(1.0 / (2.0 * pi)));
    CHECK(b2.upper == doctest::Approx(1.0 / pi));
    for (double t : {1.0, 2.0, 5.0, 10.0, 100.0}) {
      const TailBounds b = half_cauchy_tail_bounds(t);
      const double exact = half_cauchy_exact_tail(t);
      CHECK(b.t == t);
      CHECK(b.lower <= exact);
      CHECK(exact <= b.upper);
    }
    CHECK_THROWS_CODE(half_cauchy_tail_bounds(0.5), ErrorCode::kDomainError);
  }

  TEST_CASE("exact tail") {
    CHECK(half_cauchy_exact_tail(0.0) == 1.0);
    CHECK(half_cauchy_exact_tail(1.0) == doctest::Approx(0.5));
    double prev = 1.0;
    for (double t = 0.25; t < 50.0; t *= 1.5) {
      const double cur = half_cauchy_exact_tail(t);
      CHECK(cur < prev);
      prev = cur;
      if (t >= 1.0) {
        const TailBounds b = half_cauchy_tail_bounds(t);
        CHECK(cur >= b.lower);
        CHECK(cur <= b.upper);
      }
    }
    CHECK(half_cauchy_cdf(1.0) == doctest::Approx(0.5));
    CHECK(half_cauchy_quantile(0.75) == doctest::Approx(std::tan(3.0 * pi / 8.0)));
    CHECK(half_cauchy_cdf(half_cauchy_quantile(0.3)) == doctest::Approx(0.3));

    Rng rng(Seed{2024});
    constexpr int kN = 1'000'000;
    int hits = 0;
    for (int i = 0; i < kN; ++i) hits += rng.half_cauchy() >= 10.0 ? 1 : 0;
    const double p = static_cast<double>(hits) / kN;
    const double exact = half_cauchy_exact_tail(10.0);
    CHECK(std::abs(p - exact) <= 3.0 * std::sqrt(exact * (1.0 - exact) / kN));
  }

  TEST_CASE("stability of Pv") {
    Vector e1(8);
    e1[0] = 1.0;
    const StabilityReport one_hot = check_l1_stability(e1, 10, 10000, Seed{1});
    CHECK(one_hot.samples == 100000);
    CHECK(one_hot.median_ratio >= 0.97);
    CHECK(one_hot.median_ratio <= 1.03);

    const Vector v5{2.0, -1.5, 1.0, 0.5};
    const StabilityReport five = check_l1_stability(v5, 10, 2000, Seed{2});
    CHECK(five.l1_norm == 5.0);
    CHECK(five.median_ratio * 5.0 >= 4.85);
    CHECK(five.median_ratio * 5.0 <= 5.15);

    const Vector dense = l1sq::test::gaussian_vector(30, 3);
    const StabilityReport rep = check_l1_stability(dense, 100, 1000, Seed{4});
    CHECK(rep.reference_quantiles[2] == doctest::Approx(2.414).epsilon(1e-3));
    CHECK(std::abs(rep.empirical_quantiles[2] / rep.reference_quantiles[2] - 1.0) < 0.05);
    // Two-sided KS critical value at level 0.001 is 1.949 / sqrt(n).
    CHECK(rep.ks_statistic < 1.949 / std::sqrt(static_cast<double>(rep.samples)));

    CHECK_THROWS_CODE(check_l1_stability(Vector(4), 10, 1000, Seed{1}), ErrorCode::kZeroVector);
    CHECK_THROWS_CODE(check_l1_stability(v5, 10, 999, Seed{1}), ErrorCode::kConfigInvalid);
  }

  TEST_CASE("KS statistic of exact quantiles is small") {
    std::vector<double> exact;
    for (int i = 0; i < 1000; ++i) exact.push_back(half_cauchy_quantile((i + 0.5) / 1000.0));
    CHECK(half_cauchy_ks_statistic(exact) <= 0.0005 + 1e-12);
    std::vector<double> shifted = exact;
    for (double& x : shifted) x *= 2.0;
    CHECK(half_cauchy_ks_statistic(shifted) > 0.1);
  }
}
