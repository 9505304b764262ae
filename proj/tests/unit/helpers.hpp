#pragma once

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "l1sq/cauchy.hpp"
#include "l1sq/error.hpp"
#include "l1sq/linalg.hpp"

#define CHECK_THROWS_CODE(expr, expected)               \
  do {                                                  \
    bool l1sq_thrown = false;                           \
    try {                                               \
      (void)(expr);                                     \
    } catch (const ::l1sq::Error& l1sq_err) {           \
      l1sq_thrown = true;                               \
      CHECK(l1sq_err.code() == (expected));             \
    }                                                   \
    CHECK_MESSAGE(l1sq_thrown, "expected l1sq::Error"); \
  } while (false)

namespace l1sq::test {

inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(Seed{seed});
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

inline Vector gaussian_vector(std::size_t dim, std::uint64_t seed) {
  Rng rng(Seed{seed});
  Vector v(dim);
  for (double& x : v.values()) x = rng.normal();
  return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace l1sq::test
