#pragma once

#include "l1sq/linalg.hpp"

namespace l1sq {

struct SolverConfig {
  double tol = 1e-8;        // certified duality-gap target, relative to max(1, objective)
  int max_iter = 100;
  double mu = 10.0;         // barrier parameter growth factor
  double regularization = 1e-12;  // added to the normal-equations diagonal

  /// Throws ConfigInvalid on tol <= 0, max_iter < 1 or mu <= 1.
  void validate() const;
};

struct RegressionSolution {
  Vector x_star;
  Vector residual;        // q - A x_star
  double objective = 0.0; // ||residual||_1
  int iterations = 0;
  bool converged = false;
  double gap = 0.0;       // objective minus the best certified dual bound
  /// Dual certificate: ||dual||_inf <= 1, A^T dual = 0, so q^T dual is a
  /// lower bound on every feasible objective.
  Vector dual;
};

/// min_x ||q - A x||_1 through the epigraph LP
///   minimize 1^T t  subject to  -t <= q - A x <= t
/// solved with a primal-dual interior-point method. Each Newton step is
/// reduced to an r x r positive definite system, so one iteration costs
/// O(D r^2).
///
/// Never throws on hitting max_iter; the best iterate is returned with
/// converged == false. Throws ShapeMismatch on inconsistent shapes or
/// D < r, NumericalBreakdown if a Newton system cannot be factored.
RegressionSolution solve_l1(const DenseMatrix& a, const Vector& q,
                            const SolverConfig& config = {});

inline constexpr std::size_t kOracleMaxRows = 16;
inline constexpr std::size_t kOracleMaxCols = 4;

/// Enumerates every r-row subset with a nonsingular submatrix, interpolates q
/// on it and keeps the best l1 objective; ties go to the lexicographically
/// first subset. Some LP optimum is basic, so this is exact.
/// Throws InstanceTooLarge beyond 16 x 4, DegenerateDesign if no subset works.
RegressionSolution solve_l1_oracle(const DenseMatrix& a, const Vector& q);

/// d_l1(q, S) = min_{v in S} ||q - v||_1.
double point_to_subspace_distance(const Vector& q, const Subspace& s,
                                  const SolverConfig& config = {});

}  // namespace l1sq
