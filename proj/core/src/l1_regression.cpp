#include "l1sq/l1_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "l1sq/error.hpp"

namespace l1sq {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorCode::kConfigInvalid, "solver tol must be > 0");
  if (max_iter < 1) throw Error(ErrorCode::kConfigInvalid, "solver max_iter must be >= 1");
  if (!(mu > 1.0)) throw Error(ErrorCode::kConfigInvalid, "solver mu must be > 1");
  if (!(regularization >= 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "solver regularization must be >= 0");
  }
}

namespace {

// In-place Cholesky of a symmetric r x r matrix (row-major, lower triangle
// used). Returns false on a non-positive pivot.
bool cholesky(std::vector<double>& m, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = m[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= m[j * n + k] * m[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    d = std::sqrt(d);
    m[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= m[i * n + k] * m[j * n + k];
      m[i * n + j] = s / d;
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * b[k];
    b[i] = s / l[i * n + i];
  }
}

// A^T diag(w) A, r x r, accumulated row by row.
void weighted_gram(const DenseMatrix& a, const std::vector<double>& w,
                   std::vector<double>& out) {
  const std::size_t r = a.cols();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.row(i).data();
    const double wi = w.empty() ? 1.0 : w[i];
    for (std::size_t p = 0; p < r; ++p) {
      const double f = wi * row[p];
      for (std::size_t k = 0; k <= p; ++k) out[p * r + k] += f * row[k];
    }
  }
  for (std::size_t p = 0; p < r; ++p)
    for (std::size_t k = p + 1; k < r; ++k) out[p * r + k] = out[k * r + p];
}

void apply(const DenseMatrix& a, const std::vector<double>& x, std::vector<double>& out) {
  const std::size_t r = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.row(i).data();
    double s = 0.0;
    for (std::size_t k = 0; k < r; ++k) s += row[k] * x[k];
    out[i] = s;
  }
}

void apply_transposed(const DenseMatrix& a, const std::vector<double>& y,
                      std::vector<double>& out) {
  const std::size_t r = a.cols();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.row(i).data();
    const double yi = y[i];
    for (std::size_t k = 0; k < r; ++k) out[k] += row[k] * yi;
  }
}

double sq_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

struct Residuals {
  std::vector<double> dual_x;   // A^T (lambda1 - lambda2)
  std::vector<double> dual_u;   // 1 - lambda1 - lambda2
  std::vector<double> cent1;    // -lambda1 f1 - 1/tau
  std::vector<double> cent2;

  double norm2() const {
    return sq_norm(dual_x) + sq_norm(dual_u) + sq_norm(cent1) + sq_norm(cent2);
  }
};

// Constraint values f1 = -res - u, f2 = res - u with res = q - A x.
void constraint_values(const std::vector<double>& res, const std::vector<double>& u,
                       std::vector<double>& f1, std::vector<double>& f2) {
  for (std::size_t i = 0; i < res.size(); ++i) {
    f1[i] = -res[i] - u[i];
    f2[i] = res[i] - u[i];
  }
}

void residuals(const DenseMatrix& a, const std::vector<double>& f1,
               const std::vector<double>& f2, const std::vector<double>& l1,
               const std::vector<double>& l2, double tau, std::vector<double>& scratch,
               Residuals& out) {
  const std::size_t n = f1.size();
  for (std::size_t i = 0; i < n; ++i) scratch[i] = l1[i] - l2[i];
  apply_transposed(a, scratch, out.dual_x);
  for (std::size_t i = 0; i < n; ++i) {
    out.dual_u[i] = 1.0 - l1[i] - l2[i];
    out.cent1[i] = -l1[i] * f1[i] - 1.0 / tau;
    out.cent2[i] = -l2[i] * f2[i] - 1.0 / tau;
  }
}

}  // namespace

RegressionSolution solve_l1(const DenseMatrix& a_in, const Vector& q,
                            const SolverConfig& config) {
  config.validate();
  const std::size_t n = a_in.rows();
  const std::size_t r = a_in.cols();
  if (q.dim() != n) {
    throw Error(ErrorCode::kShapeMismatch, "solve_l1: A has " + std::to_string(n) +
                                               " rows, q has " + std::to_string(q.dim()));
  }
  if (r == 0 || n < r) throw Error(ErrorCode::kShapeMismatch, "solve_l1 requires D >= r >= 1");

  // Work on A / max|A| and q / max|q| so the barrier start is scale free.
  double a_scale = 0.0;
  for (double v : a_in.values()) a_scale = std::max(a_scale, std::abs(v));
  double q_scale = 0.0;
  for (double v : q.values()) q_scale = std::max(q_scale, std::abs(v));
  if (a_scale == 0.0) throw Error(ErrorCode::kNumericalBreakdown, "A is zero");
  if (q_scale == 0.0) q_scale = 1.0;
  std::vector<double> scaled(a_in.values().begin(), a_in.values().end());
  for (double& v : scaled) v /= a_scale;
  const DenseMatrix a(n, r, std::move(scaled));
  std::vector<double> qv(q.values().begin(), q.values().end());
  for (double& v : qv) v /= q_scale;

  // Gram factor, reused for the least-squares start and for projecting dual
  // iterates onto null(A^T).
  std::vector<double> gram(r * r);
  weighted_gram(a, {}, gram);
  for (std::size_t k = 0; k < r; ++k) gram[k * r + k] += config.regularization;
  if (!cholesky(gram, r)) {
    throw Error(ErrorCode::kNumericalBreakdown, "A^T A is not positive definite");
  }

  std::vector<double> x(r), ax(n), res(n), u(n), f1(n), f2(n), l1(n), l2(n);
  apply_transposed(a, qv, x);
  cholesky_solve(gram, r, x);
  apply(a, x, ax);
  for (std::size_t i = 0; i < n; ++i) {
    res[i] = qv[i] - ax[i];
    u[i] = std::abs(res[i]) + 1.0;
  }
  constraint_values(res, u, f1, f2);
  for (std::size_t i = 0; i < n; ++i) {
    l1[i] = -1.0 / f1[i];
    l2[i] = -1.0 / f2[i];
  }

  const double m = 2.0 * static_cast<double>(n);
  constexpr double kAlpha = 0.01;
  constexpr double kBeta = 0.5;

  std::vector<double> best_x = x;
  std::vector<double> best_res = res;
  double best_obj = l1_norm(res);
  double best_dual = -std::numeric_limits<double>::infinity();
  std::vector<double> best_nu(n, 0.0);

  std::vector<double> nu(n), tmp_r(r), scratch(n);
  auto certify = [&]() {
    for (std::size_t i = 0; i < n; ++i) nu[i] = l2[i] - l1[i];
    apply_transposed(a, nu, tmp_r);
    cholesky_solve(gram, r, tmp_r);
    apply(a, tmp_r, scratch);
    double inf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nu[i] -= scratch[i];
      inf = std::max(inf, std::abs(nu[i]));
    }
    const double scale = std::max(1.0, inf);
    double bound = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nu[i] /= scale;
      bound += qv[i] * nu[i];
    }
    if (bound > best_dual) {
      best_dual = bound;
      best_nu = nu;
    }
    const double obj = l1_norm(res);
    if (obj < best_obj) {
      best_obj = obj;
      best_x = x;
      best_res = res;
    }
  };

  Residuals cur{std::vector<double>(r), std::vector<double>(n), std::vector<double>(n),
                std::vector<double>(n)};
  Residuals trial = cur;

  std::vector<double> sig1(n), sig2(n), sum_s(n), diff_s(n), h(n), w2(n), g1(n), g2(n);
  std::vector<double> normal(r * r), dx(r), adx(n), du(n), dl1(n), dl2(n);
  std::vector<double> x_new(r), u_new(n), res_new(n), f1_new(n), f2_new(n), l1_new(n),
      l2_new(n);

  int iter = 0;
  bool converged = false;
  for (;; ++iter) {
    certify();
    const double gap = best_obj - best_dual;
    if (gap * q_scale <= config.tol * std::max(1.0, best_obj * q_scale)) {
      converged = true;
      break;
    }
    if (iter >= config.max_iter) break;

    double surrogate = 0.0;
    for (std::size_t i = 0; i < n; ++i) surrogate -= f1[i] * l1[i] + f2[i] * l2[i];
    const double tau = config.mu * m / surrogate;

    residuals(a, f1, f2, l1, l2, tau, scratch, cur);

    for (std::size_t i = 0; i < n; ++i) {
      sig1[i] = -l1[i] / f1[i];
      sig2[i] = -l2[i] / f2[i];
      sum_s[i] = sig1[i] + sig2[i];
      diff_s[i] = sig2[i] - sig1[i];
      h[i] = 4.0 * sig1[i] * sig2[i] / sum_s[i];
      g1[i] = cur.cent1[i] / f1[i];
      g2[i] = cur.cent2[i] / f2[i];
      w2[i] = -cur.dual_u[i] + g1[i] + g2[i];
    }
    // w1 = -r_dual_x - A^T (g1 - g2); rhs = w1 - A^T (diff_s * w2 / sum_s)
    for (std::size_t i = 0; i < n; ++i) {
      scratch[i] = g1[i] - g2[i] + diff_s[i] * w2[i] / sum_s[i];
    }
    apply_transposed(a, scratch, dx);
    for (std::size_t k = 0; k < r; ++k) dx[k] = -cur.dual_x[k] - dx[k];

    weighted_gram(a, h, normal);
    for (std::size_t k = 0; k < r; ++k) normal[k * r + k] += config.regularization;
    if (!cholesky(normal, r)) {
      throw Error(ErrorCode::kNumericalBreakdown,
                  "Newton system singular at iteration " + std::to_string(iter));
    }
    cholesky_solve(normal, r, dx);
    apply(a, dx, adx);
    for (std::size_t i = 0; i < n; ++i) {
      du[i] = (w2[i] - diff_s[i] * adx[i]) / sum_s[i];
      // Df1 dy = A dx - du, Df2 dy = -A dx - du
      dl1[i] = g1[i] + sig1[i] * (adx[i] - du[i]);
      dl2[i] = g2[i] + sig2[i] * (-adx[i] - du[i]);
    }

    double step = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (dl1[i] < 0.0) step = std::min(step, -l1[i] / dl1[i]);
      if (dl2[i] < 0.0) step = std::min(step, -l2[i] / dl2[i]);
    }
    step *= 0.99;

    const double cur_norm = std::sqrt(cur.norm2());
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= kBeta) {
      for (std::size_t k = 0; k < r; ++k) x_new[k] = x[k] + step * dx[k];
      bool feasible = true;
      for (std::size_t i = 0; i < n && feasible; ++i) {
        u_new[i] = u[i] + step * du[i];
        res_new[i] = res[i] - step * adx[i];
        f1_new[i] = -res_new[i] - u_new[i];
        f2_new[i] = res_new[i] - u_new[i];
        feasible = f1_new[i] < 0.0 && f2_new[i] < 0.0;
      }
      if (!feasible) continue;
      for (std::size_t i = 0; i < n; ++i) {
        l1_new[i] = l1[i] + step * dl1[i];
        l2_new[i] = l2[i] + step * dl2[i];
      }
      residuals(a, f1_new, f2_new, l1_new, l2_new, tau, scratch, trial);
      if (std::sqrt(trial.norm2()) <= (1.0 - kAlpha * step) * cur_norm) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    x.swap(x_new);
    u.swap(u_new);
    res.swap(res_new);
    f1.swap(f1_new);
    f2.swap(f2_new);
    l1.swap(l1_new);
    l2.swap(l2_new);
  }

  for (double& v : best_x) v *= q_scale / a_scale;
  for (double& v : best_res) v *= q_scale;
  RegressionSolution sol;
  sol.x_star = Vector(std::move(best_x));
  sol.residual = Vector(std::move(best_res));
  sol.objective = l1_norm(sol.residual);
  sol.iterations = iter;
  sol.converged = converged;
  sol.gap = std::max(0.0, sol.objective - best_dual * q_scale);
  sol.dual = Vector(std::move(best_nu));
  return sol;
}

namespace {

// Gaussian elimination with partial pivoting on an r x r system. Returns
// false when |det| falls below 1e-12 times the product of row norms.
bool solve_square(std::vector<double> m, std::vector<double>& b, std::size_t n) {
  double hadamard = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += m[i * n + j] * m[i * n + j];
    hadamard *= std::sqrt(s);
  }
  if (hadamard == 0.0) return false;
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m[i * n + k]) > std::abs(m[p * n + k])) p = i;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[p * n + j]);
      std::swap(b[k], b[p]);
      det = -det;
    }
    const double piv = m[k * n + k];
    det *= piv;
    if (piv == 0.0) return false;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m[i * n + k] / piv;
      for (std::size_t j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
      b[i] -= f * b[k];
    }
  }
  if (std::abs(det) < 1e-12 * hadamard) return false;
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= m[i * n + j] * b[j];
    b[i] = s / m[i * n + i];
  }
  return true;
}

}  // namespace

RegressionSolution solve_l1_oracle(const DenseMatrix& a, const Vector& q) {
  const std::size_t n = a.rows();
  const std::size_t r = a.cols();
  if (q.dim() != n) throw Error(ErrorCode::kShapeMismatch, "solve_l1_oracle shapes");
  if (n > kOracleMaxRows || r > kOracleMaxCols) {
    throw Error(ErrorCode::kInstanceTooLarge, "oracle limited to 16 x 4 designs");
  }
  if (r == 0 || n < r) throw Error(ErrorCode::kShapeMismatch, "oracle requires D >= r >= 1");

  std::vector<std::size_t> subset(r);
  for (std::size_t k = 0; k < r; ++k) subset[k] = k;

  bool found = false;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  std::vector<double> sub(r * r), rhs(r);
  for (;;) {
    for (std::size_t k = 0; k < r; ++k) {
      for (std::size_t j = 0; j < r; ++j) sub[k * r + j] = a(subset[k], j);
      rhs[k] = q[subset[k]];
    }
    if (solve_square(sub, rhs, r)) {
      double obj = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < r; ++j) ax += a(i, j) * rhs[j];
        obj += std::abs(q[i] - ax);
      }
      if (!found || obj < best - 1e-12 * std::max(1.0, best)) {
        found = true;
        best = obj;
        best_x = rhs;
      }
    }
    // Next r-subset in lexicographic order.
    std::size_t k = r;
    while (k > 0 && subset[k - 1] == n - r + k - 1) --k;
    if (k == 0) break;
    ++subset[k - 1];
    for (std::size_t j = k; j < r; ++j) subset[j] = subset[j - 1] + 1;
  }
  if (!found) throw Error(ErrorCode::kDegenerateDesign, "no nonsingular r-row subset");

  RegressionSolution sol;
  sol.x_star = Vector(best_x);
  sol.residual = q - matvec(a, sol.x_star);
  sol.objective = l1_norm(sol.residual);
  sol.converged = true;
  return sol;
}

double point_to_subspace_distance(const Vector& q, const Subspace& s,
                                  const SolverConfig& config) {
  if (q.dim() != s.ambient_dim()) {
    throw Error(ErrorCode::kShapeMismatch, "query and subspace dimensions differ");
  }
  return solve_l1(s.basis(), q, config).objective;
}

}  // namespace l1sq
