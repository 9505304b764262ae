#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "l1sq/cauchy.hpp"
#include "l1sq/l1_regression.hpp"
#include "l1sq/linalg.hpp"
#include "l1sq/search.hpp"

namespace l1sq {

// ---------------------------------------------------------------------------
// Estimator container

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
};

/// 95% Wilson score interval (z = 1.959964) for successes out of trials.
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials,
                               double z = 1.959963984540054);

struct ProbeReport {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double p_hat = 0.0;
  WilsonInterval wilson;
  std::map<std::string, double> parameters;

  static ProbeReport from_counts(std::size_t successes, std::size_t trials);
};

// ---------------------------------------------------------------------------
// Synthetic databases and queries

struct Database {
  std::vector<Subspace> subspaces;
  std::vector<std::string> labels;
};

/// n subspaces, each the orthonormalized span of a D x r iid N(0,1) matrix.
Database make_database(std::size_t n, std::size_t ambient_dim, std::size_t rank, Seed seed,
                       std::size_t threads = 1);

struct CorruptedQuery {
  Vector query;
  Vector clean;         // B x / max|B x|
  std::size_t source = 0;
  std::vector<std::size_t> corrupted_entries;  // sorted
};

/// Picks a source subspace uniformly (unless `source` is given), draws
/// y = B x with x ~ N(0, I), divides by max|y_i|, then adds Uniform[-1, 1]
/// noise on round(theta * D) entries chosen without replacement.
CorruptedQuery make_query(const Database& db, double theta, Seed seed,
                          std::optional<std::size_t> source = std::nullopt);

struct Scenario {
  std::vector<Subspace> subspaces;
  std::vector<std::string> labels;
  Vector query;
  std::string true_label;
  double theta = 0.0;
  double eta = 1.0;
  std::string nearest_label;
  std::map<std::string, double> distances;  // exact ambient distances
  std::vector<std::size_t> corrupted_entries;
  Vector clean_query;
};

/// Fills eta, nearest_label and distances of `scenario` by exhaustive search.
void evaluate_scenario(Scenario& scenario, const SolverConfig& solver = {},
                       std::size_t threads = 1);

/// Database plus one corrupted query, fully evaluated. Requires n >= 2 and
/// 0 <= theta < 1 (ConfigInvalid otherwise).
Scenario make_scenario(std::size_t n, std::size_t ambient_dim, std::size_t rank, double theta,
                       Seed seed, const SolverConfig& solver = {}, std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Concentration and expansion probes

/// How ||P w||_1 is sampled. kStability draws ||w||_1 times a sum of d
/// half-Cauchy variables, which has exactly the law of ||P w||_1 for a single
/// fixed w; kFullMatrix materializes each d x D matrix.
enum class SamplingRoute { kStability, kFullMatrix };

/// Frequency of ||P w||_1 <= (2/pi) d log d ||w||_1. Parameters include
/// "product_lower_bound" = ((2/pi) atan((2/pi) log d))^d.
ProbeReport expansion_probability(const Vector& w, std::size_t d, std::size_t trials, Seed seed,
                                  SamplingRoute route = SamplingRoute::kStability);

/// d^(1-alpha) exp(-delta^2 d^alpha / (2 pi)).
double lower_tail_bound(std::size_t d, double alpha, double delta);

/// Frequency of ||P w||_1 < (1-alpha)(1-delta)(2/pi) d log d ||w||_1;
/// parameter "analytic_bound" holds lower_tail_bound(d, alpha, delta).
ProbeReport lower_tail_probability(std::size_t d, double alpha, double delta,
                                   std::size_t trials, Seed seed);

/// Frequency of sum_{i<=d} Phi_i <= (2/pi) beta d log d + 2d for iid half-Cauchy Phi.
ProbeReport lower_tail_tightness_probe(std::size_t d, double beta, std::size_t trials,
                                       Seed seed);

struct TightnessReport {
  double calibrated_c = 0.0;  // from the calibration Wilson lower bound, clamped at 0
  double proof_c = 0.0;       // 4 log 2 / pi, the constant the proof yields
  double calibrated_bound = 0.0;  // exp(-C d^(1-beta)) / (1 + log d)
  double proof_bound = 0.0;
  ProbeReport calibration;
  ProbeReport verification;
  bool holds = false;  // verification p_hat >= calibrated_bound and >= proof_bound
};

/// Calibrates the unspecified constant C of the lower-tail tightness bound
/// on one seed, then checks the bound on a fresh seed.
TightnessReport lower_tail_tightness(std::size_t d, double beta, std::size_t trials,
                                     Seed calibration_seed, Seed verification_seed);

struct LipschitzEstimate {
  double l_hat = 0.0;  // certified lower bound on sup ||Pw||_1 / ||w||_1 over S
  Vector argmax_coefficients;
};

/// Maximizes ||P w||_1 / ||w||_1 over every +-basis column plus `samples`
/// random directions w = B c in S (half Gaussian c, half Cauchy c).
LipschitzEstimate lipschitz_probe(const DenseMatrix& p, const Subspace& s, std::size_t samples,
                                  Seed seed);

/// min over B > 0 of 2d(r+1)/(pi B) + (2d/(pi t)) log sqrt(1 + B^2), where
/// the subspace has dimension r+1.
double lipschitz_tail_bound(std::size_t d, std::size_t r, double t);

/// Smallest t (to bisection accuracy) with lipschitz_tail_bound <= target.
double lipschitz_t_for_bound(std::size_t d, std::size_t r, double target);

/// Over `draws` fresh d x D Cauchy matrices, frequency of
/// L_hat(P) > t (r+1) for the (r+1)-dimensional subspace `s`.
ProbeReport lipschitz_bound_check(const Subspace& s, std::size_t d, double t, std::size_t draws,
                                  std::size_t samples, Seed seed);

// ---------------------------------------------------------------------------
// Success probability of the sketch-space argmin

struct ScenarioParams {
  std::size_t n = 100;
  std::size_t ambient_dim = 2000;
  std::size_t rank = 5;
  double theta = 0.05;
  std::size_t scenarios = 30;
};

/// Success iff the sketch-space argmin set meets the ambient argmin set.
/// Both sets collect every label within 1e-9 max(1, min) of the minimum.
bool sketch_preserves_nearest(const Scenario& scenario, const DenseMatrix& p,
                              const SolverConfig& solver = {});

/// For each d: `trials` fresh projections spread round-robin over the
/// scenarios; p_hat is the fraction that preserve the nearest subspace.
std::vector<ProbeReport> success_curve(const std::vector<Scenario>& scenarios,
                                       const std::vector<std::size_t>& d_list,
                                       std::size_t trials, Seed seed,
                                       const SolverConfig& solver = {}, std::size_t threads = 1);

std::vector<ProbeReport> success_curve(const ScenarioParams& params,
                                       const std::vector<std::size_t>& d_list,
                                       std::size_t trials, Seed seed,
                                       const SolverConfig& solver = {}, std::size_t threads = 1);

std::vector<Scenario> make_scenarios(const ScenarioParams& params, Seed seed,
                                     const SolverConfig& solver = {}, std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Elementary inequalities

struct ArctanSumCheck {
  bool holds = true;
  std::size_t first_failure = 0;  // 0 if none
  double min_slack = 0.0;         // min_k (sum_{j<=k} atan(1/j) - log(k+1))
};

/// Checks sum_{j=1}^k atan(1/j) >= log(k+1) for every k <= k_max.
ArctanSumCheck arctan_sum_check(std::size_t k_max);

}  // namespace l1sq
