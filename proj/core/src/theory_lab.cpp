#include "l1sq/theory_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "l1sq/error.hpp"
#include "l1sq/parallel.hpp"

namespace l1sq {

using std::numbers::pi;

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {std::min(lo, p), std::max(hi, p)};
}

ProbeReport ProbeReport::from_counts(std::size_t successes, std::size_t trials) {
  ProbeReport r;
  r.trials = trials;
  r.successes = successes;
  r.p_hat = trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
  r.wilson = wilson_interval(successes, trials);
  return r;
}

Database make_database(std::size_t n, std::size_t ambient_dim, std::size_t rank, Seed seed,
                       std::size_t threads) {
  std::vector<std::optional<Subspace>> slots(n);
  parallel_for(n, threads, [&](std::size_t i) {
    Rng rng(seed, i);
    DenseMatrix g(ambient_dim, rank);
    for (double& v : g.values()) v = rng.normal();
    slots[i] = orthonormalize(g);
  });
  Database db;
  db.labels = default_labels(n);
  db.subspaces.reserve(n);
  for (auto& s : slots) db.subspaces.push_back(std::move(*s));
  return db;
}

CorruptedQuery make_query(const Database& db, double theta, Seed seed,
                          std::optional<std::size_t> source) {
  if (db.subspaces.empty()) throw Error(ErrorCode::kEmptyDatabase, "empty database");
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "theta must lie in [0, 1)");
  }
  Rng rng(seed);
  CorruptedQuery out;
  out.source = source.value_or(rng.below(db.subspaces.size()));
  if (out.source >= db.subspaces.size()) {
    throw Error(ErrorCode::kConfigInvalid, "source index out of range");
  }
  const DenseMatrix& basis = db.subspaces[out.source].basis();
  Vector x(basis.cols());
  for (double& v : x.values()) v = rng.normal();
  Vector y = matvec(basis, x);
  double peak = 0.0;
  for (double v : y.values()) peak = std::max(peak, std::abs(v));
  y = (1.0 / peak) * y;
  out.clean = y;

  const std::size_t dim = y.dim();
  const auto count = static_cast<std::size_t>(std::llround(theta * static_cast<double>(dim)));
  std::vector<std::size_t> idx(dim);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t t = 0; t < count; ++t) {
    std::swap(idx[t], idx[t + rng.below(dim - t)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i : idx) {
    // A zero draw would leave the entry unchanged.
    double e = 0.0;
    while (e == 0.0) e = rng.uniform(-1.0, 1.0);
    y[i] += e;
  }
  out.corrupted_entries = std::move(idx);
  out.query = std::move(y);
  return out;
}

void evaluate_scenario(Scenario& scenario, const SolverConfig& solver, std::size_t threads) {
  ExhaustiveResult ex =
      exhaustive_search(scenario.subspaces, scenario.labels, scenario.query, solver, threads);
  scenario.nearest_label = ex.winner;
  scenario.distances = std::move(ex.distances);
  scenario.eta = distance_gap(scenario.distances).eta;
}

Scenario make_scenario(std::size_t n, std::size_t ambient_dim, std::size_t rank, double theta,
                       Seed seed, const SolverConfig& solver, std::size_t threads) {
  if (n < 2) throw Error(ErrorCode::kConfigInvalid, "scenario needs n >= 2");
  Database db = make_database(n, ambient_dim, rank, derive_seed(seed, 0), threads);
  CorruptedQuery q = make_query(db, theta, derive_seed(seed, 1));
  Scenario s;
  s.true_label = db.labels[q.source];
  s.subspaces = std::move(db.subspaces);
  s.labels = std::move(db.labels);
  s.query = std::move(q.query);
  s.clean_query = std::move(q.clean);
  s.corrupted_entries = std::move(q.corrupted_entries);
  s.theta = theta;
  evaluate_scenario(s, solver, threads);
  return s;
}

std::vector<Scenario> make_scenarios(const ScenarioParams& params, Seed seed,
                                     const SolverConfig& solver, std::size_t threads) {
  std::vector<Scenario> out;
  out.reserve(params.scenarios);
  for (std::size_t s = 0; s < params.scenarios; ++s) {
    out.push_back(make_scenario(params.n, params.ambient_dim, params.rank, params.theta,
                                derive_seed(seed, s), solver, threads));
  }
  return out;
}

namespace {

double d_log_d(std::size_t d) {
  const double dd = static_cast<double>(d);
  return 2.0 / pi * dd * std::log(dd);
}

double half_cauchy_sum(Rng& rng, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += rng.half_cauchy();
  return s;
}

// Counts trials whose event fires; trial t owns stream derive_seed(seed, t).
template <class Event>
std::size_t count_events(std::size_t trials, Seed seed, Event&& event) {
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    if (event(rng)) ++hits;
  }
  return hits;
}

}  // namespace

ProbeReport expansion_probability(const Vector& w, std::size_t d, std::size_t trials, Seed seed,
                                  SamplingRoute route) {
  if (d < 2) throw Error(ErrorCode::kConfigInvalid, "expansion probe needs d >= 2");
  const double norm = l1_norm(w);
  if (norm == 0.0) throw Error(ErrorCode::kZeroVector, "expansion probe needs w != 0");
  const double threshold = d_log_d(d) * norm;

  std::size_t hits = 0;
  if (route == SamplingRoute::kStability) {
    hits = count_events(trials, seed, [&](Rng& rng) {
      return norm * half_cauchy_sum(rng, d) <= threshold;
    });
  } else {
    for (std::size_t t = 0; t < trials; ++t) {
      const DenseMatrix p = sample_cauchy_matrix(d, w.dim(), derive_seed(seed, t));
      if (l1_norm(matvec(p, w)) <= threshold) ++hits;
    }
  }
  ProbeReport r = ProbeReport::from_counts(hits, trials);
  const double dd = static_cast<double>(d);
  r.parameters["d"] = dd;
  r.parameters["w_l1"] = norm;
  r.parameters["threshold"] = threshold;
  r.parameters["product_lower_bound"] =
      std::pow(2.0 / pi * std::atan(2.0 / pi * std::log(dd)), dd);
  return r;
}

double lower_tail_bound(std::size_t d, double alpha, double delta) {
  const double dd = static_cast<double>(d);
  return std::pow(dd, 1.0 - alpha) *
         std::exp(-delta * delta * std::pow(dd, alpha) / (2.0 * pi));
}

ProbeReport lower_tail_probability(std::size_t d, double alpha, double delta,
                                   std::size_t trials, Seed seed) {
  if (d < 2) throw Error(ErrorCode::kConfigInvalid, "lower tail probe needs d >= 2");
  if (!(alpha > 0.0 && alpha < 1.0 && delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "alpha and delta must lie in (0, 1)");
  }
  const double threshold = (1.0 - alpha) * (1.0 - delta) * d_log_d(d);
  const std::size_t hits = count_events(
      trials, seed, [&](Rng& rng) { return half_cauchy_sum(rng, d) < threshold; });
  ProbeReport r = ProbeReport::from_counts(hits, trials);
  r.parameters["d"] = static_cast<double>(d);
  r.parameters["alpha"] = alpha;
  r.parameters["delta"] = delta;
  r.parameters["threshold"] = threshold;
  r.parameters["analytic_bound"] = lower_tail_bound(d, alpha, delta);
  return r;
}

ProbeReport lower_tail_tightness_probe(std::size_t d, double beta, std::size_t trials,
                                       Seed seed) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::kConfigInvalid, "beta in (0, 1)");
  const double dd = static_cast<double>(d);
  if (std::pow(dd, beta) < 2.0) throw Error(ErrorCode::kConfigInvalid, "need d^beta >= 2");
  const double threshold = beta * d_log_d(d) + 2.0 * dd;
  const std::size_t hits = count_events(
      trials, seed, [&](Rng& rng) { return half_cauchy_sum(rng, d) <= threshold; });
  ProbeReport r = ProbeReport::from_counts(hits, trials);
  r.parameters["d"] = dd;
  r.parameters["beta"] = beta;
  r.parameters["threshold"] = threshold;
  return r;
}

TightnessReport lower_tail_tightness(std::size_t d, double beta, std::size_t trials,
                                     Seed calibration_seed, Seed verification_seed) {
  TightnessReport out;
  out.calibration = lower_tail_tightness_probe(d, beta, trials, calibration_seed);
  out.verification = lower_tail_tightness_probe(d, beta, trials, verification_seed);
  const double dd = static_cast<double>(d);
  const double scale = std::pow(dd, 1.0 - beta);
  const double log_factor = 1.0 + std::log(dd);
  const double lo = std::max(out.calibration.wilson.lo, std::numeric_limits<double>::min());
  out.calibrated_c = std::max(0.0, -std::log(lo * log_factor) / scale);
  out.proof_c = 4.0 * std::numbers::ln2 / pi;
  out.calibrated_bound = std::exp(-out.calibrated_c * scale) / log_factor;
  out.proof_bound = std::exp(-out.proof_c * scale) / log_factor;
  out.holds = out.verification.p_hat >= out.calibrated_bound &&
              out.verification.p_hat >= out.proof_bound;
  return out;
}

LipschitzEstimate lipschitz_probe(const DenseMatrix& p, const Subspace& s, std::size_t samples,
                                  Seed seed) {
  const DenseMatrix& basis = s.basis();
  if (p.cols() != basis.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "projection and subspace dimensions differ");
  }
  const std::size_t k = basis.cols();
  const DenseMatrix pb = matmul(p, basis);

  LipschitzEstimate est;
  est.argmax_coefficients = Vector(k);
  Vector c(k);
  auto consider = [&] {
    const double den = l1_norm(matvec(basis, c));
    if (den == 0.0) return;
    const double ratio = l1_norm(matvec(pb, c)) / den;
    if (ratio > est.l_hat) {
      est.l_hat = ratio;
      est.argmax_coefficients = c;
    }
  };
  for (std::size_t j = 0; j < k; ++j) {
    std::fill(c.values().begin(), c.values().end(), 0.0);
    c[j] = 1.0;
    consider();
  }
  Rng rng(seed);
  for (std::size_t t = 0; t < samples; ++t) {
    const bool heavy = t % 2 == 1;
    for (double& v : c.values()) v = heavy ? rng.cauchy() : rng.normal();
    consider();
  }
  return est;
}

double lipschitz_tail_bound(std::size_t d, std::size_t r, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::kDomainError, "t must be > 0");
  const double a = 2.0 * static_cast<double>(d) * static_cast<double>(r + 1) / pi;
  const double b = 2.0 * static_cast<double>(d) / (pi * t);
  // Stationary point: b B^3 - a B^2 - a = 0 has exactly one positive root.
  auto cubic = [&](double x) { return b * x * x * x - a * x * x - a; };
  double lo = 0.0;
  double hi = 1.0;
  while (cubic(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cubic(mid) < 0.0 ? lo : hi) = mid;
  }
  const double best = 0.5 * (lo + hi);
  return a / best + b * 0.5 * std::log1p(best * best);
}

double lipschitz_t_for_bound(std::size_t d, std::size_t r, double target) {
  if (!(target > 0.0)) throw Error(ErrorCode::kDomainError, "target must be > 0");
  double lo = 1e-6;
  double hi = 1.0;
  while (lipschitz_tail_bound(d, r, hi) > target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lipschitz_tail_bound(d, r, mid) > target ? lo : hi) = mid;
  }
  return hi;
}

ProbeReport lipschitz_bound_check(const Subspace& s, std::size_t d, double t, std::size_t draws,
                                  std::size_t samples, Seed seed) {
  const std::size_t r = s.rank() - 1;
  const double limit = t * static_cast<double>(r + 1);
  std::size_t hits = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    const DenseMatrix p = sample_cauchy_matrix(d, s.ambient_dim(), derive_seed(seed, 2 * k));
    const double l_hat = lipschitz_probe(p, s, samples, derive_seed(seed, 2 * k + 1)).l_hat;
    worst = std::max(worst, l_hat);
    if (l_hat > limit) ++hits;
  }
  ProbeReport rep = ProbeReport::from_counts(hits, draws);
  rep.parameters["d"] = static_cast<double>(d);
  rep.parameters["r"] = static_cast<double>(r);
  rep.parameters["t"] = t;
  rep.parameters["analytic_bound"] = lipschitz_tail_bound(d, r, t);
  rep.parameters["max_l_hat"] = worst;
  return rep;
}

namespace {

std::vector<std::size_t> near_minimizers(const std::vector<double>& dist) {
  const double m = *std::min_element(dist.begin(), dist.end());
  const double slack = 1e-9 * std::max(1.0, m);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist[i] <= m + slack) out.push_back(i);
  return out;
}

}  // namespace

bool sketch_preserves_nearest(const Scenario& scenario, const DenseMatrix& p,
                              const SolverConfig& solver) {
  const std::size_t n = scenario.subspaces.size();
  std::vector<double> ambient(n);
  for (std::size_t i = 0; i < n; ++i) ambient[i] = scenario.distances.at(scenario.labels[i]);

  const Vector pq = matvec(p, scenario.query);
  std::vector<double> sketched(n);
  for (std::size_t i = 0; i < n; ++i) {
    sketched[i] = solve_l1(matmul(p, scenario.subspaces[i].basis()), pq, solver).objective;
  }
  const auto want = near_minimizers(ambient);
  for (std::size_t i : near_minimizers(sketched)) {
    if (std::find(want.begin(), want.end(), i) != want.end()) return true;
  }
  return false;
}

std::vector<ProbeReport> success_curve(const std::vector<Scenario>& scenarios,
                                       const std::vector<std::size_t>& d_list,
                                       std::size_t trials, Seed seed,
                                       const SolverConfig& solver, std::size_t threads) {
  if (d_list.empty()) throw Error(ErrorCode::kConfigInvalid, "d_list is empty");
  if (scenarios.empty()) throw Error(ErrorCode::kConfigInvalid, "no scenarios");
  std::vector<ProbeReport> out;
  for (std::size_t di = 0; di < d_list.size(); ++di) {
    const std::size_t d = d_list[di];
    const Seed d_seed = derive_seed(seed, d);
    std::vector<char> ok(trials, 0);
    parallel_for(trials, threads, [&](std::size_t t) {
      const Scenario& sc = scenarios[t % scenarios.size()];
      const DenseMatrix p = sample_cauchy_matrix(d, sc.query.dim(), derive_seed(d_seed, t));
      ok[t] = sketch_preserves_nearest(sc, p, solver) ? 1 : 0;
    });
    const auto hits = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
    ProbeReport r = ProbeReport::from_counts(hits, trials);
    std::vector<double> etas;
    for (const Scenario& sc : scenarios) etas.push_back(sc.eta);
    std::sort(etas.begin(), etas.end());
    r.parameters["d"] = static_cast<double>(d);
    r.parameters["theta"] = scenarios.front().theta;
    r.parameters["scenarios"] = static_cast<double>(scenarios.size());
    r.parameters["median_eta"] = etas[etas.size() / 2];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ProbeReport> success_curve(const ScenarioParams& params,
                                       const std::vector<std::size_t>& d_list,
                                       std::size_t trials, Seed seed,
                                       const SolverConfig& solver, std::size_t threads) {
  const std::vector<Scenario> scenarios =
      make_scenarios(params, derive_seed(seed, 0x5ce7a210), solver, threads);
  return success_curve(scenarios, d_list, trials, seed, solver, threads);
}

ArctanSumCheck arctan_sum_check(std::size_t k_max) {
  if (k_max < 1) throw Error(ErrorCode::kConfigInvalid, "k_max must be >= 1");
  ArctanSumCheck out;
  out.min_slack = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    sum += std::atan(1.0 / static_cast<double>(k));
    const double slack = sum - std::log1p(static_cast<double>(k));
    out.min_slack = std::min(out.min_slack, slack);
    if (slack < 0.0 && out.holds) {
      out.holds = false;
      out.first_failure = k;
    }
  }
  return out;
}

}  // namespace l1sq
