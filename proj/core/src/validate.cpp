#include "l1sq/validate.hpp"

#include <algorithm>
#include <cmath>

#include "l1sq/error.hpp"
#include "l1sq/parallel.hpp"

namespace l1sq {

CsvTable probe_table(const std::vector<ProbeReport>& reports,
                     const std::vector<std::string>& parameter_keys) {
  CsvTable t;
  t.header = parameter_keys;
  for (const char* c : {"trials", "successes", "p_hat", "wilson_lo", "wilson_hi"}) {
    t.header.emplace_back(c);
  }
  for (const ProbeReport& r : reports) {
    std::vector<std::string> row;
    for (const std::string& key : parameter_keys) {
      const auto it = r.parameters.find(key);
      row.push_back(it == r.parameters.end() ? "" : format_number(it->second));
    }
    row.push_back(format_number(r.trials));
    row.push_back(format_number(r.successes));
    row.push_back(format_number(r.p_hat));
    row.push_back(format_number(r.wilson.lo));
    row.push_back(format_number(r.wilson.hi));
    t.add_row(std::move(row));
  }
  return t;
}

RegressionInstance random_regression_instance(Seed seed) {
  Rng rng(seed);
  const std::size_t D = 6 + rng.below(7);
  const std::size_t r = 1 + rng.below(3);
  DenseMatrix a(D, r);
  for (double& v : a.values()) v = rng.normal();
  Vector x(r);
  for (double& v : x.values()) v = rng.normal();
  Vector q = matvec(a, x);
  for (std::size_t i = 0; i < D; ++i) {
    if (rng.uniform() < 0.5) q[i] += rng.normal();
  }
  return {std::move(a), std::move(q)};
}

std::vector<OracleComparison> oracle_equivalence(std::size_t instances, Seed seed,
                                                 const SolverConfig& solver) {
  std::vector<OracleComparison> out;
  for (std::size_t i = 0; i < instances; ++i) {
    const RegressionInstance inst = random_regression_instance(derive_seed(seed, i));
    const RegressionSolution ipm = solve_l1(inst.a, inst.q, solver);
    const RegressionSolution ref = solve_l1_oracle(inst.a, inst.q);
    OracleComparison c;
    c.D = inst.a.rows();
    c.r = inst.a.cols();
    c.ipm_objective = ipm.objective;
    c.oracle_objective = ref.objective;
    c.relative_error =
        std::abs(ipm.objective - ref.objective) / std::max(1.0, std::abs(ref.objective));
    c.converged = ipm.converged;
    out.push_back(c);
  }
  return out;
}

namespace {

SuiteResult oracle_suite(const ValidateConfig& cfg) {
  SuiteResult s{"oracle", true, "", {}};
  s.table.header = {"instance", "D", "r", "ipm_objective", "oracle_objective", "relative_error"};
  double worst = 0.0;
  const auto rows = oracle_equivalence(200, derive_seed(cfg.seed, 1), cfg.solver);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const OracleComparison& c = rows[i];
    worst = std::max(worst, c.relative_error);
    s.table.add_row({format_number(i), format_number(c.D), format_number(c.r),
                     format_number(c.ipm_objective), format_number(c.oracle_objective),
                     format_number(c.relative_error)});
  }
  s.passed = worst <= 1e-6;
  s.summary = "max relative error " + format_number(worst);
  return s;
}

SuiteResult median_suite(const ValidateConfig& cfg) {
  SuiteResult s{"median", true, "", {}};
  s.table.header = {"instance", "D", "x", "sample_median", "abs_error"};
  double worst = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    Rng rng(derive_seed(cfg.seed, 2), i);
    const std::size_t D = 5 + 2 * rng.below(6);
    Vector q(D);
    for (double& v : q.values()) v = rng.normal();
    const DenseMatrix ones(D, 1, 1.0);
    const double x = solve_l1(ones, q, cfg.solver).x_star[0];
    std::vector<double> sorted(q.values().begin(), q.values().end());
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[D / 2];
    worst = std::max(worst, std::abs(x - med));
    s.table.add_row({format_number(i), format_number(D), format_number(x), format_number(med),
                     format_number(std::abs(x - med))});
  }
  s.passed = worst <= 1e-6;
  s.summary = "max |x - median| " + format_number(worst);
  return s;
}

SuiteResult stability_suite(const ValidateConfig& cfg) {
  SuiteResult s{"stability", true, "", {}};
  Rng rng(derive_seed(cfg.seed, 3));
  Vector v(20);
  for (double& x : v.values()) x = rng.normal();
  const StabilityReport rep = check_l1_stability(v, 100, 1000, derive_seed(cfg.seed, 4));
  s.table.header = {"level", "empirical_quantile", "reference_quantile"};
  for (std::size_t i = 0; i < rep.kLevels.size(); ++i) {
    s.table.add_row({format_number(rep.kLevels[i]), format_number(rep.empirical_quantiles[i]),
                     format_number(rep.reference_quantiles[i])});
  }
  s.table.add_row({"ks", format_number(rep.ks_statistic), "0"});
  s.passed = rep.ks_statistic < 0.01;
  s.summary = "KS " + format_number(rep.ks_statistic) + " over " +
              format_number(rep.samples) + " samples";
  return s;
}

SuiteResult tail_suite(const ValidateConfig& cfg) {
  SuiteResult s{"tail", true, "", {}};
  constexpr std::size_t kSamples = 1'000'000;
  const double ts[] = {1.0, 2.0, 5.0, 10.0};
  std::size_t hits[4] = {0, 0, 0, 0};
  Rng rng(derive_seed(cfg.seed, 5));
  for (std::size_t i = 0; i < kSamples; ++i) {
    const double x = rng.half_cauchy();
    for (int j = 0; j < 4; ++j)
      if (x >= ts[j]) ++hits[j];
  }
  s.table.header = {"t", "empirical", "lower", "upper", "std_error"};
  for (int j = 0; j < 4; ++j) {
    const TailBounds b = half_cauchy_tail_bounds(ts[j]);
    const double p = static_cast<double>(hits[j]) / kSamples;
    const double se = std::sqrt(p * (1.0 - p) / kSamples);
    s.passed = s.passed && p >= b.lower - 3 * se && p <= b.upper + 3 * se;
    s.table.add_row({format_number(ts[j]), format_number(p), format_number(b.lower),
                     format_number(b.upper), format_number(se)});
  }
  s.summary = s.passed ? "all t bracketed" : "bracket violated";
  return s;
}

SuiteResult expansion_suite(const ValidateConfig& cfg) {
  SuiteResult s{"expansion", true, "", {}};
  Rng rng(derive_seed(cfg.seed, 6));
  Vector w(50);
  for (double& x : w.values()) x = rng.normal();
  std::vector<ProbeReport> reports;
  for (std::size_t d : {16, 35, 64}) {
    reports.push_back(expansion_probability(w, d, 10'000, derive_seed(cfg.seed, 100 + d)));
    const ProbeReport& r = reports.back();
    s.passed = s.passed && r.p_hat >= r.parameters.at("product_lower_bound");
  }
  s.table = probe_table(reports, {"d", "product_lower_bound"});
  double lowest = 1.0;
  for (const ProbeReport& r : reports) lowest = std::min(lowest, r.wilson.lo);
  s.summary = "lowest Wilson lower bound " + format_number(lowest);
  return s;
}

SuiteResult lower_tail_suite(const ValidateConfig& cfg) {
  SuiteResult s{"lower_tail", true, "", {}};
  struct Point {
    std::size_t d;
    double delta;
  };
  std::vector<Point> grid;
  for (std::size_t d : {64, 256, 1024})
    for (double delta : {0.3, 0.5}) grid.push_back({d, delta});
  std::vector<ProbeReport> reports(grid.size());
  parallel_for(grid.size(), cfg.threads, [&](std::size_t g) {
    reports[g] = lower_tail_probability(grid[g].d, 0.5, grid[g].delta, 100'000,
                                        derive_seed(derive_seed(cfg.seed, 7), g));
  });
  for (const ProbeReport& r : reports) {
    s.passed = s.passed && r.p_hat <= r.parameters.at("analytic_bound");
  }
  s.table = probe_table(reports, {"d", "alpha", "delta", "analytic_bound"});
  s.summary = s.passed ? "frequencies within analytic bounds" : "analytic bound exceeded";
  return s;
}

SuiteResult tightness_suite(const ValidateConfig& cfg) {
  SuiteResult s{"tightness", true, "", {}};
  const TightnessReport rep =
      lower_tail_tightness(256, 0.5, 10'000, derive_seed(cfg.seed, 8), derive_seed(cfg.seed, 9));
  s.table.header = {"stage", "p_hat", "wilson_lo", "calibrated_c", "proof_c",
                    "calibrated_bound", "proof_bound"};
  for (const auto& [stage, pr] : {std::pair{"calibration", &rep.calibration},
                                  std::pair{"verification", &rep.verification}}) {
    s.table.add_row({stage, format_number(pr->p_hat), format_number(pr->wilson.lo),
                     format_number(rep.calibrated_c), format_number(rep.proof_c),
                     format_number(rep.calibrated_bound), format_number(rep.proof_bound)});
  }
  s.passed = rep.holds;
  s.summary = "calibrated C " + format_number(rep.calibrated_c);
  return s;
}

SuiteResult lipschitz_suite(const ValidateConfig& cfg) {
  SuiteResult s{"lipschitz", true, "", {}};
  constexpr std::size_t kD = 100;
  constexpr std::size_t kSketch = 40;
  constexpr std::size_t kR = 2;
  const Database db = make_database(1, kD, kR + 1, derive_seed(cfg.seed, 10));
  const double t = lipschitz_t_for_bound(kSketch, kR, 0.1);
  const ProbeReport rep =
      lipschitz_bound_check(db.subspaces.front(), kSketch, t, 100, 1000, derive_seed(cfg.seed, 11));
  s.table = probe_table({rep}, {"d", "r", "t", "analytic_bound", "max_l_hat"});
  s.passed = rep.p_hat <= 0.1 + 3.0 * rep.wilson.width();
  s.summary = "violation frequency " + format_number(rep.p_hat) + " at t " + format_number(t);
  return s;
}

SuiteResult arctan_suite(const ValidateConfig&) {
  SuiteResult s{"arctan", true, "", {}};
  const ArctanSumCheck chk = arctan_sum_check(1'000'000);
  s.table.header = {"k_max", "holds", "first_failure", "min_slack"};
  s.table.add_row({"1000000", chk.holds ? "1" : "0", format_number(chk.first_failure),
                   format_number(chk.min_slack)});
  s.passed = chk.holds;
  s.summary = "min slack " + format_number(chk.min_slack);
  return s;
}

SuiteResult success_suite(const ValidateConfig& cfg) {
  SuiteResult s{"success_curve", true, "", {}};
  ScenarioParams params;
  params.n = 20;
  params.ambient_dim = 400;
  params.scenarios = 6;
  const auto reports = success_curve(params, {30}, 60, derive_seed(cfg.seed, 12), cfg.solver,
                                     cfg.threads);
  s.table = probe_table(reports, {"d", "theta", "scenarios", "median_eta"});
  s.passed = reports.front().p_hat >= 0.5;
  s.summary = "p_hat " + format_number(reports.front().p_hat) + " at d=30";
  return s;
}

}  // namespace

std::vector<SuiteResult> run_validate(const ValidateConfig& config) {
  std::vector<SuiteResult> out;
  for (auto suite : {oracle_suite, median_suite, stability_suite, tail_suite, expansion_suite,
                     lower_tail_suite, tightness_suite, lipschitz_suite, arctan_suite,
                     success_suite}) {
    out.push_back(suite(config));
  }
  return out;
}

}  // namespace l1sq
