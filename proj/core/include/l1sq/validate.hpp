#pragma once

#include <string>
#include <vector>

#include "l1sq/cauchy.hpp"
#include "l1sq/csv.hpp"
#include "l1sq/l1_regression.hpp"
#include "l1sq/theory_lab.hpp"

namespace l1sq {

/// One row per report: the listed parameter keys, then
/// trials,successes,p_hat,wilson_lo,wilson_hi.
CsvTable probe_table(const std::vector<ProbeReport>& reports,
                     const std::vector<std::string>& parameter_keys);

struct RegressionInstance {
  DenseMatrix a;
  Vector q;
};

/// Gaussian D x r design with D in [6, 12] and r in [1, 3], and a query that
/// fits the design exactly on a random subset of rows.
RegressionInstance random_regression_instance(Seed seed);

struct OracleComparison {
  std::size_t D = 0;
  std::size_t r = 0;
  double ipm_objective = 0.0;
  double oracle_objective = 0.0;
  double relative_error = 0.0;
  bool converged = false;
};

/// Instance i uses derive_seed(seed, i).
std::vector<OracleComparison> oracle_equivalence(std::size_t instances, Seed seed,
                                                 const SolverConfig& solver = {});

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string summary;
  CsvTable table;  // deterministic: no timing columns
};

struct ValidateConfig {
  Seed seed{20240601};
  std::size_t threads = 1;
  SolverConfig solver;
};

/// Solver-oracle equivalence, median property, stability law, tail
/// brackets, expansion, lower tail and its tightness, Lipschitz bound,
/// arctan inequality and a small success-curve spot check.
std::vector<SuiteResult> run_validate(const ValidateConfig& config);

}  // namespace l1sq
