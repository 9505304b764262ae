#pragma once

#include <string>
#include <vector>

#include "l1sq/cauchy.hpp"
#include "l1sq/csv.hpp"
#include "l1sq/search.hpp"

namespace l1sq {

struct BenchRecord {
  std::string operation;
  std::size_t D = 0;
  std::size_t d = 0;
  std::size_t r = 0;
  std::size_t n = 0;
  double wall_time_s = 0.0;  // median over `repetitions` timed runs
  std::size_t solver_iterations = 0;
  std::size_t repetitions = 0;
};

inline constexpr std::size_t kMinBenchRepetitions = 5;

/// Times solve_l1 on one instance per D: an orthonormalized Gaussian D x r
/// basis and a max-normalized query from it with round(theta D) entries
/// corrupted. One warm-up run is discarded; `repetitions` is raised to at
/// least kMinBenchRepetitions. Instance data depends only on (seed, D).
std::vector<BenchRecord> bench_regression(const std::vector<std::size_t>& D_list, std::size_t r,
                                          double theta, std::size_t repetitions, Seed seed);

/// Least-squares slope of log(wall_time_s) against log(D) over records with
/// D in [D_min, D_max]. Throws ConfigInvalid with fewer than two points.
double loglog_slope(const std::vector<BenchRecord>& records, std::size_t D_min,
                    std::size_t D_max);

struct TwoLevelBench {
  double speedup = 0.0;  // exhaustive median / two-level median
  std::vector<BenchRecord> records;  // "exhaustive", then "two_level"
  QueryCounters counters;            // from the last two-level query
  std::string exhaustive_winner;
  std::string two_level_winner;
};

/// Builds one synthetic database (n subspaces of rank r in R^D), an index
/// with a pool of N_rep sketches of size d, and one corrupted query, then
/// times exhaustive_search against query. Index construction is not timed.
/// For these records solver_iterations counts solver calls per run.
TwoLevelBench bench_two_level(std::size_t n, std::size_t D, std::size_t d, std::size_t r,
                              std::size_t n_rep, std::size_t n_back, Seed seed,
                              std::size_t repetitions = kMinBenchRepetitions,
                              double theta = 0.05);

/// Columns operation,D,d,r,n,solver_iterations,repetitions and, when
/// `with_timing`, wall_time_s.
CsvTable bench_table(const std::vector<BenchRecord>& records, bool with_timing = true);
std::vector<BenchRecord> bench_records_from_table(const CsvTable& table);

}  // namespace l1sq
