#include "l1sq/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "l1sq/error.hpp"
#include "l1sq/theory_lab.hpp"

namespace l1sq {
namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double seconds(F&& f) {
  const auto t0 = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::vector<BenchRecord> bench_regression(const std::vector<std::size_t>& D_list, std::size_t r,
                                          double theta, std::size_t repetitions, Seed seed) {
  if (r < 1) throw Error(ErrorCode::kConfigInvalid, "r must be >= 1");
  if (!std::is_sorted(D_list.begin(), D_list.end())) {
    throw Error(ErrorCode::kConfigInvalid, "D list must be ascending");
  }
  const std::size_t reps = std::max(repetitions, kMinBenchRepetitions);
  std::vector<BenchRecord> out;
  for (std::size_t D : D_list) {
    const Seed instance_seed = derive_seed(seed, D);
    const Database db = make_database(1, D, r, derive_seed(instance_seed, 0));
    const CorruptedQuery q = make_query(db, theta, derive_seed(instance_seed, 1), 0);
    const DenseMatrix& a = db.subspaces.front().basis();

    std::size_t iterations = solve_l1(a, q.query).iterations;
    std::vector<double> times;
    for (std::size_t t = 0; t < reps; ++t) {
      times.push_back(seconds([&] { iterations = solve_l1(a, q.query).iterations; }));
    }
    out.push_back({"regression", D, D, r, 1, median(times), iterations, reps});
  }
  return out;
}

double loglog_slope(const std::vector<BenchRecord>& records, std::size_t D_min,
                    std::size_t D_max) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const BenchRecord& rec : records) {
    if (rec.D < D_min || rec.D > D_max || rec.wall_time_s <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(rec.D)));
    ys.push_back(std::log(rec.wall_time_s));
  }
  if (xs.size() < 2) throw Error(ErrorCode::kConfigInvalid, "slope fit needs two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

TwoLevelBench bench_two_level(std::size_t n, std::size_t D, std::size_t d, std::size_t r,
                              std::size_t n_rep, std::size_t n_back, Seed seed,
                              std::size_t repetitions, double theta) {
  if (d >= D) throw Error(ErrorCode::kConfigInvalid, "two-level bench needs d < D");
  const std::size_t reps = std::max(repetitions, kMinBenchRepetitions);
  Database db = make_database(n, D, r, derive_seed(seed, 0));
  const CorruptedQuery q = make_query(db, theta, derive_seed(seed, 1));
  const std::vector<Subspace> subspaces = db.subspaces;
  const SearchIndex index =
      build_index(std::move(db.subspaces), db.labels, n_rep, d, derive_seed(seed, 2));

  QueryConfig config;
  config.n_rep = n_rep;
  config.n_back = n_back;
  config.rng_seed = derive_seed(seed, 3);

  TwoLevelBench out;
  std::vector<double> ex_times;
  std::vector<double> tl_times;
  for (std::size_t t = 0; t <= reps; ++t) {
    // Run 0 of each is the discarded warm-up.
    const double te = seconds([&] {
      out.exhaustive_winner = exhaustive_search(subspaces, db.labels, q.query).winner;
    });
    QueryResult res;
    const double tq = seconds([&] { res = query(index, q.query, config); });
    out.two_level_winner = res.winner;
    out.counters = res.counters;
    if (t == 0) continue;
    ex_times.push_back(te);
    tl_times.push_back(tq);
  }
  const double ex = median(ex_times);
  const double tl = median(tl_times);
  out.speedup = ex / tl;
  out.records.push_back({"exhaustive", D, D, r, n, ex, n, reps});
  out.records.push_back({"two_level", D, d, r, n, tl,
                         out.counters.sketch_solves + out.counters.ambient_solves, reps});
  return out;
}

CsvTable bench_table(const std::vector<BenchRecord>& records, bool with_timing) {
  CsvTable t;
  t.header = {"operation", "D", "d", "r", "n", "solver_iterations", "repetitions"};
  if (with_timing) t.header.push_back("wall_time_s");
  for (const BenchRecord& rec : records) {
    std::vector<std::string> row = {rec.operation,
                                    format_number(rec.D),
                                    format_number(rec.d),
                                    format_number(rec.r),
                                    format_number(rec.n),
                                    format_number(rec.solver_iterations),
                                    format_number(rec.repetitions)};
    if (with_timing) row.push_back(format_number(rec.wall_time_s));
    t.add_row(std::move(row));
  }
  return t;
}

std::vector<BenchRecord> bench_records_from_table(const CsvTable& table) {
  const bool timed = std::find(table.header.begin(), table.header.end(), "wall_time_s") !=
                     table.header.end();
  auto count = [&](std::size_t row, const char* name) {
    return static_cast<std::size_t>(table.number(row, name));
  };
  std::vector<BenchRecord> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    BenchRecord rec;
    rec.operation = table.rows[i][table.column("operation")];
    rec.D = count(i, "D");
    rec.d = count(i, "d");
    rec.r = count(i, "r");
    rec.n = count(i, "n");
    rec.solver_iterations = count(i, "solver_iterations");
    rec.repetitions = count(i, "repetitions");
    if (timed) rec.wall_time_s = table.number(i, "wall_time_s");
    out.push_back(rec);
  }
  return out;
}

}  // namespace l1sq
