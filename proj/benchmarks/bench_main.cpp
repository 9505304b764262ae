#include <benchmark/benchmark.h>

#include "l1sq/cauchy.hpp"
#include "l1sq/l1_regression.hpp"
#include "l1sq/search.hpp"
#include "l1sq/theory_lab.hpp"

using namespace l1sq;

namespace {

void BM_SolveL1(benchmark::State& state) {
  const auto D = static_cast<std::size_t>(state.range(0));
  const std::size_t r = 10;
  const Database db = make_database(1, D, r, Seed{D});
  const CorruptedQuery cq = make_query(db, 0.05, Seed{D + 1}, 0);
  const DenseMatrix& a = db.subspaces[0].basis();
  std::size_t iterations = 0;
  for (auto _ : state) {
    const RegressionSolution s = solve_l1(a, cq.query);
    iterations = s.iterations;
    benchmark::DoNotOptimize(s.objective);
  }
  state.counters["ipm_iterations"] = static_cast<double>(iterations);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveL1)->RangeMultiplier(2)->Range(256, 8192)->Unit(benchmark::kMillisecond)
    ->Complexity();

void BM_CauchyMatrix(benchmark::State& state) {
  const auto D = static_cast<std::size_t>(state.range(0));
  std::uint64_t s = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_cauchy_matrix(30, D, Seed{s++}).values().data());
  }
  state.SetItemsProcessed(state.iterations() * 30 * state.range(0));
}
BENCHMARK(BM_CauchyMatrix)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

struct SearchFixture {
  Database db;
  SearchIndex index;
  CorruptedQuery cq;

  static const SearchFixture& get() {
    static const SearchFixture f = [] {
      Database db = make_database(38, 4096, 5, Seed{11});
      SearchIndex index = build_index(db.subspaces, db.labels, 5, 100, Seed{12});
      CorruptedQuery cq = make_query(db, 0.05, Seed{13});
      return SearchFixture{std::move(db), std::move(index), std::move(cq)};
    }();
    return f;
  }
};

void BM_TwoLevelQuery(benchmark::State& state) {
  const SearchFixture& f = SearchFixture::get();
  QueryConfig cfg;
  cfg.n_rep = 5;
  cfg.n_back = static_cast<std::size_t>(state.range(0));
  cfg.rng_seed = Seed{14};
  for (auto _ : state) benchmark::DoNotOptimize(query(f.index, f.cq.query, cfg).winner);
}
BENCHMARK(BM_TwoLevelQuery)->Arg(1)->Arg(5)->Arg(38)->Unit(benchmark::kMillisecond);

void BM_Exhaustive(benchmark::State& state) {
  const SearchFixture& f = SearchFixture::get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(exhaustive_search(f.db.subspaces, f.db.labels, f.cq.query).winner);
  }
}
BENCHMARK(BM_Exhaustive)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
