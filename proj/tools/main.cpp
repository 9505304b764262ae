#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "cli_support.hpp"
#include "l1sq/bench.hpp"
#include "l1sq/error.hpp"
#include "l1sq/parallel.hpp"
#include "l1sq/search.hpp"
#include "l1sq/theory_lab.hpp"
#include "l1sq/validate.hpp"

namespace fs = std::filesystem;
using namespace l1sq;

namespace {

struct Globals {
  std::uint64_t seed = 7;
  std::size_t threads = 0;
  double tol = 1e-8;
  std::string out;
  std::string format = "dmat";

  SolverConfig solver() const {
    SolverConfig c;
    c.tol = tol;
    return c;
  }
  std::size_t thread_count() const { return resolve_threads(threads); }
};

template <typename Parse>
CLI::Validator range_check(Parse parse, std::string name) {
  return CLI::Validator(
      [parse](std::string& text) -> std::string {
        try {
          parse(text);
        } catch (const Error& e) {
          return e.what();
        }
        return {};
      },
      std::move(name));
}

const CLI::Validator kRealRange =
    range_check([](const std::string& t) { return cli::parse_real_range(t); }, "RANGE");
const CLI::Validator kSizeRange =
    range_check([](const std::string& t) { return cli::parse_size_range(t); }, "RANGE");

Subspace load_subspace(const fs::path& path) {
  DenseMatrix basis = load_matrix(path);
  try {
    return Subspace::from_orthonormal(basis);
  } catch (const Error&) {
    return orthonormalize(basis);
  }
}

Database load_database(const fs::path& dir) {
  std::ifstream manifest(dir / "labels.txt");
  if (!manifest) throw Error(ErrorCode::kIoError, "cannot open " + (dir / "labels.txt").string());
  Database db;
  std::string label;
  while (std::getline(manifest, label)) {
    if (label.empty()) continue;
    fs::path file = dir / (label + ".dmat");
    if (!fs::exists(file)) file = dir / (label + ".csv");
    db.subspaces.push_back(load_subspace(file));
    db.labels.push_back(label);
  }
  return db;
}

Vector load_query(const fs::path& path) {
  const DenseMatrix m = load_matrix(path);
  if (m.rows() != 1 && m.cols() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "query file must hold a single row or column");
  }
  return Vector(std::vector<double>(m.values().begin(), m.values().end()));
}

CsvTable distance_table(const std::map<std::string, double>& distances) {
  CsvTable t;
  t.header = {"label", "distance"};
  for (const auto& [label, d] : distances) t.add_row({label, format_number(d)});
  return t;
}

void cmd_gen_db(const Globals& g, std::size_t n, std::size_t D, std::size_t r) {
  const fs::path dir = g.out.empty() ? fs::path("db") : fs::path(g.out);
  fs::create_directories(dir);
  const Database db = make_database(n, D, r, Seed{g.seed}, g.thread_count());
  std::ofstream manifest(dir / "labels.txt");
  for (std::size_t i = 0; i < n; ++i) {
    const fs::path file = dir / (db.labels[i] + (g.format == "csv" ? ".csv" : ".dmat"));
    save_matrix(file, db.subspaces[i].basis());
    manifest << db.labels[i] << '\n';
  }
  if (!manifest) throw Error(ErrorCode::kIoError, "failed writing labels.txt");
  std::cout << "wrote " << n << " subspaces to " << dir.string() << '\n';
}

void cmd_build_index(const Globals& g, const std::string& db_dir, std::size_t k, std::size_t d) {
  Database db = load_database(db_dir);
  const SearchIndex index = build_index(std::move(db.subspaces), std::move(db.labels), k, d,
                                        Seed{g.seed}, g.thread_count());
  const fs::path out = g.out.empty() ? fs::path("index.l1ix") : fs::path(g.out);
  save_index(index, out);
  std::cout << "wrote index (n=" << index.size() << ", k=" << k << ", d=" << d << ") to "
            << out.string() << '\n';
}

Vector resolve_query(const Globals& g, const std::string& query_file,
                     std::optional<double> theta, const std::vector<Subspace>& subspaces,
                     const std::vector<std::string>& labels) {
  if (!query_file.empty()) return load_query(query_file);
  if (!theta) throw CLI::ValidationError("--query", "give --query <file> or --theta <fraction>");
  const Database db{subspaces, labels};
  return make_query(db, *theta, derive_seed(Seed{g.seed}, 1)).query;
}

void cmd_query(const Globals& g, const std::string& index_path, const std::string& query_file,
               std::optional<double> theta, std::size_t n_rep, std::size_t n_back,
               bool instrument) {
  const SearchIndex index = load_index(index_path, g.thread_count());
  const Vector q = resolve_query(g, query_file, theta, index.subspaces(), index.labels());
  QueryConfig config;
  config.n_rep = n_rep;
  config.n_back = n_back;
  config.solver = g.solver();
  config.rng_seed = derive_seed(Seed{g.seed}, 2);
  config.threads = g.thread_count();

  const auto t0 = std::chrono::steady_clock::now();
  const QueryResult res = query(index, q, config);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  CsvTable t;
  t.header = {"label", "votes", "best_projected_distance", "refined_distance"};
  for (const Candidate& c : res.ranked_candidates) {
    const auto it = res.refined_distances.find(c.label);
    t.add_row({c.label, format_number(c.votes), format_number(c.best_projected_distance),
               it == res.refined_distances.end() ? "" : format_number(it->second)});
  }
  std::cout << "winner " << res.winner << '\n';
  cli::emit_table(t, g.out);
  if (instrument) {
    std::cerr << "sketch_solves=" << res.counters.sketch_solves
              << " ambient_solves=" << res.counters.ambient_solves
              << " wall_time_s=" << format_number(elapsed) << '\n';
  }
}

void cmd_exhaustive(const Globals& g, const std::string& db_dir, const std::string& index_path,
                    const std::string& query_file, std::optional<double> theta) {
  Database db;
  if (!index_path.empty()) {
    const SearchIndex index = load_index(index_path, g.thread_count());
    db = {index.subspaces(), index.labels()};
  } else {
    db = load_database(db_dir);
  }
  const Vector q = resolve_query(g, query_file, theta, db.subspaces, db.labels);
  const ExhaustiveResult res =
      exhaustive_search(db.subspaces, db.labels, q, g.solver(), g.thread_count());
  std::cout << "winner " << res.winner << '\n';
  cli::emit_table(distance_table(res.distances), g.out);
}

void add_validate(CLI::App& app, const Globals& g, int& status) {
  auto* sub = app.add_subcommand("validate", "Run the invariant suite and write one CSV per suite");
  sub->callback([&] {
    ValidateConfig cfg;
    cfg.seed = Seed{g.seed};
    cfg.threads = g.thread_count();
    cfg.solver = g.solver();
    const fs::path dir = g.out.empty() ? fs::path("validate_out") : fs::path(g.out);
    fs::create_directories(dir);
    bool all = true;
    for (const SuiteResult& s : run_validate(cfg)) {
      save_csv(dir / (s.name + ".csv"), s.table);
      std::cout << (s.passed ? "PASS " : "FAIL ") << s.name << ": " << s.summary << '\n';
      all = all && s.passed;
    }
    if (!all) status = 2;
  });
}

void add_simulate(CLI::App& app, const Globals& g) {
  auto* sim = app.add_subcommand("simulate", "Monte Carlo probes");
  sim->require_subcommand(1);

  {
    auto* s = sim->add_subcommand("success-curve", "P[sketch keeps the nearest subspace] vs d");
    auto d_list = std::make_shared<std::string>("10,30,50,70,90");
    auto theta = std::make_shared<std::string>("0.05");
    auto trials = std::make_shared<std::size_t>(100);
    auto params = std::make_shared<ScenarioParams>();
    s->add_option("--d", *d_list, "Sketch sizes (list or range)")->check(kSizeRange);
    s->add_option("--theta", *theta, "Corruption fractions, e.g. 0.05..0.30")->check(kRealRange);
    s->add_option("--trials", *trials, "Projections per d");
    s->add_option("--n", params->n, "Subspaces per scenario");
    s->add_option("--D", params->ambient_dim, "Ambient dimension");
    s->add_option("--r", params->rank, "Subspace rank");
    s->add_option("--scenarios", params->scenarios, "Scenarios per theta");
    s->callback([=, &g] {
      const auto ds = cli::parse_size_range(*d_list);
      std::vector<ProbeReport> all;
      for (std::size_t ti = 0; const double th : cli::parse_real_range(*theta)) {
        ScenarioParams p = *params;
        p.theta = th;
        const Seed seed = derive_seed(Seed{g.seed}, ti++);
        auto reports = success_curve(p, ds, *trials, seed, g.solver(), g.thread_count());
        all.insert(all.end(), reports.begin(), reports.end());
      }
      cli::emit_table(probe_table(all, {"theta", "d", "scenarios", "median_eta"}), g.out);
    });
  }
  {
    auto* s = sim->add_subcommand("lower-tail", "Lower-tail frequency vs analytic bound");
    auto d = std::make_shared<std::string>("64,256,1024");
    auto alpha = std::make_shared<std::string>("0.5");
    auto delta = std::make_shared<std::string>("0.3,0.5");
    auto trials = std::make_shared<std::size_t>(100000);
    s->add_option("--d", *d)->check(kSizeRange);
    s->add_option("--alpha", *alpha)->check(kRealRange);
    s->add_option("--delta", *delta)->check(kRealRange);
    s->add_option("--trials", *trials);
    s->callback([=, &g] {
      std::vector<ProbeReport> reports;
      std::size_t point = 0;
      for (std::size_t dd : cli::parse_size_range(*d))
        for (double a : cli::parse_real_range(*alpha))
          for (double de : cli::parse_real_range(*delta))
            reports.push_back(
                lower_tail_probability(dd, a, de, *trials, derive_seed(Seed{g.seed}, point++)));
      cli::emit_table(probe_table(reports, {"d", "alpha", "delta", "analytic_bound"}), g.out);
    });
  }
  {
    auto* s = sim->add_subcommand("expansion", "P[||Pw||_1 <= (2/pi) d log d ||w||_1]");
    auto d = std::make_shared<std::string>("16,35,64");
    auto trials = std::make_shared<std::size_t>(10000);
    auto w_dim = std::make_shared<std::size_t>(50);
    auto route = std::make_shared<std::string>("stability");
    s->add_option("--d", *d)->check(kSizeRange);
    s->add_option("--trials", *trials);
    s->add_option("--w-dim", *w_dim, "Length of the random test vector w");
    s->add_option("--route", *route, "stability or full")->check(CLI::IsMember({"stability", "full"}));
    s->callback([=, &g] {
      Rng rng(Seed{g.seed});
      Vector w(*w_dim);
      for (double& v : w.values()) v = rng.normal();
      const SamplingRoute rt =
          *route == "full" ? SamplingRoute::kFullMatrix : SamplingRoute::kStability;
      std::vector<ProbeReport> reports;
      for (std::size_t dd : cli::parse_size_range(*d))
        reports.push_back(expansion_probability(w, dd, *trials, derive_seed(Seed{g.seed}, dd), rt));
      cli::emit_table(probe_table(reports, {"d", "product_lower_bound"}), g.out);
    });
  }
  {
    auto* s = sim->add_subcommand("lipschitz", "Lipschitz estimate vs tail bound");
    auto D = std::make_shared<std::size_t>(100);
    auto d = std::make_shared<std::size_t>(40);
    auto r = std::make_shared<std::size_t>(2);
    auto target = std::make_shared<double>(0.1);
    auto draws = std::make_shared<std::size_t>(100);
    auto samples = std::make_shared<std::size_t>(1000);
    s->add_option("--D", *D);
    s->add_option("--d", *d);
    s->add_option("--r", *r, "Subspace has dimension r+1");
    s->add_option("--target", *target, "Pick t so the analytic bound equals this");
    s->add_option("--draws", *draws);
    s->add_option("--samples", *samples);
    s->callback([=, &g] {
      const Database db = make_database(1, *D, *r + 1, derive_seed(Seed{g.seed}, 0));
      const double t = lipschitz_t_for_bound(*d, *r, *target);
      const ProbeReport rep = lipschitz_bound_check(db.subspaces.front(), *d, t, *draws,
                                                    *samples, derive_seed(Seed{g.seed}, 1));
      cli::emit_table(probe_table({rep}, {"d", "r", "t", "analytic_bound", "max_l_hat"}), g.out);
    });
  }
  {
    auto* s = sim->add_subcommand("stability", "Law of (Pv)_i / ||v||_1 vs half-Cauchy");
    auto D = std::make_shared<std::size_t>(20);
    auto d = std::make_shared<std::size_t>(100);
    auto trials = std::make_shared<std::size_t>(1000);
    s->add_option("--D", *D);
    s->add_option("--d", *d);
    s->add_option("--trials", *trials);
    s->callback([=, &g] {
      Rng rng(Seed{g.seed});
      Vector v(*D);
      for (double& x : v.values()) x = rng.normal();
      const StabilityReport rep = check_l1_stability(v, *d, *trials, derive_seed(Seed{g.seed}, 1));
      CsvTable t;
      t.header = {"level", "empirical_quantile", "reference_quantile"};
      for (std::size_t i = 0; i < rep.kLevels.size(); ++i) {
        t.add_row({format_number(rep.kLevels[i]), format_number(rep.empirical_quantiles[i]),
                   format_number(rep.reference_quantiles[i])});
      }
      t.add_row({"ks", format_number(rep.ks_statistic), "0"});
      cli::emit_table(t, g.out);
    });
  }
  {
    auto* s = sim->add_subcommand("arctan-check", "sum atan(1/j) >= log(k+1) for k <= k_max");
    auto k_max = std::make_shared<std::size_t>(1000000);
    s->add_option("--k-max", *k_max);
    s->callback([=, &g] {
      const ArctanSumCheck chk = arctan_sum_check(*k_max);
      CsvTable t;
      t.header = {"k_max", "holds", "first_failure", "min_slack"};
      t.add_row({format_number(*k_max), chk.holds ? "1" : "0", format_number(chk.first_failure),
                 format_number(chk.min_slack)});
      cli::emit_table(t, g.out);
    });
  }
  {
    auto* s = sim->add_subcommand("tightness", "Calibrate and verify the lower-tail tightness bound");
    auto d = std::make_shared<std::size_t>(256);
    auto beta = std::make_shared<double>(0.5);
    auto trials = std::make_shared<std::size_t>(10000);
    s->add_option("--d", *d);
    s->add_option("--beta", *beta);
    s->add_option("--trials", *trials);
    s->callback([=, &g] {
      const TightnessReport rep = lower_tail_tightness(
          *d, *beta, *trials, derive_seed(Seed{g.seed}, 0), derive_seed(Seed{g.seed}, 1));
      CsvTable t;
      t.header = {"stage", "p_hat", "wilson_lo", "calibrated_c", "proof_c", "calibrated_bound",
                  "proof_bound", "holds"};
      for (const auto& [stage, pr] : {std::pair{"calibration", &rep.calibration},
                                      std::pair{"verification", &rep.verification}}) {
        t.add_row({stage, format_number(pr->p_hat), format_number(pr->wilson.lo),
                   format_number(rep.calibrated_c), format_number(rep.proof_c),
                   format_number(rep.calibrated_bound), format_number(rep.proof_bound),
                   rep.holds ? "1" : "0"});
      }
      cli::emit_table(t, g.out);
    });
  }
}

void add_bench(CLI::App& app, const Globals& g) {
  auto* bench = app.add_subcommand("bench", "Runtime benchmarks (single thread)");
  bench->require_subcommand(1);
  {
    auto* s = bench->add_subcommand("regression", "Median solve_l1 time vs D");
    auto D = std::make_shared<std::string>("256..16384");
    auto r = std::make_shared<std::size_t>(10);
    auto theta = std::make_shared<double>(0.05);
    auto reps = std::make_shared<std::size_t>(kMinBenchRepetitions);
    s->add_option("--D", *D, "Ambient dimensions (list or doubling range)")->check(kSizeRange);
    s->add_option("--r", *r);
    s->add_option("--theta", *theta);
    s->add_option("--repetitions", *reps);
    s->callback([=, &g] {
      const auto Ds = cli::parse_size_range(*D);
      const auto records = bench_regression(Ds, *r, *theta, *reps, Seed{g.seed});
      cli::emit_table(bench_table(records), g.out);
      if (Ds.size() >= 2) {
        std::cerr << "loglog_slope=" << format_number(loglog_slope(records, Ds.front(), Ds.back()))
                  << '\n';
      }
    });
  }
  {
    auto* s = bench->add_subcommand("two-level", "Exhaustive search vs two-level query");
    auto n = std::make_shared<std::size_t>(38);
    auto D = std::make_shared<std::size_t>(16384);
    auto d = std::make_shared<std::size_t>(100);
    auto r = std::make_shared<std::size_t>(5);
    auto n_rep = std::make_shared<std::size_t>(5);
    auto n_back = std::make_shared<std::size_t>(5);
    auto reps = std::make_shared<std::size_t>(kMinBenchRepetitions);
    s->add_option("--n", *n);
    s->add_option("--D", *D);
    s->add_option("--d", *d);
    s->add_option("--r", *r);
    s->add_option("--Nrep", *n_rep);
    s->add_option("--Nback", *n_back);
    s->add_option("--repetitions", *reps);
    s->callback([=, &g] {
      const TwoLevelBench res =
          bench_two_level(*n, *D, *d, *r, *n_rep, *n_back, Seed{g.seed}, *reps);
      cli::emit_table(bench_table(res.records), g.out);
      std::cerr << "speedup=" << format_number(res.speedup)
                << " sketch_solves=" << res.counters.sketch_solves
                << " ambient_solves=" << res.counters.ambient_solves << '\n';
    });
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l1sq: l1 nearest-subspace search with Cauchy sketches"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--threads", g.threads, "Worker threads (default: L1SQ_THREADS or 1)");
  app.add_option("--tol", g.tol, "Relative duality-gap tolerance of the LP solver");
  app.add_option("--out", g.out, "Output path (CSV file, index file or directory)");
  app.add_option("--format", g.format, "Matrix file format for gen-db")
      ->check(CLI::IsMember({"csv", "dmat"}));

  int status = 0;

  auto* gen = app.add_subcommand("gen-db", "Synthesize a database of random subspaces");
  std::size_t gen_n = 100, gen_D = 2000, gen_r = 5;
  gen->add_option("--n", gen_n);
  gen->add_option("--D", gen_D);
  gen->add_option("--r", gen_r);
  gen->callback([&] { cmd_gen_db(g, gen_n, gen_D, gen_r); });

  auto* bi = app.add_subcommand("build-index", "Project a database through a Cauchy pool");
  std::string bi_db = "db";
  std::size_t bi_k = 100, bi_d = 30;
  bi->add_option("--db", bi_db, "Database directory");
  bi->add_option("--k", bi_k, "Pool size");
  bi->add_option("--d", bi_d, "Sketch size");
  bi->callback([&] { cmd_build_index(g, bi_db, bi_k, bi_d); });

  auto* q = app.add_subcommand("query", "Two-level nearest-subspace query");
  std::string q_index = "index.l1ix", q_file;
  std::optional<double> q_theta;
  std::size_t q_rep = 5, q_back = 5;
  bool q_instr = false;
  q->add_option("--index", q_index);
  q->add_option("--query", q_file, "Query vector file (DMAT1 or CSV)");
  q->add_option("--theta", q_theta, "Synthesize a corrupted query with this fraction");
  q->add_option("--Nrep", q_rep, "Sketch repetitions");
  q->add_option("--Nback", q_back, "Candidates refined in the ambient space");
  q->add_flag("--bench-instrumentation", q_instr, "Report solver counters and time on stderr");
  q->callback([&] { cmd_query(g, q_index, q_file, q_theta, q_rep, q_back, q_instr); });

  auto* ex = app.add_subcommand("exhaustive", "Exact search over every subspace");
  std::string ex_db = "db", ex_index, ex_file;
  std::optional<double> ex_theta;
  ex->add_option("--db", ex_db);
  ex->add_option("--index", ex_index, "Read subspaces from an index instead of --db");
  ex->add_option("--query", ex_file);
  ex->add_option("--theta", ex_theta);
  ex->callback([&] { cmd_exhaustive(g, ex_db, ex_index, ex_file, ex_theta); });

  add_simulate(app, g);
  add_bench(app, g);
  add_validate(app, g, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
