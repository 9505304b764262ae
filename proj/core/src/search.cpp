#include "l1sq/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>

#include "l1sq/error.hpp"
#include "l1sq/parallel.hpp"

namespace l1sq {

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("L1SQ_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 1;
}

ProjectionPool ProjectionPool::generate(std::size_t k, std::size_t d, std::size_t ambient_dim,
                                        Seed master_seed, std::size_t threads) {
  ProjectionPool pool{k, d, ambient_dim, master_seed, std::vector<DenseMatrix>(k)};
  parallel_for(k, threads, [&](std::size_t j) {
    pool.matrices[j] = sample_cauchy_matrix(d, ambient_dim, derive_seed(master_seed, j));
  });
  return pool;
}

SearchIndex::SearchIndex(ProjectionPool pool, std::vector<Subspace> subspaces,
                         std::vector<std::string> labels,
                         std::vector<std::vector<DenseMatrix>> projected)
    : pool_(std::move(pool)),
      subspaces_(std::move(subspaces)),
      labels_(std::move(labels)),
      projected_(std::move(projected)) {
  if (subspaces_.empty()) throw Error(ErrorCode::kEmptyDatabase, "index has no subspaces");
  if (labels_.size() != subspaces_.size() || projected_.size() != pool_.k) {
    throw Error(ErrorCode::kDimensionMismatch, "index component sizes disagree");
  }
}

std::vector<std::string> default_labels(std::size_t n) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(n == 0 ? 0 : n - 1).size());
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string digits = std::to_string(i);
    labels[i] = "S" + std::string(width - std::min<std::size_t>(width, digits.size()), '0') + digits;
  }
  return labels;
}

namespace {

void check_database(const std::vector<Subspace>& subspaces,
                    const std::vector<std::string>& labels) {
  if (subspaces.empty()) throw Error(ErrorCode::kEmptyDatabase, "no subspaces given");
  if (labels.size() != subspaces.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "label count differs from subspace count");
  }
  const std::size_t dim = subspaces.front().ambient_dim();
  const std::size_t rank = subspaces.front().rank();
  for (const Subspace& s : subspaces) {
    if (s.ambient_dim() != dim || s.rank() != rank) {
      throw Error(ErrorCode::kDimensionMismatch, "subspaces must share D and r");
    }
  }
  std::set<std::string> seen;
  for (const std::string& l : labels) {
    if (!seen.insert(l).second) throw Error(ErrorCode::kDuplicateLabel, "duplicate label " + l);
  }
}

// Smallest (distance, label) pair.
std::size_t argmin_by_label(const std::vector<double>& dist,
                            const std::vector<std::string>& labels,
                            const std::vector<std::size_t>& among) {
  std::size_t best = among.front();
  for (std::size_t i : among) {
    if (dist[i] < dist[best] || (dist[i] == dist[best] && labels[i] < labels[best])) best = i;
  }
  return best;
}

}  // namespace

SearchIndex build_index(std::vector<Subspace> subspaces, std::vector<std::string> labels,
                        std::size_t k, std::size_t d, Seed master_seed, std::size_t threads) {
  check_database(subspaces, labels);
  if (k == 0 || d == 0) throw Error(ErrorCode::kConfigInvalid, "k and d must be >= 1");
  const std::size_t dim = subspaces.front().ambient_dim();
  ProjectionPool pool = ProjectionPool::generate(k, d, dim, master_seed, threads);

  const std::size_t n = subspaces.size();
  std::vector<std::vector<DenseMatrix>> projected(k, std::vector<DenseMatrix>(n));
  parallel_for(k * n, threads, [&](std::size_t item) {
    const std::size_t j = item / n;
    const std::size_t i = item % n;
    projected[j][i] = matmul(pool.matrices[j], subspaces[i].basis());
  });
  return SearchIndex(std::move(pool), std::move(subspaces), std::move(labels),
                     std::move(projected));
}

void QueryConfig::validate(const SearchIndex& index) const {
  solver.validate();
  if (n_rep < 1 || n_rep > index.pool().k) {
    throw Error(ErrorCode::kConfigInvalid, "N_rep must lie in [1, k]");
  }
  if (n_back < 1 || n_back > index.size()) {
    throw Error(ErrorCode::kConfigInvalid, "N_back must lie in [1, n]");
  }
}

QueryResult query(const SearchIndex& index, const Vector& q, const QueryConfig& config) {
  config.validate(index);
  if (q.dim() != index.ambient_dim()) {
    throw Error(ErrorCode::kShapeMismatch, "query dimension differs from index");
  }
  const std::size_t n = index.size();
  const std::vector<std::string>& labels = index.labels();

  QueryResult result;
  result.seed_used = config.rng_seed;
  result.repetitions_used = config.n_rep;

  // Partial Fisher-Yates: N_rep distinct pool members.
  Rng rng(config.rng_seed);
  std::vector<std::size_t> order(index.pool().k);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t t = 0; t < config.n_rep; ++t) {
    const std::size_t pick = t + rng.below(order.size() - t);
    std::swap(order[t], order[pick]);
  }
  result.pool_members.assign(order.begin(), order.begin() + config.n_rep);

  std::vector<std::size_t> votes(n, 0);
  std::vector<double> best_projected(n, std::numeric_limits<double>::infinity());
  std::vector<double> last(n);
  std::vector<std::size_t> everyone(n);
  std::iota(everyone.begin(), everyone.end(), 0);

  for (std::size_t j : result.pool_members) {
    const Vector pq = matvec(index.pool().matrices[j], q);
    parallel_for(n, config.threads, [&](std::size_t i) {
      last[i] = solve_l1(index.projected(j, i), pq, config.solver).objective;
    });
    result.counters.sketch_solves += n;
    for (std::size_t i = 0; i < n; ++i) best_projected[i] = std::min(best_projected[i], last[i]);
    ++votes[argmin_by_label(last, labels, everyone)];
  }

  std::vector<std::size_t> voted;
  std::vector<std::size_t> unvoted;
  for (std::size_t i = 0; i < n; ++i) (votes[i] > 0 ? voted : unvoted).push_back(i);
  std::sort(voted.begin(), voted.end(), [&](std::size_t a, std::size_t b) {
    if (votes[a] != votes[b]) return votes[a] > votes[b];
    if (best_projected[a] != best_projected[b]) return best_projected[a] < best_projected[b];
    return labels[a] < labels[b];
  });
  std::sort(unvoted.begin(), unvoted.end(), [&](std::size_t a, std::size_t b) {
    if (last[a] != last[b]) return last[a] < last[b];
    return labels[a] < labels[b];
  });

  std::vector<std::size_t> ranked = voted;
  for (std::size_t i = 0; ranked.size() < config.n_back && i < unvoted.size(); ++i) {
    ranked.push_back(unvoted[i]);
  }
  for (std::size_t i : ranked) {
    result.ranked_candidates.push_back({labels[i], votes[i], best_projected[i]});
  }

  const std::size_t scanned = std::min(config.n_back, ranked.size());
  std::vector<std::size_t> scan(ranked.begin(), ranked.begin() + scanned);
  std::vector<double> refined(n, std::numeric_limits<double>::infinity());
  parallel_for(scanned, config.threads, [&](std::size_t s) {
    refined[scan[s]] =
        point_to_subspace_distance(q, index.subspaces()[scan[s]], config.solver);
  });
  result.counters.ambient_solves = scanned;
  for (std::size_t i : scan) result.refined_distances[labels[i]] = refined[i];
  result.winner = labels[argmin_by_label(refined, labels, scan)];
  return result;
}

ExhaustiveResult exhaustive_search(const std::vector<Subspace>& subspaces,
                                   const std::vector<std::string>& labels, const Vector& q,
                                   const SolverConfig& solver, std::size_t threads) {
  check_database(subspaces, labels);
  const std::size_t n = subspaces.size();
  std::vector<double> dist(n);
  parallel_for(n, threads, [&](std::size_t i) {
    dist[i] = point_to_subspace_distance(q, subspaces[i], solver);
  });
  std::vector<std::size_t> everyone(n);
  std::iota(everyone.begin(), everyone.end(), 0);
  ExhaustiveResult out;
  out.winner = labels[argmin_by_label(dist, labels, everyone)];
  for (std::size_t i = 0; i < n; ++i) out.distances[labels[i]] = dist[i];
  return out;
}

GapReport distance_gap(const std::map<std::string, double>& distances, double zero_tol) {
  if (distances.size() < 2) {
    throw Error(ErrorCode::kTooFewSubspaces, "distance gap needs at least two subspaces");
  }
  std::vector<std::pair<double, std::string>> sorted;
  for (const auto& [label, d] : distances) {
    if (!(d >= 0.0)) throw Error(ErrorCode::kDomainError, "negative distance for " + label);
    sorted.emplace_back(d, label);
  }
  std::partial_sort(sorted.begin(), sorted.begin() + 2, sorted.end());
  GapReport gap;
  gap.nearest = sorted[0].second;
  gap.second = sorted[1].second;
  const double d1 = sorted[0].first;
  const double d2 = sorted[1].first;
  if (d1 <= zero_tol) {
    gap.eta = d2 <= zero_tol ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    gap.eta = d2 / d1;
  }
  return gap;
}

}  // namespace l1sq
