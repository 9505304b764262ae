#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "l1sq/cauchy.hpp"
#include "l1sq/l1_regression.hpp"
#include "l1sq/linalg.hpp"

namespace l1sq {

/// k independent d x D Cauchy matrices; matrix j is regenerable from
/// derive_seed(master_seed, j).
struct ProjectionPool {
  std::size_t k = 0;
  std::size_t d = 0;
  std::size_t ambient_dim = 0;
  Seed master_seed;
  std::vector<DenseMatrix> matrices;

  static ProjectionPool generate(std::size_t k, std::size_t d, std::size_t ambient_dim,
                                 Seed master_seed, std::size_t threads = 1);
};

/// Pool plus every projected basis P_j B_i (d x r, not re-orthonormalized).
class SearchIndex {
 public:
  SearchIndex(ProjectionPool pool, std::vector<Subspace> subspaces,
              std::vector<std::string> labels,
              std::vector<std::vector<DenseMatrix>> projected);

  const ProjectionPool& pool() const noexcept { return pool_; }
  const std::vector<Subspace>& subspaces() const noexcept { return subspaces_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  /// projected(j, i) = pool().matrices[j] * subspaces()[i].basis()
  const DenseMatrix& projected(std::size_t j, std::size_t i) const {
    return projected_[j][i];
  }

  std::size_t size() const noexcept { return subspaces_.size(); }
  std::size_t ambient_dim() const noexcept { return pool_.ambient_dim; }
  std::size_t rank() const noexcept { return subspaces_.front().rank(); }
  std::size_t sketch_dim() const noexcept { return pool_.d; }

 private:
  ProjectionPool pool_;
  std::vector<Subspace> subspaces_;
  std::vector<std::string> labels_;
  std::vector<std::vector<DenseMatrix>> projected_;
};

/// Throws EmptyDatabase, DimensionMismatch (mixed D or r, label count),
/// DuplicateLabel, ConfigInvalid (k or d zero).
SearchIndex build_index(std::vector<Subspace> subspaces, std::vector<std::string> labels,
                        std::size_t k, std::size_t d, Seed master_seed,
                        std::size_t threads = 1);

/// Labels "S000", "S001", ... wide enough to sort lexicographically by index.
std::vector<std::string> default_labels(std::size_t n);

struct QueryConfig {
  std::size_t n_rep = 5;
  std::size_t n_back = 5;
  SolverConfig solver;
  Seed rng_seed;
  std::size_t threads = 1;

  /// Throws ConfigInvalid unless 1 <= n_rep <= pool k and 1 <= n_back <= n.
  void validate(const SearchIndex& index) const;
};

struct Candidate {
  std::string label;
  std::size_t votes = 0;
  double best_projected_distance = 0.0;
};

/// Solver work performed by one query.
struct QueryCounters {
  std::size_t sketch_solves = 0;   // regressions in R^d
  std::size_t ambient_solves = 0;  // regressions in R^D
};

struct QueryResult {
  std::string winner;
  /// Voted candidates by (votes desc, best projected distance asc, label
  /// asc), followed by zero-vote fill entries when fewer than N_back labels
  /// received votes.
  std::vector<Candidate> ranked_candidates;
  std::map<std::string, double> refined_distances;
  std::size_t repetitions_used = 0;
  Seed seed_used;
  std::vector<std::size_t> pool_members;  // pool indices drawn, in draw order
  QueryCounters counters;
};

/// Two-stage query: N_rep sketch-space scans (one vote per repetition for the
/// projected argmin), then exact ambient distances for the top N_back
/// candidates. Ties resolve to the smallest label everywhere.
QueryResult query(const SearchIndex& index, const Vector& q, const QueryConfig& config);

struct ExhaustiveResult {
  std::string winner;
  std::map<std::string, double> distances;
};

/// Baseline: ambient l1 distance to every subspace.
ExhaustiveResult exhaustive_search(const std::vector<Subspace>& subspaces,
                                   const std::vector<std::string>& labels, const Vector& q,
                                   const SolverConfig& solver = {}, std::size_t threads = 1);

struct GapReport {
  double eta = 1.0;
  std::string nearest;
  std::string second;
};

inline constexpr double kZeroDistance = 1e-7;

/// eta = second-nearest / nearest distance. Distances at or below
/// `zero_tol` count as zero: eta is +inf when only the nearest is zero and
/// 1 when both are. Throws TooFewSubspaces for fewer than two entries.
GapReport distance_gap(const std::map<std::string, double>& distances,
                       double zero_tol = kZeroDistance);

// L1IX1 index file:
//   "L1IX1\0", version byte (1),
//   k, d, D, n, r, master_seed            u64 little-endian each
//   n labels                              u64 byte length + UTF-8 bytes
//   n ambient bases                       DMAT1 blocks (D x r)
//   k*n projected bases, j-major          DMAT1 blocks (d x r)
//   CRC-64/XZ of every preceding byte     u64 little-endian
// The pool matrices are regenerated from master_seed on load.
void save_index(const SearchIndex& index, const std::filesystem::path& path);
SearchIndex load_index(const std::filesystem::path& path, std::size_t threads = 1);
void write_index(std::ostream& out, const SearchIndex& index);
SearchIndex read_index(std::istream& in, std::size_t threads = 1);

/// Largest |stored - recomputed| over all projected bases, recomputing from
/// the pool. Zero for an index built or loaded on the same platform.
double projection_consistency_error(const SearchIndex& index);

std::uint64_t crc64(std::string_view bytes);

}  // namespace l1sq
