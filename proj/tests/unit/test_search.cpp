#include <numeric>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "l1sq/search.hpp"
#include "l1sq/theory_lab.hpp"

using namespace l1sq;
using l1sq::test::gaussian_matrix;
using l1sq::test::gaussian_vector;
using l1sq::test::max_abs_diff;

namespace {

std::vector<Subspace> random_subspaces(std::size_t n, std::size_t D, std::size_t r,
                                       std::uint64_t seed) {
  return make_database(n, D, r, Seed{seed}).subspaces;
}

SearchIndex small_index(std::size_t n = 6, std::size_t D = 60, std::size_t r = 2,
                        std::size_t k = 8, std::size_t d = 12, std::uint64_t seed = 1) {
  return build_index(random_subspaces(n, D, r, seed), default_labels(n), k, d, Seed{seed + 100});
}

std::string serialize(const SearchIndex& index) {
  std::ostringstream out(std::ios::binary);
  write_index(out, index);
  return out.str();
}

}  // namespace

TEST_SUITE("search_engine") {
  TEST_CASE("default labels sort by index") {
    const auto labels = default_labels(3);
    CHECK(labels == std::vector<std::string>{"S000", "S001", "S002"});
    const auto wide = default_labels(1500);
    CHECK(wide[7] == "S0007");
    CHECK(std::is_sorted(wide.begin(), wide.end()));
  }

  TEST_CASE("pool matrices are regenerable per member") {
    const ProjectionPool pool = ProjectionPool::generate(4, 5, 20, Seed{3});
    REQUIRE(pool.matrices.size() == 4);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(pool.matrices[j] == sample_cauchy_matrix(5, 20, derive_seed(Seed{3}, j)));
    }
    CHECK(ProjectionPool::generate(4, 5, 20, Seed{3}, 3).matrices == pool.matrices);
  }

  TEST_CASE("build_index stores every projected basis") {
    const auto subspaces = random_subspaces(2, 20, 2, 5);
    const SearchIndex index = build_index(subspaces, {"a", "b"}, 3, 5, Seed{6});
    CHECK(index.size() == 2);
    CHECK(index.pool().k == 3);
    CHECK(index.sketch_dim() == 5);
    CHECK(index.rank() == 2);
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t i = 0; i < 2; ++i) {
        const DenseMatrix& pb = index.projected(j, i);
        CHECK(pb.rows() == 5);
        CHECK(pb.cols() == 2);
        const DenseMatrix fresh = matmul(index.pool().matrices[j], subspaces[i].basis());
        CHECK(max_abs_diff(pb.values(), fresh.values()) <= 1e-12);
      }
    }
    CHECK(projection_consistency_error(index) == 0.0);

    const SearchIndex again = build_index(subspaces, {"a", "b"}, 3, 5, Seed{6}, 2);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < 2; ++i) CHECK(again.projected(j, i) == index.projected(j, i));
  }

  TEST_CASE("build_index errors") {
    CHECK_THROWS_CODE(build_index({}, {}, 2, 3, Seed{1}), ErrorCode::kEmptyDatabase);
    auto mixed = random_subspaces(1, 20, 2, 1);
    mixed.push_back(random_subspaces(1, 21, 2, 2).front());
    CHECK_THROWS_CODE(build_index(mixed, {"a", "b"}, 2, 3, Seed{1}),
                      ErrorCode::kDimensionMismatch);
    auto ranks = random_subspaces(1, 20, 2, 1);
    ranks.push_back(random_subspaces(1, 20, 3, 2).front());
    CHECK_THROWS_CODE(build_index(ranks, {"a", "b"}, 2, 3, Seed{1}),
                      ErrorCode::kDimensionMismatch);
    CHECK_THROWS_CODE(build_index(random_subspaces(2, 20, 2, 1), {"a"}, 2, 3, Seed{1}),
                      ErrorCode::kDimensionMismatch);
    CHECK_THROWS_CODE(build_index(random_subspaces(2, 20, 2, 1), {"a", "a"}, 2, 3, Seed{1}),
                      ErrorCode::kDuplicateLabel);
    CHECK_THROWS_CODE(build_index(random_subspaces(2, 20, 2, 1), {"a", "b"}, 0, 3, Seed{1}),
                      ErrorCode::kConfigInvalid);
  }

  TEST_CASE("query finds a noiseless member") {
    const SearchIndex index = small_index(8, 80, 3);
    for (std::size_t target = 0; target < index.size(); ++target) {
      const Vector q = matvec(index.subspaces()[target].basis(), gaussian_vector(3, target));
      QueryConfig cfg;
      cfg.rng_seed = Seed{target};
      const QueryResult res = query(index, q, cfg);
      CHECK(res.winner == index.labels()[target]);
      CHECK(res.refined_distances.at(res.winner) <= 1e-7);
    }
  }

  TEST_CASE("single-subspace database") {
    const SearchIndex index = small_index(1, 30, 2, 3, 6);
    QueryConfig cfg;
    cfg.n_rep = 3;
    cfg.n_back = 1;
    const QueryResult res = query(index, gaussian_vector(30, 2), cfg);
    CHECK(res.winner == "S000");
    CHECK(res.ranked_candidates.size() == 1);
    CHECK(res.ranked_candidates.front().votes == 3);
  }

  TEST_CASE("query properties") {
    const SearchIndex index = small_index(10, 100, 3, 12, 15, 7);
    const Database db{index.subspaces(), index.labels()};
    for (std::uint64_t trial = 0; trial < 12; ++trial) {
      const Vector q = make_query(db, 0.2, Seed{trial}).query;
      QueryConfig cfg;
      cfg.n_rep = 1 + trial % 5;
      cfg.n_back = 1 + trial % 4;
      cfg.rng_seed = Seed{trial + 50};
      const QueryResult res = query(index, q, cfg);

      std::size_t votes = 0;
      for (const Candidate& c : res.ranked_candidates) votes += c.votes;
      CHECK(votes == cfg.n_rep);

      CHECK(res.refined_distances.size() <= cfg.n_back);
      CHECK(res.refined_distances.count(res.winner) == 1);
      for (const auto& [label, d] : res.refined_distances) {
        CHECK(res.refined_distances.at(res.winner) <= d);
      }

      std::set<std::size_t> members(res.pool_members.begin(), res.pool_members.end());
      CHECK(members.size() == cfg.n_rep);
      CHECK(*members.rbegin() < index.pool().k);
      CHECK(res.repetitions_used == cfg.n_rep);
      CHECK(res.seed_used == cfg.rng_seed);
      CHECK(res.counters.sketch_solves == index.size() * cfg.n_rep);
      CHECK(res.counters.ambient_solves <= cfg.n_back);

      for (std::size_t i = 1; i < res.ranked_candidates.size(); ++i) {
        const Candidate& a = res.ranked_candidates[i - 1];
        const Candidate& b = res.ranked_candidates[i];
        if (a.votes > 0 && b.votes > 0) {
          const bool ordered = a.votes > b.votes ||
                               (a.votes == b.votes &&
                                (a.best_projected_distance < b.best_projected_distance ||
                                 (a.best_projected_distance == b.best_projected_distance &&
                                  a.label < b.label)));
          CHECK(ordered);
        }
        CHECK_FALSE((a.votes == 0 && b.votes > 0));
      }
      CHECK(res.ranked_candidates.size() >= std::min(cfg.n_back, index.size()));

      const ExhaustiveResult ex = exhaustive_search(index.subspaces(), index.labels(), q);
      if (res.refined_distances.count(ex.winner) == 1) CHECK(res.winner == ex.winner);

      const QueryResult again = query(index, q, cfg);
      CHECK(again.winner == res.winner);
      CHECK(again.refined_distances == res.refined_distances);
      CHECK(again.pool_members == res.pool_members);
    }
  }

  TEST_CASE("N_back = n reproduces exhaustive search") {
    const SearchIndex index = small_index(7, 50, 2, 4, 6, 9);
    const Database db{index.subspaces(), index.labels()};
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
      const Vector q = make_query(db, 0.3, Seed{trial}).query;
      QueryConfig cfg;
      cfg.n_rep = 2;
      cfg.n_back = index.size();
      const QueryResult res = query(index, q, cfg);
      const ExhaustiveResult ex = exhaustive_search(index.subspaces(), index.labels(), q);
      CHECK(res.winner == ex.winner);
      CHECK(res.counters.ambient_solves == index.size());
    }
  }

  TEST_CASE("query config validation") {
    const SearchIndex index = small_index(4, 30, 2, 3, 6);
    QueryConfig cfg;
    cfg.n_rep = 4;
    CHECK_THROWS_CODE(query(index, gaussian_vector(30, 1), cfg), ErrorCode::kConfigInvalid);
    cfg.n_rep = 0;
    CHECK_THROWS_CODE(query(index, gaussian_vector(30, 1), cfg), ErrorCode::kConfigInvalid);
    cfg.n_rep = 1;
    cfg.n_back = 5;
    CHECK_THROWS_CODE(query(index, gaussian_vector(30, 1), cfg), ErrorCode::kConfigInvalid);
    cfg.n_back = 0;
    CHECK_THROWS_CODE(query(index, gaussian_vector(30, 1), cfg), ErrorCode::kConfigInvalid);
    cfg.n_back = 1;
    CHECK_THROWS_CODE(query(index, gaussian_vector(29, 1), cfg), ErrorCode::kShapeMismatch);
  }

  TEST_CASE("exhaustive search") {
    const auto subspaces = random_subspaces(2, 40, 3, 13);
    const Vector q = matvec(subspaces[0].basis(), Vector{1, 2, 3});
    const ExhaustiveResult res = exhaustive_search(subspaces, {"first", "second"}, q);
    CHECK(res.winner == "first");
    CHECK(res.distances.at("first") <= 1e-7);
    CHECK(res.distances.at("second") > 0.1);

    const auto many = random_subspaces(6, 40, 3, 14);
    const Vector p = gaussian_vector(40, 15);
    const auto labels = default_labels(6);
    const std::string winner = exhaustive_search(many, labels, p).winner;
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[1], perm[4]);
    std::vector<Subspace> shuffled;
    std::vector<std::string> shuffled_labels;
    for (std::size_t i : perm) {
      shuffled.push_back(many[i]);
      shuffled_labels.push_back(labels[i]);
    }
    CHECK(exhaustive_search(shuffled, shuffled_labels, p).winner == winner);
    CHECK(exhaustive_search(many, labels, p, {}, 3).distances ==
          exhaustive_search(many, labels, p).distances);
  }

  TEST_CASE("exhaustive ties resolve to the smallest label") {
    const auto one = random_subspaces(1, 20, 2, 16);
    const std::vector<Subspace> twins = {one[0], one[0]};
    const ExhaustiveResult res = exhaustive_search(twins, {"zeta", "alpha"}, gaussian_vector(20, 2));
    CHECK(res.winner == "alpha");
  }

  TEST_CASE("distance gap") {
    const GapReport g = distance_gap({{"a", 1.0}, {"b", 2.0}, {"c", 5.0}});
    CHECK(g.eta == 2.0);
    CHECK(g.nearest == "a");
    CHECK(g.second == "b");
    CHECK(std::isinf(distance_gap({{"a", 0.0}, {"b", 3.0}}).eta));
    CHECK(distance_gap({{"a", 0.0}, {"b", 0.0}}).eta == 1.0);
    CHECK_THROWS_CODE(distance_gap({{"a", 1.0}}), ErrorCode::kTooFewSubspaces);
    CHECK_THROWS_CODE(distance_gap({{"a", 1.0}, {"b", -1.0}}), ErrorCode::kDomainError);
  }

  TEST_CASE("distance gap shrinks with corruption") {
    auto median_eta = [](double theta) {
      std::vector<double> etas;
      for (std::uint64_t s = 0; s < 15; ++s) {
        etas.push_back(make_scenario(10, 200, 3, theta, Seed{s}).eta);
      }
      std::sort(etas.begin(), etas.end());
      return etas[etas.size() / 2];
    };
    CHECK(median_eta(0.05) > median_eta(0.3));
  }

  TEST_CASE("index round trip") {
    const SearchIndex index = small_index();
    const std::string bytes = serialize(index);
    CHECK(bytes.substr(0, 6) == std::string("L1IX1\0", 6));
    CHECK(static_cast<unsigned char>(bytes[6]) == 1);

    std::istringstream in(bytes, std::ios::binary);
    const SearchIndex loaded = read_index(in);
    CHECK(loaded.labels() == index.labels());
    CHECK(loaded.pool().master_seed == index.pool().master_seed);
    CHECK(loaded.pool().matrices == index.pool().matrices);
    for (std::size_t j = 0; j < index.pool().k; ++j)
      for (std::size_t i = 0; i < index.size(); ++i)
        CHECK(loaded.projected(j, i) == index.projected(j, i));
    for (std::size_t i = 0; i < index.size(); ++i)
      CHECK(loaded.subspaces()[i].basis() == index.subspaces()[i].basis());
    CHECK(projection_consistency_error(loaded) == 0.0);
    CHECK(serialize(loaded) == bytes);
  }

  TEST_CASE("index file corruption is detected") {
    const std::string bytes = serialize(small_index());
    for (std::size_t cut : {0ul, 5ul, 20ul, 60ul, bytes.size() / 2, bytes.size() - 1}) {
      std::istringstream in(bytes.substr(0, cut), std::ios::binary);
      CHECK_THROWS_CODE(read_index(in), ErrorCode::kFormatError);
    }
    std::string flipped = bytes;
    flipped[bytes.size() - 100] ^= 0x01;
    std::istringstream in_flipped(flipped, std::ios::binary);
    CHECK_THROWS_CODE(read_index(in_flipped), ErrorCode::kChecksumMismatch);

    std::string version = bytes;
    version[6] = 2;
    std::istringstream in_version(version, std::ios::binary);
    CHECK_THROWS_CODE(read_index(in_version), ErrorCode::kFormatError);

    std::istringstream trailing(bytes + "x", std::ios::binary);
    CHECK_THROWS_CODE(read_index(trailing), ErrorCode::kFormatError);

    CHECK_THROWS_CODE(load_index("/nonexistent/dir/index.l1ix"), ErrorCode::kIoError);
  }

  TEST_CASE("CRC-64/XZ check value") {
    CHECK(crc64("123456789") == 0x995DC9BBDF1939FAull);
    CHECK(crc64("") == 0);
  }
}
