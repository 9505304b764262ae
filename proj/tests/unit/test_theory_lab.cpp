#include <numbers>

#include "helpers.hpp"
#include "l1sq/theory_lab.hpp"

using namespace l1sq;
using l1sq::test::gaussian_vector;
using std::numbers::pi;

TEST_SUITE("theory_lab") {
  TEST_CASE("Wilson interval") {
    const WilsonInterval w = wilson_interval(50, 100);
    CHECK(w.lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(w.hi == doctest::Approx(0.5962).epsilon(1e-3));
    CHECK(wilson_interval(0, 10).lo == 0.0);
    CHECK(wilson_interval(10, 10).hi == 1.0);
    for (std::size_t s : {0ul, 3ul, 37ul, 99ul, 100ul}) {
      const ProbeReport r = ProbeReport::from_counts(s, 100);
      CHECK(r.p_hat == static_cast<double>(s) / 100.0);
      CHECK(r.wilson.lo <= r.p_hat);
      CHECK(r.p_hat <= r.wilson.hi);
    }
    const double narrow = wilson_interval(2500, 10000).width();
    const double wide = wilson_interval(25, 100).width();
    CHECK(wide / narrow == doctest::Approx(10.0).epsilon(0.05));
  }

  TEST_CASE("uncorrupted scenario") {
    const Scenario s = make_scenario(6, 80, 3, 0.0, Seed{1});
    CHECK(std::isinf(s.eta));
    CHECK(s.nearest_label == s.true_label);
    CHECK(s.corrupted_entries.empty());
    CHECK(s.query == s.clean_query);
  }

  TEST_CASE("scenario construction audit") {
    const Scenario s = make_scenario(5, 200, 3, 0.12, Seed{2});
    CHECK(s.corrupted_entries.size() == 24);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < 200; ++i) differ += s.query[i] != s.clean_query[i] ? 1 : 0;
    CHECK(differ == 24);
    for (std::size_t i : s.corrupted_entries) {
      CHECK(std::abs(s.query[i] - s.clean_query[i]) <= 1.0);
    }
    double peak = 0.0;
    for (double v : s.clean_query.values()) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(1.0));
    CHECK(s.eta >= 1.0);
    CHECK(s.distances.size() == 5);
    CHECK(s.nearest_label == distance_gap(s.distances).nearest);

    CHECK_THROWS_CODE(make_scenario(1, 20, 2, 0.1, Seed{1}), ErrorCode::kConfigInvalid);
    CHECK_THROWS_CODE(make_scenario(3, 20, 2, 1.0, Seed{1}), ErrorCode::kConfigInvalid);
    CHECK_THROWS_CODE(make_scenario(3, 20, 2, -0.1, Seed{1}), ErrorCode::kConfigInvalid);
  }

  TEST_CASE("scenarios are deterministic") {
    const Scenario a = make_scenario(4, 60, 2, 0.1, Seed{3});
    const Scenario b = make_scenario(4, 60, 2, 0.1, Seed{3});
    CHECK(a.query == b.query);
    CHECK(a.distances == b.distances);
    CHECK(a.true_label == b.true_label);
  }

  TEST_CASE("expansion probability") {
    const Vector w = gaussian_vector(20, 1);
    const ProbeReport r = expansion_probability(w, 35, 10000, Seed{2});
    CHECK(r.trials == 10000);
    CHECK(r.p_hat > 0.25);
    CHECK(r.p_hat < 0.32);

    const ProbeReport scaled = expansion_probability(7.0 * w, 35, 10000, Seed{3});
    CHECK(std::abs(scaled.p_hat - r.p_hat) <= 2.0 * r.wilson.width());

    Vector permuted(w.dim());
    for (std::size_t i = 0; i < w.dim(); ++i) {
      permuted[i] = (i % 2 == 0 ? -1.0 : 1.0) * w[w.dim() - 1 - i];
    }
    const ProbeReport full =
        expansion_probability(permuted, 35, 3000, Seed{4}, SamplingRoute::kFullMatrix);
    CHECK(std::abs(full.p_hat - r.p_hat) <= 2.0 * full.wilson.width());

    const ProbeReport two = expansion_probability(w, 2, 10000, Seed{5});
    const double product = std::pow(2.0 / pi * std::atan(2.0 / pi * std::log(2.0)), 2.0);
    CHECK(two.parameters.at("product_lower_bound") == doctest::Approx(product));
    CHECK(two.p_hat >= product);

    CHECK_THROWS_CODE(expansion_probability(Vector(3), 10, 100, Seed{1}), ErrorCode::kZeroVector);
    CHECK_THROWS_CODE(expansion_probability(w, 1, 100, Seed{1}), ErrorCode::kConfigInvalid);
  }

  TEST_CASE("expansion is deterministic per seed") {
    const Vector w = gaussian_vector(10, 9);
    CHECK(expansion_probability(w, 16, 500, Seed{1}).successes ==
          expansion_probability(w, 16, 500, Seed{1}).successes);
  }

  TEST_CASE("lower tail bound") {
    CHECK(lower_tail_bound(100, 0.5, 0.5) == doctest::Approx(10.0 * std::exp(-0.25 * 10.0 / (2.0 * pi))));
    CHECK(lower_tail_bound(100, 0.5, 0.5) == doctest::Approx(6.717).epsilon(1e-3));
    const ProbeReport r100 = lower_tail_probability(100, 0.5, 0.5, 2000, Seed{1});
    CHECK(r100.p_hat <= r100.parameters.at("analytic_bound"));

    const ProbeReport r400 = lower_tail_probability(400, 0.5, 0.5, 100000, Seed{2});
    CHECK(r400.p_hat <= r400.parameters.at("analytic_bound"));

    for (std::size_t d : {64ul, 256ul, 1024ul}) {
      for (double delta : {0.3, 0.5}) {
        const ProbeReport r = lower_tail_probability(d, 0.5, delta, 5000, Seed{d});
        CHECK(r.p_hat <= r.parameters.at("analytic_bound") + 3.0 * r.wilson.width());
      }
    }
    CHECK_THROWS_CODE(lower_tail_probability(100, 0.0, 0.5, 10, Seed{1}),
                      ErrorCode::kConfigInvalid);
    CHECK_THROWS_CODE(lower_tail_probability(100, 0.5, 1.0, 10, Seed{1}),
                      ErrorCode::kConfigInvalid);
    CHECK_THROWS_CODE(lower_tail_probability(1, 0.5, 0.5, 10, Seed{1}),
                      ErrorCode::kConfigInvalid);
  }

  TEST_CASE("lower tail tightness") {
    const TightnessReport rep = lower_tail_tightness(256, 0.5, 10000, Seed{1}, Seed{2});
    CHECK(rep.proof_c == doctest::Approx(4.0 * std::log(2.0) / pi));
    CHECK(rep.calibrated_c >= 0.0);
    CHECK(rep.holds);
    CHECK(rep.verification.p_hat >= rep.calibrated_bound);
    CHECK(rep.calibration.trials == 10000);
  }

  TEST_CASE("Lipschitz probe") {
    const Subspace line = orthonormalize(DenseMatrix::from_rows({{1}, {0}, {0}, {0}}));
    const DenseMatrix p = sample_cauchy_matrix(10, 4, Seed{1});
    const LipschitzEstimate est = lipschitz_probe(p, line, 1000, Seed{2});
    CHECK(est.l_hat == doctest::Approx(l1_norm(p.column(0))).epsilon(1e-12));

    const Subspace s = orthonormalize(l1sq::test::gaussian_matrix(30, 3, 3));
    const DenseMatrix p2 = sample_cauchy_matrix(12, 30, Seed{4});
    const LipschitzEstimate e = lipschitz_probe(p2, s, 1000, Seed{5});
    const Vector w = matvec(s.basis(), e.argmax_coefficients);
    CHECK(l1_norm(matvec(p2, w)) / l1_norm(w) == doctest::Approx(e.l_hat));
    const Vector w9 = matvec(s.basis(), 9.0 * e.argmax_coefficients);
    CHECK(l1_norm(matvec(p2, w9)) / l1_norm(w9) == doctest::Approx(e.l_hat).epsilon(1e-12));
    CHECK(lipschitz_probe(p2, s, 3000, Seed{5}).l_hat >= e.l_hat);

    CHECK_THROWS_CODE(lipschitz_probe(p2, line, 10, Seed{1}), ErrorCode::kShapeMismatch);
  }

  TEST_CASE("Lipschitz tail bound") {
    const std::size_t d = 40, r = 2;
    const double t = 500.0;
    const double bound = lipschitz_tail_bound(d, r, t);
    const double a = 2.0 * d * (r + 1) / pi;
    const double b = 2.0 * d / (pi * t);
    for (double B = 0.5; B < 2000.0; B *= 1.3) {
      CHECK(bound <= a / B + b * std::log(std::sqrt(1.0 + B * B)) + 1e-12);
    }
    CHECK(lipschitz_tail_bound(d, r, 2.0 * t) < bound);
    const double t01 = lipschitz_t_for_bound(d, r, 0.1);
    CHECK(lipschitz_tail_bound(d, r, t01) <= 0.1 + 1e-9);
    CHECK(lipschitz_tail_bound(d, r, 0.99 * t01) > 0.1);
    CHECK_THROWS_CODE(lipschitz_tail_bound(d, r, 0.0), ErrorCode::kDomainError);

    const Subspace s = orthonormalize(l1sq::test::gaussian_matrix(60, r + 1, 7));
    const ProbeReport check = lipschitz_bound_check(s, d, t01, 60, 1000, Seed{8});
    CHECK(check.p_hat <= 0.1 + 3.0 * check.wilson.width());
    CHECK(check.parameters.at("analytic_bound") <= 0.1 + 1e-9);
  }

  TEST_CASE("success curve") {
    ScenarioParams params;
    params.n = 10;
    params.ambient_dim = 300;
    params.rank = 3;
    params.theta = 0.1;
    params.scenarios = 4;
    const std::vector<Scenario> scenarios = make_scenarios(params, Seed{1});
    const auto curve = success_curve(scenarios, {5, 40}, 200, Seed{2});
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].parameters.at("d") == 5.0);
    CHECK(curve[0].trials == 200);
    CHECK(curve[0].p_hat + 3.0 * curve[0].wilson.width() < curve[1].p_hat);

    const auto again = success_curve(scenarios, {5}, 50, Seed{2}, {}, 3);
    CHECK(again[0].successes == success_curve(scenarios, {5}, 50, Seed{2})[0].successes);

    CHECK_THROWS_CODE(success_curve(scenarios, {}, 10, Seed{1}), ErrorCode::kConfigInvalid);
  }

  TEST_CASE("duplicated subspace succeeds under the any-of-nearest rule") {
    const Database one = make_database(1, 50, 2, Seed{3});
    Scenario s;
    s.subspaces = {one.subspaces[0], one.subspaces[0]};
    s.labels = {"S000", "S001"};
    s.query = matvec(one.subspaces[0].basis(), Vector{1.0, -1.0});
    evaluate_scenario(s);
    CHECK(s.eta == 1.0);
    const auto curve = success_curve(std::vector<Scenario>{s}, {3, 8}, 40, Seed{4});
    for (const ProbeReport& r : curve) CHECK(r.p_hat == 1.0);
  }

  TEST_CASE("arctan sum inequality") {
    CHECK(std::atan(1.0) > std::log(2.0));
    CHECK(std::atan(1.0) + std::atan(0.5) == doctest::Approx(1.249).epsilon(1e-3));
    const ArctanSumCheck one = arctan_sum_check(1);
    CHECK(one.holds);
    CHECK(one.min_slack == doctest::Approx(pi / 4.0 - std::log(2.0)));
    CHECK(arctan_sum_check(2).holds);
    const ArctanSumCheck big = arctan_sum_check(1'000'000);
    CHECK(big.holds);
    CHECK(big.first_failure == 0);
    CHECK(big.min_slack > 0.0);
    CHECK_THROWS_CODE(arctan_sum_check(0), ErrorCode::kConfigInvalid);
  }
}
