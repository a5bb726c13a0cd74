#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bsg/game.hpp"
#include "bsg/geometry.hpp"
#include "bsg/harness.hpp"
#include "bsg/solvers.hpp"

#include "fixtures.hpp"

using namespace bsg;

namespace {

constexpr int kGood = 0, kBad = 1;

const Region& find_region(const std::vector<Region>& regions,
                          const BestResponseMapping& w) {
  const int idx = region_index_of(regions, w);
  REQUIRE(idx >= 0);
  return regions[static_cast<std::size_t>(idx)];
}

// Lattice max of the weighted objective inside one region.
double region_grid_max(const PublicView& view, const Region& region,
                       const WeightedProfiles& weights, double step) {
  const auto c = region_objective(view, region.mapping, weights);
  const int N = static_cast<int>(std::lround(1.0 / step));
  double best = -1.0;
  for (int i = 0; i <= N; ++i) {
    const std::vector<double> x{static_cast<double>(i) / N,
                                static_cast<double>(N - i) / N};
    bool ok = true;
    for (const auto& h : region.halfspaces) {
      double dot = 0.0;
      for (int l = 0; l < 2; ++l)
        dot += x[static_cast<std::size_t>(l)] * h.normal[static_cast<std::size_t>(l)];
      if (dot < -kFeasEps) ok = false;
    }
    if (!ok) continue;
    double v = 0.0;
    for (int l = 0; l < 2; ++l)
      v += c[static_cast<std::size_t>(l)] * x[static_cast<std::size_t>(l)];
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

TEST_CASE("per-region optimum on the hard instance") {
  const GameInstance g1 = make_g1(0.2);
  const auto regions = enumerate_regions(g1.view());
  const Region& agree = find_region(regions, BestResponseMapping(1, 2, {kGood, kBad}));
  const WeightedProfiles w = weights_from_distribution(g1.distribution());

  const auto c = region_objective(g1.view(), agree.mapping, w);
  CHECK(c[0] == Catch::Approx(0.6).margin(1e-12));
  CHECK(c[1] == Catch::Approx(0.6).margin(1e-12));

  const LpResult lp = optimal_in_region(g1.view(), agree, w);
  REQUIRE(lp.status == LpStatus::kOptimal);
  CHECK(lp.value == Catch::Approx(0.6).margin(1e-9));
}

TEST_CASE("zero leader utility gives a zero optimum") {
  GameInstance g1 = make_g1(0.2);
  PublicView view = g1.view();
  view.leader_utility = LeaderUtility::dense(
      1, 2, 2, std::vector<double>(4, 0.0));
  const auto regions = enumerate_regions(view);
  const WeightedProfiles w = weights_from_distribution(g1.distribution());
  for (const auto& r : regions)
    CHECK(optimal_in_region(view, r, w).value == 0.0);
}

TEST_CASE("per-region optimum dominates a lattice search") {
  SplitMix64 rng = make_stream(303, 0, StreamPurpose::kAux);
  for (int inst = 0; inst < 10; ++inst) {
    const GameInstance g = gen_random_instance(
        1 + static_cast<int>(rng.next_below(2)), 2, 2, 2, DistKind::kGeneral,
        4000 + static_cast<std::uint64_t>(inst));
    const auto regions = enumerate_regions(g.view());
    const WeightedProfiles w = weights_from_distribution(g.distribution());
    for (const auto& r : regions) {
      const LpResult lp = optimal_in_region(g.view(), r, w);
      REQUIRE(lp.status == LpStatus::kOptimal);
      const double grid = region_grid_max(g.view(), r, w, 0.001);
      if (grid < 0.0) continue;  // lattice missed a thin region
      CHECK(lp.value <= grid + 1e-3);
      CHECK(lp.value >= grid - 1e-12);
    }
  }
}

TEST_CASE("offline optimum of the hard instance") {
  const GameInstance g1 = make_g1(0.2);
  const Equilibrium eq = offline_optimal(g1.view(), g1.distribution());
  CHECK(eq.value == Catch::Approx(0.6).margin(1e-9));
  CHECK(eq.x_star(0) >= eq.x_star(1));
  CHECK(eq.mapping == BestResponseMapping(1, 2, {kGood, kBad}));
  // the claimed value is attained by the returned strategy
  CHECK(leader_expected_utility(eq.x_star, g1.distribution(), g1.view()) ==
        Catch::Approx(eq.value).margin(1e-7));
}

TEST_CASE("offline optimum of the dominant fixture is x-independent") {
  const GameInstance g2 = make_g2();
  const Equilibrium eq = offline_optimal(g2.view(), g2.distribution());
  double expect = -1.0;
  SplitMix64 rng = make_stream(307, 0, StreamPurpose::kAux);
  for (int t = 0; t < 10; ++t) {
    const MixedStrategy x(sample_simplex(rng, 2));
    const double u = leader_expected_utility(x, g2.distribution(), g2.view());
    expect = std::max(expect, u);
  }
  CHECK(eq.value >= expect - 1e-9);
  CHECK(leader_expected_utility(eq.x_star, g2.distribution(), g2.view()) ==
        Catch::Approx(eq.value).margin(1e-7));
}

TEST_CASE("offline optimum agrees with brute force on random instances") {
  for (int seed = 1; seed <= 12; ++seed) {
    const GameInstance g = fixtures::oracle_suite_instance(seed);
    const Equilibrium eq = offline_optimal(g.view(), g.distribution());
    const auto brute = brute_force_optimal(g.view(), g.distribution(), 0.005);
    CHECK(eq.value >= brute.second - 1e-9);  // grid points are feasible plays
    CHECK(std::fabs(eq.value - brute.second) <= 2e-3);
    CHECK(leader_expected_utility(eq.x_star, g.distribution(), g.view()) ==
          Catch::Approx(eq.value).margin(1e-7));
  }
}

TEST_CASE("empirical optimum examples") {
  const GameInstance g1 = make_g1(0.2);
  SECTION("two +1 samples and one -1 sample") {
    const std::vector<TypeProfile> samples{{{0}}, {{0}}, {{1}}};
    const Equilibrium eq = empirical_optimal(g1.view(), samples);
    CHECK(eq.value == Catch::Approx(2.0 / 3.0).margin(1e-9));
    CHECK(eq.mapping == BestResponseMapping(1, 2, {kGood, kBad}));
  }
  SECTION("single sample point mass") {
    const std::vector<TypeProfile> samples{{{1}}};
    const Equilibrium eq = empirical_optimal(g1.view(), samples);
    CHECK(eq.value == Catch::Approx(1.0).margin(1e-9));  // type -1 can be sent Good
    CHECK(eq.mapping.at(0, 1) == kGood);
  }
  SECTION("empty sample list is rejected") {
    CHECK_THROWS_AS(empirical_optimal(g1.view(), std::vector<TypeProfile>{}),
                    ValidationError);
  }
}

TEST_CASE("empirical value concentrates around the offline value") {
  const GameInstance g = make_bench_instance();
  const Equilibrium offline = offline_optimal(g.view(), g.distribution());
  const int t = 10000;
  SplitMix64 rng = make_stream(313, 0, StreamPurpose::kTypes);
  std::vector<TypeProfile> samples;
  samples.reserve(t);
  for (int s = 0; s < t; ++s)
    samples.push_back(sample_profile(rng, g.distribution(), {}));
  const Equilibrium emp = empirical_optimal(g.view(), samples);

  const auto regions = enumerate_regions(g.view());
  const double band =
      std::sqrt(2.0 * g.view().L * std::log(3.0 * t) / t) +
      std::sqrt(std::log(static_cast<double>(regions.size()) / 0.05) / (2.0 * t));
  CHECK(std::fabs(leader_expected_utility(emp.x_star, g.distribution(), g.view()) -
                  offline.value) <= 2.0 * band);
}

TEST_CASE("single-round regret is bounded by four times the TV distance") {
  SplitMix64 rng = make_stream(317, 0, StreamPurpose::kAux);
  for (int inst = 0; inst < 15; ++inst) {
    const GameInstance g = gen_random_instance(
        2, 2, 2, 2, DistKind::kGeneral, 6000 + static_cast<std::uint64_t>(inst));
    const auto regions = enumerate_regions(g.view());
    const TypeDistribution d_hat =
        TypeDistribution::general(2, 2, sample_simplex(rng, 4));

    const Equilibrium best_true = offline_optimal(g.view(), g.distribution(), regions);
    const Equilibrium from_hat = offline_optimal(g.view(), d_hat, regions);
    const double achieved =
        leader_expected_utility(from_hat.x_star, g.distribution(), g.view());
    const double tv = tv_distance(g.distribution(), d_hat);
    CHECK(best_true.value - achieved <= 4.0 * tv + 1e-9);
  }
}

TEST_CASE("empirical utility band over region vertices (concentration smoke)") {
  const GameInstance g = make_bench_instance();
  const auto regions = enumerate_regions(g.view());
  std::vector<MixedStrategy> eval_points;
  for (const auto& r : regions)
    for (const auto& v : region_vertices(r)) eval_points.push_back(v);

  const int t = 4096;
  const double band =
      std::sqrt(2.0 * g.view().L * std::log(3.0 * t) / t) +
      std::sqrt(std::log(static_cast<double>(regions.size()) / 0.05) / (2.0 * t));

  int failures = 0;
  const int kTrials = 20;
  for (int trial = 0; trial < kTrials; ++trial) {
    SplitMix64 rng = make_stream(1000 + static_cast<std::uint64_t>(trial), 0,
                                 StreamPurpose::kTypes);
    std::vector<TypeProfile> samples;
    samples.reserve(t);
    for (int s = 0; s < t; ++s)
      samples.push_back(sample_profile(rng, g.distribution(), {}));

    double sup_err = 0.0;
    for (const auto& x : eval_points) {
      double emp = 0.0;
      for (const auto& theta : samples)
        emp += leader_action_utility(g.view(), x, best_response(x, theta, g.view()));
      emp /= t;
      sup_err = std::max(
          sup_err,
          std::fabs(leader_expected_utility(x, g.distribution(), g.view()) - emp));
    }
    if (sup_err > band) ++failures;
  }
  CHECK(failures <= 2);  // 5% level plus slack on 20 trials
}

TEST_CASE("LP reformulation matches the offline optimum") {
  SECTION("hard instance") {
    const GameInstance g1 = make_g1(0.2);
    const Equilibrium reform = lp_reform_optimal(g1.view(), g1.distribution());
    CHECK(reform.value == Catch::Approx(0.6).margin(1e-6));
  }
  SECTION("dominant fixture reduces to its single region") {
    const GameInstance g2 = make_g2();
    const auto regions = enumerate_regions(g2.view());
    REQUIRE(regions.size() == 1);
    const LpResult direct = optimal_in_region(
        g2.view(), regions[0], weights_from_distribution(g2.distribution()));
    const Equilibrium reform = lp_reform_optimal(g2.view(), g2.distribution());
    CHECK(reform.value == Catch::Approx(direct.value).margin(1e-9));
    CHECK(reform.mapping == regions[0].mapping);
  }
  SECTION("random tiny instances") {
    for (int inst = 0; inst < 25; ++inst) {
      const GameInstance g = gen_random_instance(
          1, 2, 2, 1 + (inst % 2), DistKind::kGeneral,
          7000 + static_cast<std::uint64_t>(inst));
      const Equilibrium offline = offline_optimal(g.view(), g.distribution());
      const Equilibrium reform = lp_reform_optimal(g.view(), g.distribution());
      CHECK(std::fabs(offline.value - reform.value) <= 1e-6);
    }
  }
}

TEST_CASE("single-row extraction never decreases the objective") {
  for (int inst = 0; inst < 10; ++inst) {
    const GameInstance g = gen_random_instance(
        1, 2, 2, 2, DistKind::kGeneral, 8000 + static_cast<std::uint64_t>(inst));
    const ReformResult r = lp_reform_optimal_detailed(g.view(), g.distribution());
    for (std::size_t s = 1; s < r.transfer_objectives.size(); ++s)
      CHECK(r.transfer_objectives[s] >= r.transfer_objectives[s - 1] - 1e-12);
  }
}
