#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bsg/linprog.hpp"
#include "bsg/rng.hpp"

using namespace bsg;

namespace {

Halfspace hs(std::vector<double> d) { return Halfspace{std::move(d)}; }

double dot(std::span<const double> c, const MixedStrategy& x) {
  double v = 0.0;
  for (int l = 0; l < x.size(); ++l) v += c[static_cast<std::size_t>(l)] * x(l);
  return v;
}

bool feasible_point(const MixedStrategy& x, std::span<const Halfspace> cons) {
  for (const auto& h : cons) {
    double d = 0.0;
    for (int l = 0; l < x.size(); ++l)
      d += x(l) * h.normal[static_cast<std::size_t>(l)];
    if (d < -kFeasEps) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("unconstrained maximum sits at the best simplex vertex") {
  const std::vector<double> c{1.0, 0.0};
  const LpResult r = lp_maximize(c, {});
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.value == 1.0);
  CHECK(r.x == MixedStrategy::unit(2, 0));
  CHECK(r.is_vertex);

  // exact argmax for arbitrary objectives
  SplitMix64 rng = make_stream(11, 0, StreamPurpose::kAux);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> obj(4);
    for (auto& v : obj) v = rng.next_double();
    const LpResult m = lp_maximize(obj, {});
    CHECK(m.value == *std::max_element(obj.begin(), obj.end()));
  }
}

TEST_CASE("binding halfspace forces the symmetric optimum") {
  const std::vector<double> c{1.0, 0.0};
  const std::vector<Halfspace> cons{hs({-1.0, 1.0})};  // x2 >= x1
  const LpResult r = lp_maximize(c, cons);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.value == Catch::Approx(0.5).margin(1e-9));
  CHECK(r.x(0) == Catch::Approx(0.5).margin(1e-9));
  CHECK(r.x(1) == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("contradiction with normalization is infeasible") {
  const std::vector<double> c{1.0, 0.0};
  const std::vector<Halfspace> cons{hs({-1.0, -1.0})};  // <x,d> = -1 on simplex
  CHECK(lp_maximize(c, cons).status == LpStatus::kInfeasible);
  CHECK_FALSE(lp_feasible_point(2, cons).feasible);
}

TEST_CASE("feasible point maximizes slack") {
  SECTION("no constraints: barycenter") {
    const FeasibleResult f = lp_feasible_point(3, {});
    REQUIRE(f.feasible);
    CHECK(f.x == MixedStrategy::uniform(3));
    CHECK(std::isinf(f.slack));
  }
  SECTION("equality-only region has zero slack") {
    const std::vector<Halfspace> cons{hs({1.0, -1.0}), hs({-1.0, 1.0})};
    const FeasibleResult f = lp_feasible_point(2, cons);
    REQUIRE(f.feasible);
    CHECK(f.slack == 0.0);
    CHECK(f.x(0) == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("interior witness for a full-dimensional region") {
    const std::vector<Halfspace> cons{hs({1.0, -1.0})};  // x1 >= x2
    const FeasibleResult f = lp_feasible_point(2, cons);
    REQUIRE(f.feasible);
    CHECK(f.slack > 0.1);
    CHECK(f.x(0) > f.x(1));
  }
}

TEST_CASE("optima are feasible and dominate random feasible points") {
  SplitMix64 rng = make_stream(23, 0, StreamPurpose::kAux);
  int checked_points = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const int L = 2 + static_cast<int>(rng.next_below(3));
    std::vector<double> c(static_cast<std::size_t>(L));
    for (auto& v : c) v = rng.next_double();
    std::vector<Halfspace> cons;
    const int m = 1 + static_cast<int>(rng.next_below(4));
    for (int j = 0; j < m; ++j) {
      std::vector<double> d(static_cast<std::size_t>(L));
      for (auto& v : d) v = 2.0 * rng.next_double() - 1.0;
      cons.push_back(hs(std::move(d)));
    }

    const LpResult r = lp_maximize(c, cons);
    if (r.status != LpStatus::kOptimal) continue;
    REQUIRE(feasible_point(r.x, cons));
    CHECK(std::fabs(dot(c, r.x) - r.value) <= 1e-8);

    for (int t = 0; t < 200; ++t) {
      const MixedStrategy y(sample_simplex(rng, L));
      if (!feasible_point(y, cons)) continue;
      ++checked_points;
      CHECK(dot(c, y) <= r.value + 1e-8);
    }
  }
  CHECK(checked_points > 100);
}

TEST_CASE("identical inputs give bitwise-identical results") {
  SplitMix64 rng = make_stream(31, 0, StreamPurpose::kAux);
  for (int inst = 0; inst < 10; ++inst) {
    const int L = 2 + static_cast<int>(rng.next_below(3));
    std::vector<double> c(static_cast<std::size_t>(L));
    for (auto& v : c) v = rng.next_double();
    std::vector<Halfspace> cons;
    for (int j = 0; j < 3; ++j) {
      std::vector<double> d(static_cast<std::size_t>(L));
      for (auto& v : d) v = 2.0 * rng.next_double() - 1.0;
      cons.push_back(hs(std::move(d)));
    }
    const LpResult a = lp_maximize(c, cons);
    const LpResult b = lp_maximize(c, cons);
    REQUIRE(a.status == b.status);
    if (a.status == LpStatus::kOptimal) {
      CHECK(a.value == b.value);
      CHECK(a.x == b.x);
    }
    const FeasibleResult fa = lp_feasible_point(L, cons);
    const FeasibleResult fb = lp_feasible_point(L, cons);
    REQUIRE(fa.feasible == fb.feasible);
    if (fa.feasible) {
      CHECK(fa.slack == fb.slack);
      CHECK(fa.x == fb.x);
    }
  }
}
