// Offline equilibrium computation.
//
// The leader's expected utility is linear inside every best-response region,
// so the optimum is the max over regions of a small LP. Two wrinkles:
//
//  * Achievability. A weakly feasible mapping only matters if the
//    deterministic tie rule actually selects it somewhere; a boundary-only
//    mapping whose own witness classifies to a neighbouring region promises
//    a payoff no leader strategy realizes. Such regions are skipped, which
//    keeps every reported optimum attainable (up to an arbitrarily small
//    interior nudge) and keeps regret nonnegative.
//
//  * Vertex consistency. LP optima sit on region facets, where the tie rule
//    may flip a follower to the neighbouring cell. Returned strategies are
//    therefore nudged toward the region witness just far enough that they
//    classify back to the winning mapping; the reported value is the exact
//    LP supremum, which the nudged point approaches within ~1e-9.

#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include "bsg/game.hpp"
#include "bsg/geometry.hpp"
#include "bsg/linprog.hpp"
#include "bsg/types.hpp"

namespace bsg {

struct Equilibrium {
  MixedStrategy x_star;
  double value = 0.0;
  BestResponseMapping mapping;
};

// Sparse weighting of type profiles (an empirical distribution, or an exact
// one densified). Weights are nonnegative and sum to 1.
struct WeightedProfiles {
  std::vector<std::pair<TypeProfile, double>> items;
};

inline WeightedProfiles weights_from_distribution(const TypeDistribution& d) {
  const long long profiles =
      pow_or_throw(d.type_count(), d.followers(), kProfileCap, "K^n");
  WeightedProfiles w;
  TypeProfile theta;
  for (long long idx = 0; idx < profiles; ++idx) {
    const double p = d.prob_flat(idx);
    if (p <= 0.0) continue;
    profile_from_index(idx, d.followers(), d.type_count(), theta.types);
    w.items.emplace_back(theta, p);
  }
  return w;
}

inline WeightedProfiles weights_from_samples(std::span<const TypeProfile> samples) {
  if (samples.empty())
    throw ValidationError("weights_from_samples: empty sample list");
  std::map<std::vector<int>, int> counts;
  for (const auto& s : samples) counts[s.types] += 1;
  WeightedProfiles w;
  const double t = static_cast<double>(samples.size());
  for (const auto& [types, c] : counts)
    w.items.emplace_back(TypeProfile{types}, static_cast<double>(c) / t);
  return w;
}

// c(l) = sum_(theta,p) p * u(l, W(theta)): the per-leader-action objective of
// the region LP under the given weighting.
inline std::vector<double> region_objective(const PublicView& view,
                                            const BestResponseMapping& w,
                                            const WeightedProfiles& weights) {
  std::vector<double> c(static_cast<std::size_t>(view.L), 0.0);
  for (const auto& [theta, p] : weights.items) {
    const ActionProfile a = w.apply(theta);
    for (int l = 0; l < view.L; ++l)
      c[static_cast<std::size_t>(l)] += p * view.leader_utility.at(l, a);
  }
  return c;
}

// max_{x in R(W)} sum_theta p(theta) u(x, W(theta)).
inline LpResult optimal_in_region(const PublicView& view, const Region& region,
                                  const WeightedProfiles& weights) {
  return lp_maximize(region_objective(view, region.mapping, weights),
                     region.halfspaces);
}

// True iff the tie rule selects this mapping at its own witness.
inline bool region_achieved(const PublicView& view, const Region& region) {
  return classify(view, region.witness) == region.mapping;
}

// Smallest nudge of x toward the region witness that classifies back to the
// region's mapping. Falls back to the witness itself.
inline MixedStrategy region_consistent_point(const PublicView& view,
                                             const Region& region,
                                             const MixedStrategy& x) {
  if (classify(view, x) == region.mapping) return x;
  const int L = view.L;
  for (double alpha = 1e-8; alpha <= 1e-4; alpha *= 4.0) {
    std::vector<double> p(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l)
      p[static_cast<std::size_t>(l)] =
          (1.0 - alpha) * x(l) + alpha * region.witness(l);
    MixedStrategy cand(std::move(p));
    if (classify(view, cand) == region.mapping) return cand;
  }
  return region.witness;
}

namespace detail {

inline Equilibrium optimize_over_regions(const PublicView& view,
                                         std::span<const Region> regions,
                                         const WeightedProfiles& weights) {
  std::vector<const Region*> candidates;
  for (const Region& r : regions)
    if (region_achieved(view, r)) candidates.push_back(&r);
  if (candidates.empty())  // degenerate arrangements
    for (const Region& r : regions) candidates.push_back(&r);

  const Region* best_region = nullptr;
  LpResult best_lp;
  for (const Region* r : candidates) {
    const LpResult lp = optimal_in_region(view, *r, weights);
    if (lp.status != LpStatus::kOptimal) continue;
    // strict improvement only: ties stay with the lexicographically
    // smallest mapping (regions arrive sorted)
    if (best_region == nullptr || lp.value > best_lp.value) {
      best_region = r;
      best_lp = lp;
    }
  }
  if (best_region == nullptr)
    throw ValidationError("optimize_over_regions: no feasible region");
  Equilibrium eq;
  eq.x_star = region_consistent_point(view, *best_region, best_lp.x);
  eq.value = best_lp.value;
  eq.mapping = best_region->mapping;
  return eq;
}

}  // namespace detail

inline Equilibrium offline_optimal(const PublicView& view,
                                   const TypeDistribution& dist,
                                   std::span<const Region> regions) {
  return detail::optimize_over_regions(view, regions,
                                       weights_from_distribution(dist));
}

inline Equilibrium offline_optimal(const PublicView& view,
                                   const TypeDistribution& dist) {
  const std::vector<Region> regions = enumerate_regions(view);
  return offline_optimal(view, dist, regions);
}

inline Equilibrium empirical_optimal(const PublicView& view,
                                     std::span<const TypeProfile> samples,
                                     std::span<const Region> regions) {
  return detail::optimize_over_regions(view, regions,
                                       weights_from_samples(samples));
}

inline Equilibrium empirical_optimal(const PublicView& view,
                                     std::span<const TypeProfile> samples) {
  const std::vector<Region> regions = enumerate_regions(view);
  return empirical_optimal(view, samples, regions);
}

// ---------------------------------------------------------------------------
// One-shot LP reformulation. Variables x(W, l) form a joint distribution
// over (mapping, leader action); incentive-compatibility rows force each
// mapping's conditional to live in its own region. The optimum is then
// massaged into a single nonzero row by pairwise mass transfers that never
// decrease the objective, and that row is the equilibrium strategy.

struct ReformResult {
  Equilibrium eq;
  // objective value before any transfer and after each transfer step;
  // nondecreasing by construction
  std::vector<double> transfer_objectives;
};

inline ReformResult lp_reform_optimal_detailed(const PublicView& view,
                                               const TypeDistribution& dist) {
  const long long all_rows =
      detail::checked_pow(view.A, view.n * view.K, 100000 / view.L);
  if (all_rows < 0)
    throw CapExceededError("lp_reform_optimal: A^(nK) * L exceeds variable cap");

  const std::vector<Region> all_regions = enumerate_regions(view);
  std::vector<const Region*> rows;
  for (const Region& r : all_regions)
    if (region_achieved(view, r)) rows.push_back(&r);
  if (rows.empty())
    for (const Region& r : all_regions) rows.push_back(&r);

  const WeightedProfiles weights = weights_from_distribution(dist);
  const int R = static_cast<int>(rows.size());
  const int L = view.L;
  std::vector<std::vector<double>> obj(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r)
    obj[static_cast<std::size_t>(r)] =
        region_objective(view, rows[static_cast<std::size_t>(r)]->mapping, weights);

  // variable order: (W row-major over sorted mappings, then l), followed by
  // one slack per IC row
  int ic_rows = 0;
  for (int r = 0; r < R; ++r)
    ic_rows += static_cast<int>(rows[static_cast<std::size_t>(r)]->halfspaces.size());

  lp::Problem p;
  p.rows = 1 + ic_rows;
  p.cols = R * L + ic_rows;
  p.a.assign(static_cast<std::size_t>(p.rows) * p.cols, 0.0);
  p.b.assign(static_cast<std::size_t>(p.rows), 0.0);
  p.c.assign(static_cast<std::size_t>(p.cols), 0.0);
  for (int r = 0; r < R; ++r)
    for (int l = 0; l < L; ++l) {
      p.at(0, r * L + l) = 1.0;
      p.c[static_cast<std::size_t>(r * L + l)] =
          -obj[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)];
    }
  p.b[0] = 1.0;
  int row = 1;
  for (int r = 0; r < R; ++r)
    for (const Halfspace& h : rows[static_cast<std::size_t>(r)]->halfspaces) {
      for (int l = 0; l < L; ++l)
        p.at(row, r * L + l) = -h.normal[static_cast<std::size_t>(l)];
      p.at(row, R * L + (row - 1)) = 1.0;
      ++row;
    }

  const lp::Solution s = lp::solve_min(p);
  if (!s.feasible)
    throw ValidationError("lp_reform_optimal: reformulation LP infeasible");

  // Single-row extraction by pairwise mass transfers.
  std::vector<std::vector<double>> mass(static_cast<std::size_t>(R),
                                        std::vector<double>(static_cast<std::size_t>(L)));
  for (int r = 0; r < R; ++r)
    for (int l = 0; l < L; ++l)
      mass[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)] =
          s.y[static_cast<std::size_t>(r * L + l)];

  auto row_mass = [&](int r) {
    double t = 0.0;
    for (int l = 0; l < L; ++l) t += mass[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)];
    return t;
  };
  auto objective_of = [&]() {
    double t = 0.0;
    for (int r = 0; r < R; ++r)
      for (int l = 0; l < L; ++l)
        t += mass[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)] *
             obj[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)];
    return t;
  };

  ReformResult out;
  out.transfer_objectives.push_back(objective_of());
  for (;;) {
    std::vector<int> live;
    for (int r = 0; r < R; ++r)
      if (row_mass(r) > 1e-12) live.push_back(r);
    if (live.size() <= 1) break;
    // receiver: highest conditional utility, ties to the lowest index
    int recv = live.front();
    double recv_u = -1.0;
    for (int r : live) {
      const double pm = row_mass(r);
      double u = 0.0;
      for (int l = 0; l < L; ++l)
        u += mass[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)] *
             obj[static_cast<std::size_t>(r)][static_cast<std::size_t>(l)];
      u /= pm;
      if (u > recv_u + 1e-15) {
        recv_u = u;
        recv = r;
      }
    }
    const int donor = live.front() == recv ? live[1] : live.front();
    const double pd = row_mass(donor);
    const double pr = row_mass(recv);
    const double scale = (pr + pd) / pr;
    for (int l = 0; l < L; ++l) {
      mass[static_cast<std::size_t>(recv)][static_cast<std::size_t>(l)] *= scale;
      mass[static_cast<std::size_t>(donor)][static_cast<std::size_t>(l)] = 0.0;
    }
    out.transfer_objectives.push_back(objective_of());
  }

  int final_row = 0;
  for (int r = 0; r < R; ++r)
    if (row_mass(r) > 1e-12) final_row = r;
  const double pm = row_mass(final_row);
  std::vector<double> strat(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l)
    strat[static_cast<std::size_t>(l)] =
        mass[static_cast<std::size_t>(final_row)][static_cast<std::size_t>(l)] / pm;

  const Region& win = *rows[static_cast<std::size_t>(final_row)];
  out.eq.mapping = win.mapping;
  out.eq.value = -s.objective;
  out.eq.x_star = region_consistent_point(
      view, win, detail::strategy_from_lp(strat, L));
  return out;
}

inline Equilibrium lp_reform_optimal(const PublicView& view,
                                     const TypeDistribution& dist) {
  return lp_reform_optimal_detailed(view, dist).eq;
}

}  // namespace bsg
