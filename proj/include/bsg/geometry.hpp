// Best-response regions: advantage hyperplanes, feasibility, classification,
// breadth-first enumeration, and region vertex enumeration.
//
// A mapping W assigns an action to every (follower, type) cell. Its region
// R(W) is the simplex subset where those actions are all weakly optimal,
// i.e. the intersection of the n*K*(A-1) advantage halfspaces. Weakly
// feasible mappings count as non-empty; boundary-only regions carry slack 0
// so callers can filter on dimensionality.

#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "bsg/game.hpp"
#include "bsg/linprog.hpp"
#include "bsg/rng.hpp"
#include "bsg/types.hpp"

namespace bsg {

class BestResponseMapping {
 public:
  BestResponseMapping() = default;
  BestResponseMapping(int n, int K, std::vector<int> w)
      : n_(n), K_(K), w_(std::move(w)) {
    if (static_cast<int>(w_.size()) != n_ * K_)
      throw ValidationError("BestResponseMapping: wrong table size");
  }

  int followers() const { return n_; }
  int type_count() const { return K_; }
  int at(int i, int k) const { return w_[static_cast<std::size_t>(i) * K_ + k]; }
  const std::vector<int>& flat() const { return w_; }

  BestResponseMapping with_cell(int i, int k, int a) const {
    std::vector<int> w = w_;
    w[static_cast<std::size_t>(i) * K_ + k] = a;
    return BestResponseMapping(n_, K_, std::move(w));
  }

  // W(theta): the joint action this mapping induces for a type profile.
  ActionProfile apply(const TypeProfile& theta) const {
    ActionProfile a;
    a.actions.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i)
      a.actions[static_cast<std::size_t>(i)] =
          at(i, theta.types[static_cast<std::size_t>(i)]);
    return a;
  }

  bool operator==(const BestResponseMapping& o) const { return w_ == o.w_; }
  std::strong_ordering operator<=>(const BestResponseMapping& o) const {
    return w_ <=> o.w_;
  }

 private:
  int n_ = 0, K_ = 0;
  std::vector<int> w_;
};

struct Region {
  BestResponseMapping mapping;
  std::vector<Halfspace> halfspaces;  // exactly n*K*(A-1) entries
  MixedStrategy witness;              // max-slack feasible point
  double slack = 0.0;                 // 0 => boundary-only region
};

// d_{theta,a,a'}: per-leader-action utility gap of a over a' for (i, k).
inline std::vector<double> advantage_vector(const PublicView& view, int i,
                                            int k, int a, int a_prime) {
  if (i < 0 || i >= view.n || k < 0 || k >= view.K || a < 0 || a >= view.A ||
      a_prime < 0 || a_prime >= view.A)
    throw ValidationError("advantage_vector: index out of range");
  if (a == a_prime) throw ValidationError("advantage_vector: a == a'");
  std::vector<double> d(static_cast<std::size_t>(view.L));
  for (int l = 0; l < view.L; ++l)
    d[static_cast<std::size_t>(l)] =
        view.follower_u(i, l, a, k) - view.follower_u(i, l, a_prime, k);
  return d;
}

// The n*K*(A-1) halfspaces whose intersection with the simplex is R(W).
inline std::vector<Halfspace> region_halfspaces(const PublicView& view,
                                                const BestResponseMapping& w) {
  std::vector<Halfspace> hs;
  hs.reserve(static_cast<std::size_t>(view.n) * view.K * (view.A - 1));
  for (int i = 0; i < view.n; ++i)
    for (int k = 0; k < view.K; ++k)
      for (int a = 0; a < view.A; ++a) {
        if (a == w.at(i, k)) continue;
        hs.push_back({advantage_vector(view, i, k, w.at(i, k), a)});
      }
  return hs;
}

// findFeasible(W): the region with its max-slack witness, or nullopt.
inline std::optional<Region> region_feasible(const PublicView& view,
                                             const BestResponseMapping& w) {
  std::vector<Halfspace> hs = region_halfspaces(view, w);
  FeasibleResult f = lp_feasible_point(view.L, hs);
  if (!f.feasible) return std::nullopt;
  Region r;
  r.mapping = w;
  r.halfspaces = std::move(hs);
  r.witness = std::move(f.x);
  r.slack = f.slack;
  return r;
}

// The mapping of best responses at x, cell by cell (tie rule of game.hpp).
inline BestResponseMapping classify(const PublicView& view,
                                    const MixedStrategy& x) {
  return BestResponseMapping(view.n, view.K, best_action_table(view, x));
}

// Breadth-first enumeration over mappings, flipping one (i, k) cell at a
// time and keeping weakly feasible ones. Seeded from the classifications of
// the barycenter plus 32 fixed pseudo-random simplex points, which guards
// against disconnected arrangements that a single seed could miss. Output is
// sorted by mapping, so downstream region indices are stable.
inline std::vector<Region> enumerate_regions(const PublicView& view) {
  constexpr int kNumSeeds = 32;
  SplitMix64 rng = make_stream(0xB5C168D1ull, 0, StreamPurpose::kAux);

  std::map<BestResponseMapping, Region> found;
  std::set<BestResponseMapping> rejected;
  std::vector<BestResponseMapping> queue;

  auto admit = [&](const BestResponseMapping& w) {
    if (found.contains(w) || rejected.contains(w)) return;
    std::optional<Region> r = region_feasible(view, w);
    if (r) {
      found.emplace(w, std::move(*r));
      queue.push_back(w);
    } else {
      rejected.insert(w);
    }
  };

  admit(classify(view, MixedStrategy::uniform(view.L)));
  for (int s = 0; s < kNumSeeds; ++s)
    admit(classify(view, MixedStrategy(sample_simplex(rng, view.L))));

  for (std::size_t head = 0; head < queue.size(); ++head) {
    const BestResponseMapping w = queue[head];
    for (int i = 0; i < view.n; ++i)
      for (int k = 0; k < view.K; ++k)
        for (int a = 0; a < view.A; ++a) {
          if (a == w.at(i, k)) continue;
          admit(w.with_cell(i, k, a));
        }
  }

  std::vector<Region> out;
  out.reserve(found.size());
  for (auto& [w, region] : found) out.push_back(std::move(region));
  return out;
}

namespace detail {

// Solve the L x L system rows * x = rhs by Gaussian elimination with partial
// pivoting. Returns false on (near-)singularity.
inline bool solve_linear(std::vector<std::vector<double>> rows,
                         std::vector<double> rhs, std::vector<double>& x) {
  const int n = static_cast<int>(rhs.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::fabs(rows[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]))
        piv = r;
    if (std::fabs(rows[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]) < 1e-10)
      return false;
    std::swap(rows[static_cast<std::size_t>(piv)], rows[static_cast<std::size_t>(col)]);
    std::swap(rhs[static_cast<std::size_t>(piv)], rhs[static_cast<std::size_t>(col)]);
    const double inv = 1.0 / rows[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] * inv;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j)
        rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
            f * rows[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
      rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
    }
  }
  x.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < n; ++r)
    x[static_cast<std::size_t>(r)] =
        rhs[static_cast<std::size_t>(r)] /
        rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
  return true;
}

}  // namespace detail

// All vertices of simplex(L) intersect the region's halfspaces, found by
// enumerating (L-1)-subsets of candidate active constraints (simplex facets
// and advantage halfspaces) together with the normalization row, solving
// each square system, and keeping the feasible solutions. Singular subsets
// are skipped. Output deduplicated within 1e-7 and sorted.
inline std::vector<MixedStrategy> region_vertices(const Region& region) {
  const int L = region.witness.size();
  std::vector<std::vector<double>> facets;
  for (int l = 0; l < L; ++l) {
    std::vector<double> e(static_cast<std::size_t>(L), 0.0);
    e[static_cast<std::size_t>(l)] = 1.0;
    facets.push_back(std::move(e));  // x_l >= 0
  }
  for (const auto& h : region.halfspaces) facets.push_back(h.normal);

  const int M = static_cast<int>(facets.size());
  const int pick = L - 1;
  std::vector<std::vector<double>> points;

  std::vector<int> comb(static_cast<std::size_t>(pick));
  for (int i = 0; i < pick; ++i) comb[static_cast<std::size_t>(i)] = i;

  auto feasible = [&](const std::vector<double>& x) {
    for (double v : x)
      if (v < -kFeasEps) return false;
    for (const auto& h : region.halfspaces) {
      double dot = 0.0;
      for (int l = 0; l < L; ++l)
        dot += x[static_cast<std::size_t>(l)] * h.normal[static_cast<std::size_t>(l)];
      if (dot < -kFeasEps) return false;
    }
    return true;
  };

  for (;;) {
    std::vector<std::vector<double>> rows;
    rows.emplace_back(static_cast<std::size_t>(L), 1.0);  // sum x = 1
    for (int i = 0; i < pick; ++i)
      rows.push_back(facets[static_cast<std::size_t>(comb[static_cast<std::size_t>(i)])]);
    std::vector<double> rhs(static_cast<std::size_t>(L), 0.0);
    rhs[0] = 1.0;
    std::vector<double> x;
    if (detail::solve_linear(std::move(rows), std::move(rhs), x) && feasible(x))
      points.push_back(std::move(x));

    // next combination
    int i = pick - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == M - pick + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < pick; ++j)
      comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  }

  std::sort(points.begin(), points.end());
  std::vector<MixedStrategy> out;
  for (const auto& x : points) {
    bool dup = false;
    for (const auto& kept : out) {
      double dist = 0.0;
      for (int l = 0; l < L; ++l)
        dist = std::max(dist, std::fabs(kept(l) - x[static_cast<std::size_t>(l)]));
      if (dist <= 1e-7) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(detail::strategy_from_lp(x, L));
  }
  return out;
}

// Index of a mapping within the sorted output of enumerate_regions, or -1.
inline int region_index_of(const std::vector<Region>& regions,
                           const BestResponseMapping& w) {
  auto it = std::lower_bound(
      regions.begin(), regions.end(), w,
      [](const Region& r, const BestResponseMapping& m) { return r.mapping < m; });
  if (it != regions.end() && it->mapping == w)
    return static_cast<int>(it - regions.begin());
  return -1;
}

}  // namespace bsg
