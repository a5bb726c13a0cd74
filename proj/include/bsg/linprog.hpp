// Dense LP solving over the simplex intersected with homogeneous halfspaces.
//
// The kernel is a two-phase primal simplex on the standard-form tableau with
// Bland's anti-cycling rule (entering: lowest eligible index; leaving: lowest
// basis index among ratio ties). Problems here have tens of variables and at
// most a few hundred constraints, so a dependency-free dense tableau is
// enough and keeps results deterministic: identical inputs pivot identically.

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "bsg/types.hpp"

namespace bsg {

// The closed halfspace { x : <x, normal> >= 0 }.
struct Halfspace {
  std::vector<double> normal;
};

enum class LpStatus { kOptimal, kInfeasible };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  MixedStrategy x;       // valid when status == kOptimal
  double value = 0.0;    // <c, x> at the optimum
  bool is_vertex = false;
};

namespace lp {

// minimize c.y  subject to  A y = b, y >= 0, with all b >= 0.
struct Problem {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // row-major rows x cols
  std::vector<double> b;
  std::vector<double> c;

  double& at(int r, int j) { return a[static_cast<std::size_t>(r) * cols + j]; }
};

struct Solution {
  bool feasible = false;
  std::vector<double> y;
  double objective = 0.0;
};

class Tableau {
 public:
  explicit Tableau(const Problem& p)
      : m_(p.rows), nv_(p.cols), ncols_(p.cols + p.rows + 1) {
    rows_.assign(static_cast<std::size_t>(m_ + 2),
                 std::vector<double>(static_cast<std::size_t>(ncols_), 0.0));
    basis_.resize(static_cast<std::size_t>(m_));
    // constraint rows with one artificial each
    for (int r = 0; r < m_; ++r) {
      for (int j = 0; j < nv_; ++j)
        rows_[r][static_cast<std::size_t>(j)] =
            p.a[static_cast<std::size_t>(r) * nv_ + j];
      rows_[r][static_cast<std::size_t>(nv_ + r)] = 1.0;
      rows_[r][static_cast<std::size_t>(ncols_ - 1)] = p.b[static_cast<std::size_t>(r)];
      basis_[static_cast<std::size_t>(r)] = nv_ + r;
    }
    // phase-2 cost row (reduced costs; artificials cost 0)
    auto& obj = rows_[static_cast<std::size_t>(m_)];
    for (int j = 0; j < nv_; ++j) obj[static_cast<std::size_t>(j)] = p.c[static_cast<std::size_t>(j)];
    // phase-1 cost row: unit cost on artificials, priced out against the
    // artificial starting basis.
    auto& obj1 = rows_[static_cast<std::size_t>(m_ + 1)];
    for (int j = 0; j < ncols_; ++j) {
      double s = 0.0;
      for (int r = 0; r < m_; ++r) s += rows_[r][static_cast<std::size_t>(j)];
      const bool artificial = j >= nv_ && j < nv_ + m_;
      obj1[static_cast<std::size_t>(j)] = (artificial ? 1.0 : 0.0) - s;
    }
  }

  Solution solve() {
    // phase 1: drive artificial mass to zero
    run(m_ + 1, /*allow_artificials=*/true);
    const double infeas = -rows_[static_cast<std::size_t>(m_ + 1)][static_cast<std::size_t>(ncols_ - 1)];
    if (infeas > 1e-7) return {};
    expel_artificials();
    // phase 2
    run(m_, /*allow_artificials=*/false);

    Solution s;
    s.feasible = true;
    s.y.assign(static_cast<std::size_t>(nv_), 0.0);
    for (int r = 0; r < m_; ++r)
      if (basis_[static_cast<std::size_t>(r)] < nv_)
        s.y[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] =
            rows_[static_cast<std::size_t>(r)][static_cast<std::size_t>(ncols_ - 1)];
    s.objective = -rows_[static_cast<std::size_t>(m_)][static_cast<std::size_t>(ncols_ - 1)];
    return s;
  }

 private:
  void pivot(int pr, int pc) {
    auto& prow = rows_[static_cast<std::size_t>(pr)];
    const double inv = 1.0 / prow[static_cast<std::size_t>(pc)];
    for (auto& v : prow) v *= inv;
    prow[static_cast<std::size_t>(pc)] = 1.0;
    for (int r = 0; r < m_ + 2; ++r) {
      if (r == pr) continue;
      auto& row = rows_[static_cast<std::size_t>(r)];
      const double f = row[static_cast<std::size_t>(pc)];
      if (std::fabs(f) <= 0.0) continue;
      for (int j = 0; j < ncols_; ++j)
        row[static_cast<std::size_t>(j)] -= f * prow[static_cast<std::size_t>(j)];
      row[static_cast<std::size_t>(pc)] = 0.0;
    }
    basis_[static_cast<std::size_t>(pr)] = pc;
  }

  void run(int obj_row, bool allow_artificials) {
    const int limit = allow_artificials ? nv_ + m_ : nv_;
    for (;;) {
      const auto& obj = rows_[static_cast<std::size_t>(obj_row)];
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (obj[static_cast<std::size_t>(j)] < -kPivotEps) {
          enter = j;
          break;  // Bland: lowest index
        }
      }
      if (enter < 0) return;

      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double coef = rows_[static_cast<std::size_t>(r)][static_cast<std::size_t>(enter)];
        if (coef <= kPivotEps) continue;
        const double ratio =
            rows_[static_cast<std::size_t>(r)][static_cast<std::size_t>(ncols_ - 1)] / coef;
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio &&
             basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return;  // unbounded; bounded by construction here
      pivot(leave, enter);
    }
  }

  // After phase 1, pivot basic artificials out on any nonzero structural
  // coefficient (their rows sit at zero, so these pivots are degenerate);
  // rows with no such coefficient are redundant and left parked.
  void expel_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < nv_) continue;
      int col = -1;
      for (int j = 0; j < nv_; ++j) {
        if (std::fabs(rows_[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0) pivot(r, col);
    }
  }

  int m_, nv_, ncols_;
  std::vector<std::vector<double>> rows_;
  std::vector<int> basis_;
};

inline Solution solve_min(const Problem& p) { return Tableau(p).solve(); }

}  // namespace lp

namespace detail {

inline void check_normals(int L, std::span<const Halfspace> hs) {
  for (const auto& h : hs) {
    if (static_cast<int>(h.normal.size()) != L)
      throw ValidationError("Halfspace: wrong dimension");
    for (double v : h.normal)
      if (!std::isfinite(v)) throw ValidationError("Halfspace: non-finite entry");
  }
}

inline MixedStrategy strategy_from_lp(std::span<const double> y, int L) {
  std::vector<double> p(y.begin(), y.begin() + L);
  double sum = 0.0;
  for (auto& v : p) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return MixedStrategy(std::move(p));
}

}  // namespace detail

// max <c, x>  over  { x in simplex(L) : <x, d> >= 0 for d in hs }.
// Returns a vertex optimum; Infeasible when the region is empty.
inline LpResult lp_maximize(std::span<const double> c,
                            std::span<const Halfspace> hs) {
  const int L = static_cast<int>(c.size());
  if (L < 2) throw ValidationError("lp_maximize: need L >= 2");
  detail::check_normals(L, hs);

  if (hs.empty()) {
    // max over the bare simplex sits at the best unit vector; exact by
    // construction. Ties go to the lowest action index.
    int best = 0;
    for (int l = 1; l < L; ++l)
      if (c[static_cast<std::size_t>(l)] > c[static_cast<std::size_t>(best)]) best = l;
    return {LpStatus::kOptimal, MixedStrategy::unit(L, best),
            c[static_cast<std::size_t>(best)], true};
  }

  const int m = static_cast<int>(hs.size());
  lp::Problem p;
  p.rows = 1 + m;
  p.cols = L + m;  // x variables then one slack per halfspace
  p.a.assign(static_cast<std::size_t>(p.rows) * p.cols, 0.0);
  p.b.assign(static_cast<std::size_t>(p.rows), 0.0);
  p.c.assign(static_cast<std::size_t>(p.cols), 0.0);
  for (int l = 0; l < L; ++l) {
    p.at(0, l) = 1.0;                      // sum x = 1
    p.c[static_cast<std::size_t>(l)] = -c[static_cast<std::size_t>(l)];
  }
  p.b[0] = 1.0;
  for (int j = 0; j < m; ++j) {
    // <d, x> - s = 0 written as -<d, x> + s = 0 so the slack starts basic
    for (int l = 0; l < L; ++l)
      p.at(1 + j, l) = -hs[static_cast<std::size_t>(j)].normal[static_cast<std::size_t>(l)];
    p.at(1 + j, L + j) = 1.0;
  }

  const lp::Solution s = lp::solve_min(p);
  if (!s.feasible) return {};
  const MixedStrategy x = detail::strategy_from_lp(s.y, L);
  double value = 0.0;
  for (int l = 0; l < L; ++l) value += c[static_cast<std::size_t>(l)] * x(l);
  return {LpStatus::kOptimal, x, value, true};
}

struct FeasibleResult {
  bool feasible = false;
  MixedStrategy x;
  double slack = 0.0;  // max-min slack over the halfspaces; 0 => boundary-only
};

// findFeasible: a point of { x in simplex : <x,d> >= 0 } when one exists,
// preferring the maximum-slack point (max t s.t. <x,d> >= t for all d) so
// full-dimensional regions yield interior witnesses. Zero-normal halfspaces
// hold everywhere and are ignored by the slack objective.
inline FeasibleResult lp_feasible_point(int L, std::span<const Halfspace> hs) {
  if (L < 2) throw ValidationError("lp_feasible_point: need L >= 2");
  detail::check_normals(L, hs);

  std::vector<const Halfspace*> active;
  for (const auto& h : hs) {
    bool zero = true;
    for (double v : h.normal)
      if (std::fabs(v) > 0.0) zero = false;
    if (!zero) active.push_back(&h);
  }
  if (active.empty())
    return {true, MixedStrategy::uniform(L),
            std::numeric_limits<double>::infinity()};

  const int m = static_cast<int>(active.size());
  lp::Problem p;
  p.rows = 1 + m;
  p.cols = L + 2 + m;  // x, t+, t-, slacks
  p.a.assign(static_cast<std::size_t>(p.rows) * p.cols, 0.0);
  p.b.assign(static_cast<std::size_t>(p.rows), 0.0);
  p.c.assign(static_cast<std::size_t>(p.cols), 0.0);
  for (int l = 0; l < L; ++l) p.at(0, l) = 1.0;
  p.b[0] = 1.0;
  p.c[static_cast<std::size_t>(L)] = -1.0;  // maximize t = t+ - t-
  p.c[static_cast<std::size_t>(L + 1)] = 1.0;
  for (int j = 0; j < m; ++j) {
    // <d, x> - t - s = 0 written as -<d, x> + t+ - t- + s = 0
    for (int l = 0; l < L; ++l)
      p.at(1 + j, l) = -active[static_cast<std::size_t>(j)]->normal[static_cast<std::size_t>(l)];
    p.at(1 + j, L) = 1.0;
    p.at(1 + j, L + 1) = -1.0;
    p.at(1 + j, L + 2 + j) = 1.0;
  }

  const lp::Solution s = lp::solve_min(p);
  if (!s.feasible) return {};  // cannot happen: t- is unconstrained below
  const double t = s.y[static_cast<std::size_t>(L)] - s.y[static_cast<std::size_t>(L + 1)];
  if (t < -kFeasEps) return {};
  return {true, detail::strategy_from_lp(s.y, L), std::max(t, 0.0)};
}

}  // namespace bsg
