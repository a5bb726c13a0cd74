// Utility / best-response / distribution-distance primitives.
//
// Follower tie handling. Best responses must be a deterministic function of
// the leader's strategy, and the induced joint behavior at any x must be
// expressible as a single type->action mapping (otherwise the expected
// utility at boundary points is not dominated by any per-mapping linear
// value and regret accounting breaks). Ties within kTieEps of the best
// expected utility are therefore resolved per (follower, type) cell,
// independent of the rest of the profile:
//
//   1. keep the actions whose expected utility is within kTieEps of max;
//   2. among those, pick the action whose utility column v[i][.][a][k]
//      is lexicographically greatest over leader actions;
//   3. identical columns (clone actions) fall back to the lowest index.
//
// Rule 2 makes knife-edge points behave like the limit from the side the
// column ordering favors, which is what the closed-form optima of the
// hard instance families assume.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bsg/types.hpp"

namespace bsg {

// v_i(x, a, theta_i): the follower's expected utility under the mix x.
inline double follower_expected_utility(const PublicView& view,
                                        const MixedStrategy& x, int i, int a,
                                        int k) {
  if (i < 0 || i >= view.n || a < 0 || a >= view.A || k < 0 || k >= view.K)
    throw ValidationError("follower_expected_utility: index out of range");
  double e = 0.0;
  for (int l = 0; l < view.L; ++l) e += x(l) * view.follower_u(i, l, a, k);
  return e;
}

namespace detail {

// Lexicographic comparison of utility columns v[i][.][a][k] vs v[i][.][b][k].
// Returns +1 if a's column is greater, -1 if b's, 0 if identical.
inline int compare_columns(const PublicView& view, int i, int k, int a, int b) {
  for (int l = 0; l < view.L; ++l) {
    const double va = view.follower_u(i, l, a, k);
    const double vb = view.follower_u(i, l, b, k);
    if (va > vb) return 1;
    if (va < vb) return -1;
  }
  return 0;
}

}  // namespace detail

// Deterministic best action of follower i with type k at x (tie rule above).
inline int best_action(const PublicView& view, const MixedStrategy& x, int i,
                       int k) {
  double best_e = -1.0;
  for (int a = 0; a < view.A; ++a)
    best_e = std::max(best_e, follower_expected_utility(view, x, i, a, k));
  int pick = -1;
  for (int a = 0; a < view.A; ++a) {
    if (follower_expected_utility(view, x, i, a, k) < best_e - kTieEps) continue;
    if (pick < 0 || detail::compare_columns(view, i, k, a, pick) > 0) pick = a;
  }
  return pick;
}

// The full n x K table of best actions at x (row-major: [i*K + k]).
inline std::vector<int> best_action_table(const PublicView& view,
                                          const MixedStrategy& x) {
  std::vector<int> w(static_cast<std::size_t>(view.n) * view.K);
  for (int i = 0; i < view.n; ++i)
    for (int k = 0; k < view.K; ++k)
      w[static_cast<std::size_t>(i) * view.K + k] = best_action(view, x, i, k);
  return w;
}

// br(theta, x): joint best response, one action per follower.
inline ActionProfile best_response(const MixedStrategy& x,
                                   const TypeProfile& theta,
                                   const PublicView& view) {
  ActionProfile a;
  a.actions.resize(static_cast<std::size_t>(view.n));
  for (int i = 0; i < view.n; ++i) {
    const int k = theta.types[static_cast<std::size_t>(i)];
    if (k < 0 || k >= view.K) throw ValidationError("best_response: type out of range");
    a.actions[static_cast<std::size_t>(i)] = best_action(view, x, i, k);
  }
  return a;
}

// u(x, a) = sum_l x(l) u(l, a).
inline double leader_action_utility(const PublicView& view,
                                    const MixedStrategy& x,
                                    const ActionProfile& a) {
  double e = 0.0;
  for (int l = 0; l < view.L; ++l) e += x(l) * view.leader_utility.at(l, a);
  return e;
}

// U_D(x) = sum_theta D(theta) u(x, br(theta, x)), summed exactly over all
// K^n profiles. Throws CapExceededError past the profile cap.
inline double leader_expected_utility(const MixedStrategy& x,
                                      const TypeDistribution& dist,
                                      const PublicView& view) {
  const long long profiles = pow_or_throw(view.K, view.n, kProfileCap, "K^n");
  const std::vector<int> w = best_action_table(view, x);

  ActionProfile act;
  act.actions.assign(static_cast<std::size_t>(view.n), 0);
  std::vector<int> theta(static_cast<std::size_t>(view.n), 0);
  double total = 0.0;
  for (long long idx = 0; idx < profiles; ++idx) {
    for (int i = 0; i < view.n; ++i)
      act.actions[static_cast<std::size_t>(i)] =
          w[static_cast<std::size_t>(i) * view.K + theta[static_cast<std::size_t>(i)]];
    const double p = dist.prob_flat(idx);
    if (p > 0.0) total += p * leader_action_utility(view, x, act);
    // odometer increment, follower n-1 fastest
    for (int i = view.n - 1; i >= 0; --i) {
      auto& t = theta[static_cast<std::size_t>(i)];
      if (++t < view.K) break;
      t = 0;
    }
  }
  return total;
}

namespace detail {

inline void check_same_shape(const TypeDistribution& a,
                             const TypeDistribution& b) {
  if (!a.same_shape(b))
    throw ValidationError("distribution distance: support shape mismatch");
}

}  // namespace detail

// Total variation: half the L1 distance over all K^n profiles.
inline double tv_distance(const TypeDistribution& a, const TypeDistribution& b) {
  detail::check_same_shape(a, b);
  const long long profiles =
      pow_or_throw(a.type_count(), a.followers(), kProfileCap, "K^n");
  double sum = 0.0;
  for (long long idx = 0; idx < profiles; ++idx)
    sum += std::fabs(a.prob_flat(idx) - b.prob_flat(idx));
  return 0.5 * sum;
}

// Hellinger distance: (1/sqrt(2)) * || sqrt(a) - sqrt(b) ||_2.
inline double hellinger_distance(const TypeDistribution& a,
                                 const TypeDistribution& b) {
  detail::check_same_shape(a, b);
  const long long profiles =
      pow_or_throw(a.type_count(), a.followers(), kProfileCap, "K^n");
  double sum = 0.0;
  for (long long idx = 0; idx < profiles; ++idx) {
    const double d = std::sqrt(a.prob_flat(idx)) - std::sqrt(b.prob_flat(idx));
    sum += d * d;
  }
  return std::sqrt(0.5 * sum);
}

// Densified product of marginals, joint(theta) = prod_i m_i(theta_i).
inline TypeDistribution product_distribution(
    const std::vector<std::vector<double>>& marginals) {
  const int n = static_cast<int>(marginals.size());
  if (n == 0) throw ValidationError("product_distribution: no marginals");
  const int K = static_cast<int>(marginals.front().size());
  const long long profiles = pow_or_throw(K, n, kProfileCap, "K^n");
  std::vector<double> joint(static_cast<std::size_t>(profiles), 1.0);
  long long stride = profiles;
  for (int i = 0; i < n; ++i) {
    stride /= K;
    for (long long idx = 0; idx < profiles; ++idx)
      joint[static_cast<std::size_t>(idx)] *=
          marginals[static_cast<std::size_t>(i)]
                   [static_cast<std::size_t>((idx / stride) % K)];
  }
  return TypeDistribution::general(n, K, std::move(joint));
}

}  // namespace bsg
