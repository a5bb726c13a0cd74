// Protocol simulator, instance generators (random + the hard families used
// as lower-bound constructions), and the brute-force oracles tests compare
// against.
//
// Reproducibility contract: an experiment owns a root seed per run. Type
// draws come from stream (root, run, kTypes) — one uniform per round for a
// general distribution, n uniforms (follower 0 first) for an independent
// one — and the realized leader action from (root, run, kLeaderAction).
// Expected regret is computed from the exact U_D, never from realized
// payoffs.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "bsg/game.hpp"
#include "bsg/geometry.hpp"
#include "bsg/learners.hpp"
#include "bsg/rng.hpp"
#include "bsg/solvers.hpp"
#include "bsg/types.hpp"

namespace bsg {

// ---------------------------------------------------------------------------
// Hard-instance families.

// The +/- epsilon near-uniform family: support (+1,-1,+2,-2,...,+c,-c) with
// D(+j) = (1 + sigma_j eps) / 2c and D(-j) = (1 - sigma_j eps) / 2c.
inline TypeDistribution gen_class_c(int c, double epsilon,
                                    std::span<const int> sigma) {
  if (c < 1 || static_cast<int>(sigma.size()) != c)
    throw ValidationError("gen_class_c: sigma must have length c");
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw ValidationError("gen_class_c: need epsilon in [0, 1)");
  std::vector<double> joint(static_cast<std::size_t>(2 * c));
  for (int j = 0; j < c; ++j) {
    if (sigma[static_cast<std::size_t>(j)] != 1 && sigma[static_cast<std::size_t>(j)] != -1)
      throw ValidationError("gen_class_c: sigma entries must be +1/-1");
    const double s = static_cast<double>(sigma[static_cast<std::size_t>(j)]);
    joint[static_cast<std::size_t>(2 * j)] = (1.0 + s * epsilon) / (2.0 * c);
    joint[static_cast<std::size_t>(2 * j + 1)] = (1.0 - s * epsilon) / (2.0 * c);
  }
  return TypeDistribution::general(1, 2 * c, std::move(joint));
}

struct ClassCParams {
  int c = 0;
  double epsilon = 0.0;
  std::vector<int> sigma;
};

inline std::optional<ClassCParams> recover_class_c(const TypeDistribution& d) {
  if (d.followers() != 1 || d.kind() != TypeDistribution::Kind::kGeneral)
    return std::nullopt;
  const int K = d.type_count();
  if (K % 2 != 0) return std::nullopt;
  ClassCParams p;
  p.c = K / 2;
  const auto& joint = d.joint();
  for (int j = 0; j < p.c; ++j) {
    const double hi = joint[static_cast<std::size_t>(2 * j)];
    const double lo = joint[static_cast<std::size_t>(2 * j + 1)];
    if (std::fabs(hi + lo - 1.0 / p.c) > 1e-9) return std::nullopt;
    const double eps_j = std::fabs(hi - lo) * p.c;
    if (j == 0) p.epsilon = eps_j;
    else if (std::fabs(eps_j - p.epsilon) > 1e-9) return std::nullopt;
    p.sigma.push_back(hi >= lo ? 1 : -1);
  }
  return p;
}

// Number of coordinate pairs where x's ordering contradicts the sign
// pattern of a class-C distribution.
inline int disagree(const MixedStrategy& x, const TypeDistribution& d) {
  const auto params = recover_class_c(d);
  if (!params) throw ValidationError("disagree: not a class-C distribution");
  if (x.size() != d.type_count())
    throw ValidationError("disagree: strategy dimension mismatch");
  int count = 0;
  for (int j = 0; j < params->c; ++j) {
    const bool x_plus = x(2 * j) >= x(2 * j + 1);
    const bool d_plus = params->sigma[static_cast<std::size_t>(j)] == 1;
    if (x_plus != d_plus) ++count;
  }
  return count;
}

// Single-follower hard instance: K = L = 2c types/actions, binary follower
// actions Good/Bad. Type +j earns 1 for Good at leader action +j and for
// Bad at -j (type -j mirrored); the leader earns 1 whenever the follower
// plays Good. Optimal value is (1 + eps)/2 at x = D for sigma = (+1,...).
inline GameInstance gen_single_follower_hard(int c, double epsilon,
                                             std::span<const int> sigma) {
  TypeDistribution dist = gen_class_c(c, epsilon, sigma);
  const int K = 2 * c, L = 2 * c, A = 2;
  constexpr int kGood = 0;

  PublicView view;
  view.n = 1;
  view.L = L;
  view.A = A;
  view.K = K;
  view.follower_utilities.assign(static_cast<std::size_t>(L) * A * K, 0.0);
  auto set_v = [&](int l, int a, int k) {
    view.follower_utilities[static_cast<std::size_t>((l * A + a) * K + k)] = 1.0;
  };
  for (int j = 0; j < c; ++j) {
    const int plus = 2 * j, minus = 2 * j + 1;
    set_v(plus, /*Good*/ 0, plus);
    set_v(minus, /*Bad*/ 1, plus);
    set_v(minus, /*Good*/ 0, minus);
    set_v(plus, /*Bad*/ 1, minus);
  }
  std::vector<double> u(static_cast<std::size_t>(A) * L, 0.0);
  for (int l = 0; l < L; ++l) u[static_cast<std::size_t>(kGood * L + l)] = 1.0;
  view.leader_utility = LeaderUtility::dense(1, L, A, std::move(u));
  return GameInstance(std::move(view), std::move(dist));
}

// The c = 1 instance used throughout the tests.
inline GameInstance make_g1(double epsilon = 0.2) {
  const int sigma[] = {1};
  return gen_single_follower_hard(1, epsilon, sigma);
}

// Multi-follower reduction instance: n followers with K + 1 types each.
// Type 0 ("asleep", probability 1 - 1/(100n)) has the extra action a0
// strictly dominant; type j != 0 behaves like single-follower type
// (i, j) of the base game, with probability base(i, j)/100. The leader
// earns 1 iff exactly one follower plays Good and the rest play a0.
// Follower payoffs are mapped from {-1, 0, 1} into [0, 1] by (v + 1)/2,
// which preserves every argmax set; the leader table stays {0, 1}.
inline GameInstance gen_multi_follower_hard(int n, int K,
                                            const TypeDistribution& base) {
  const auto params = recover_class_c(base);
  if (!params || base.type_count() != n * K)
    throw ValidationError("gen_multi_follower_hard: base must be class-C over nK types");

  const int L = n * K, A = 3, KT = K + 1;
  constexpr int kGood = 0, kBad = 1, kA0 = 2;

  std::vector<std::vector<double>> marginals(
      static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(KT)));
  for (int i = 0; i < n; ++i) {
    marginals[static_cast<std::size_t>(i)][0] = 1.0 - 1.0 / (100.0 * n);
    for (int j = 1; j <= K; ++j)
      marginals[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          base.joint()[static_cast<std::size_t>(i * K + (j - 1))] / 100.0;
  }

  PublicView view;
  view.n = n;
  view.L = L;
  view.A = A;
  view.K = KT;
  view.follower_utilities.assign(
      static_cast<std::size_t>(n) * L * A * KT, 0.0);
  auto set_v = [&](int i, int l, int a, int k, double raw) {
    view.follower_utilities[static_cast<std::size_t>(((i * L + l) * A + a) * KT + k)] =
        (raw + 1.0) / 2.0;
  };
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < L; ++l) {
      set_v(i, l, kA0, 0, 1.0);
      set_v(i, l, kGood, 0, -1.0);
      set_v(i, l, kBad, 0, -1.0);
      for (int j = 1; j <= K; ++j) {
        const int s = i * K + (j - 1);  // single-follower type index
        const int partner = (s % 2 == 0) ? s + 1 : s - 1;
        // Good pays at the type's own leader coordinate, Bad at its partner
        set_v(i, l, kGood, j, l == s ? 1.0 : 0.0);
        set_v(i, l, kBad, j, l == partner ? 1.0 : 0.0);
        set_v(i, l, kA0, j, -1.0);
      }
    }

  const long long profiles = pow_or_throw(A, n, kDenseLeaderCap, "A^n");
  std::vector<double> u(static_cast<std::size_t>(profiles) * L, 0.0);
  std::vector<int> actions;
  for (long long idx = 0; idx < profiles; ++idx) {
    profile_from_index(idx, n, A, actions);
    int good = 0, asleep = 0;
    for (int a : actions) {
      if (a == kGood) ++good;
      if (a == kA0) ++asleep;
    }
    if (good == 1 && asleep == n - 1)
      for (int l = 0; l < L; ++l) u[static_cast<std::size_t>(idx * L + l)] = 1.0;
  }
  view.leader_utility = LeaderUtility::dense(n, L, A, std::move(u));
  return GameInstance(std::move(view), TypeDistribution::independent(std::move(marginals)));
}

// Dominant-action fixture: every type k strictly prefers action (k mod A)
// at every leader action, so a single mapping is feasible and the leader's
// utility is independent of x once the followers' profile is pinned.
inline GameInstance gen_dominant_instance(int n, int L, int A, int K) {
  PublicView view;
  view.n = n;
  view.L = L;
  view.A = A;
  view.K = K;
  view.follower_utilities.assign(static_cast<std::size_t>(n) * L * A * K, 0.1);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < L; ++l)
      for (int k = 0; k < K; ++k)
        view.follower_utilities[static_cast<std::size_t>(
            ((i * L + l) * A + (k % A)) * K + k)] = 0.9;

  const long long profiles = pow_or_throw(A, n, kDenseLeaderCap, "A^n");
  std::vector<double> u(static_cast<std::size_t>(profiles) * L);
  for (long long idx = 0; idx < profiles; ++idx)
    for (int l = 0; l < L; ++l)
      u[static_cast<std::size_t>(idx * L + l)] =
          static_cast<double>(mix64(static_cast<std::uint64_t>(idx * L + l) + 17) >> 11) *
          0x1.0p-53;

  view.leader_utility = LeaderUtility::dense(n, L, A, std::move(u));
  const long long kn = pow_or_throw(K, n, kProfileCap, "K^n");
  std::vector<double> joint(static_cast<std::size_t>(kn),
                            1.0 / static_cast<double>(kn));
  return GameInstance(std::move(view), TypeDistribution::general(n, K, std::move(joint)));
}

inline GameInstance make_g2() { return gen_dominant_instance(1, 2, 2, 2); }

enum class DistKind { kGeneral, kIndependent };

// Utilities i.i.d. uniform on [0,1]; distribution Dirichlet(1) over the
// joint table or per-marginal. Deterministic per seed.
inline GameInstance gen_random_instance(int n, int L, int A, int K,
                                        DistKind kind, std::uint64_t seed) {
  SplitMix64 rng = make_stream(seed, 0, StreamPurpose::kGenerator);
  PublicView view;
  view.n = n;
  view.L = L;
  view.A = A;
  view.K = K;
  view.follower_utilities.resize(static_cast<std::size_t>(n) * L * A * K);
  for (auto& v : view.follower_utilities) v = rng.next_double();

  const long long profiles = pow_or_throw(A, n, kDenseLeaderCap, "A^n");
  std::vector<double> u(static_cast<std::size_t>(profiles) * L);
  for (auto& v : u) v = rng.next_double();
  view.leader_utility = LeaderUtility::dense(n, L, A, std::move(u));

  TypeDistribution dist =
      kind == DistKind::kGeneral
          ? TypeDistribution::general(
                n, K,
                sample_simplex(rng, static_cast<int>(pow_or_throw(
                                        K, n, kProfileCap, "K^n"))))
          : [&] {
              std::vector<std::vector<double>> m;
              for (int i = 0; i < n; ++i) m.push_back(sample_simplex(rng, K));
              return TypeDistribution::independent(std::move(m));
            }();
  return GameInstance(std::move(view), std::move(dist));
}

// Frozen preset behind the benchmark: the standard comparison shape
// (L=2, K=6, A=2, n=2) with independent types.
inline constexpr std::uint64_t kBenchSeed = 4;

inline GameInstance make_bench_instance(std::uint64_t seed = kBenchSeed) {
  return gen_random_instance(2, 2, 2, 6, DistKind::kIndependent, seed);
}

// ---------------------------------------------------------------------------
// Oracles.

// Exhaustive lattice search over the simplex with the given spacing.
inline std::pair<MixedStrategy, double> brute_force_optimal(
    const PublicView& view, const TypeDistribution& dist, double grid_step) {
  if (view.L > 4)
    throw ValidationError("brute_force_optimal: L > 4 is not tractable");
  const int N = static_cast<int>(std::lround(1.0 / grid_step));

  std::vector<int> counts(static_cast<std::size_t>(view.L), 0);
  std::vector<double> best_x;
  double best_value = -1.0;

  std::vector<double> x(static_cast<std::size_t>(view.L));
  std::function<void(int, int)> walk = [&](int coord, int remaining) {
    if (coord == view.L - 1) {
      counts[static_cast<std::size_t>(coord)] = remaining;
      for (int l = 0; l < view.L; ++l)
        x[static_cast<std::size_t>(l)] =
            static_cast<double>(counts[static_cast<std::size_t>(l)]) / N;
      const double v =
          leader_expected_utility(MixedStrategy(x), dist, view);
      if (v > best_value) {
        best_value = v;
        best_x = x;
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[static_cast<std::size_t>(coord)] = c;
      walk(coord + 1, remaining - c);
    }
  };
  walk(0, N);
  return {MixedStrategy(best_x), best_value};
}

// Distinct classifications of uniformly sampled strategies; a sound
// under-approximation of the non-empty region set.
inline std::set<BestResponseMapping> sample_regions(const PublicView& view,
                                                    int num_samples,
                                                    std::uint64_t seed) {
  SplitMix64 rng = make_stream(seed, 0, StreamPurpose::kAux);
  std::set<BestResponseMapping> out;
  for (int s = 0; s < num_samples; ++s)
    out.insert(classify(view, MixedStrategy(sample_simplex(rng, view.L))));
  return out;
}

// ---------------------------------------------------------------------------
// Protocol simulation.

struct ExperimentConfig {
  std::string learner;  // factory spec, e.g. "tf-general" or "fixed:0,1"
  FeedbackMode mode = FeedbackMode::kType;
  int horizon = 1;
  std::vector<std::uint64_t> seeds = {1};  // run i uses seeds[i % seeds.size()]
  int replications = 1;
  int threads = 0;  // 0: honor THREADS env, else hardware concurrency
};

struct TraceRow {
  std::vector<double> x;
  int region_index = -1;
  double expected_regret = 0.0;
  double cumulative_regret = 0.0;
  double realized_utility = 0.0;
};

struct RegretTrace {
  int run_id = 0;
  std::vector<TraceRow> rows;
};

inline int resolve_threads(int requested, int jobs) {
  int t = requested;
  if (t <= 0) {
    if (const char* env = std::getenv("THREADS")) t = std::atoi(env);
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  if (t <= 0) t = 1;
  return std::min(t, std::max(jobs, 1));
}

// One uniform per round for a general distribution, n uniforms (follower 0
// first) for an independent one. The optional precomputed joint CDF turns
// the general draw into a binary search.
inline TypeProfile sample_profile(SplitMix64& rng, const TypeDistribution& d,
                                  const std::vector<double>& joint_cdf = {}) {
  TypeProfile theta;
  const int n = d.followers(), K = d.type_count();
  if (d.kind() == TypeDistribution::Kind::kIndependent) {
    theta.types.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      theta.types[static_cast<std::size_t>(i)] =
          sample_index(rng, d.marginals()[static_cast<std::size_t>(i)]);
    return theta;
  }
  const double u = rng.next_double();
  long long idx;
  if (!joint_cdf.empty()) {
    const auto it = std::upper_bound(joint_cdf.begin(), joint_cdf.end(), u);
    idx = it == joint_cdf.end() ? static_cast<long long>(joint_cdf.size()) - 1
                                : it - joint_cdf.begin();
  } else {
    idx = static_cast<long long>(d.joint().size()) - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < d.joint().size(); ++i) {
      acc += d.joint()[i];
      if (u < acc) {
        idx = static_cast<long long>(i);
        break;
      }
    }
  }
  profile_from_index(idx, n, K, theta.types);
  return theta;
}

inline std::vector<RegretTrace> run_experiment(const GameInstance& game,
                                               const ExperimentConfig& cfg) {
  if (cfg.horizon < 1) throw ValidationError("run_experiment: need T >= 1");
  if (cfg.replications < 1)
    throw ValidationError("run_experiment: need replications >= 1");
  if (cfg.seeds.empty()) throw ValidationError("run_experiment: need a seed");

  const PublicView& view = game.view();
  const TypeDistribution& dist = game.distribution();
  const std::vector<Region> regions = enumerate_regions(view);
  const Equilibrium eq = offline_optimal(view, dist, regions);

  std::vector<double> joint_cdf;
  if (dist.kind() == TypeDistribution::Kind::kGeneral) {
    joint_cdf.resize(dist.joint().size());
    double acc = 0.0;
    for (std::size_t i = 0; i < joint_cdf.size(); ++i) {
      acc += dist.joint()[i];
      joint_cdf[i] = acc;
    }
  }

  std::vector<RegretTrace> traces(static_cast<std::size_t>(cfg.replications));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int run = next.fetch_add(1);
      if (run >= cfg.replications) return;
      const std::uint64_t root = cfg.seeds[static_cast<std::size_t>(run) % cfg.seeds.size()];
      SplitMix64 type_rng = make_stream(root, static_cast<std::uint64_t>(run),
                                        StreamPurpose::kTypes);
      SplitMix64 act_rng = make_stream(root, static_cast<std::uint64_t>(run),
                                       StreamPurpose::kLeaderAction);
      std::unique_ptr<Learner> learner = make_learner(cfg.learner, cfg.mode);
      learner->reset(view, cfg.horizon);

      RegretTrace trace;
      trace.run_id = run;
      trace.rows.reserve(static_cast<std::size_t>(cfg.horizon));
      double cumulative = 0.0;
      for (int t = 1; t <= cfg.horizon; ++t) {
        const MixedStrategy x = learner->choose();
        const TypeProfile theta = sample_profile(type_rng, dist, joint_cdf);
        const ActionProfile actions = best_response(x, theta, view);

        TraceRow row;
        row.x = x.probs();
        row.region_index = region_index_of(regions, classify(view, x));
        row.expected_regret = eq.value - leader_expected_utility(x, dist, view);
        cumulative += row.expected_regret;
        row.cumulative_regret = cumulative;

        if (cfg.mode == FeedbackMode::kAction) {
          const int l = sample_index(act_rng, x.probs());
          row.realized_utility = view.leader_utility.at(l, actions);
          trace.rows.push_back(row);
          learner->observe(ActionFeedback{actions, l, row.realized_utility});
        } else {
          row.realized_utility = leader_action_utility(view, x, actions);
          trace.rows.push_back(row);
          learner->observe(TypeFeedback{theta});
        }
      }
      traces[static_cast<std::size_t>(run)] = std::move(trace);
    }
  };

  const int threads = resolve_threads(cfg.threads, cfg.replications);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return traces;
}

}  // namespace bsg
