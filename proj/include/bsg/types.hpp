// Domain types for multi-follower Bayesian Stackelberg games.
//
// An instance couples a public view (player counts, leader action count L,
// follower action count A, type count K, both utility tables) with a hidden
// joint type distribution. Learning code only ever receives the view.
//
// Index conventions, fixed for file-format stability:
//   * type profiles are linearized row-major with follower 0 most
//     significant: index = theta_0 * K^(n-1) + ... + theta_{n-1};
//   * action profiles likewise with base A;
//   * the dense leader table stores u(l, a-profile) at
//     profile_index * L + l (profile-major, l fastest);
//   * follower utilities store v[i][l][a][k] flattened in that order.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bsg {

inline constexpr double kSimplexEps = 1e-9;   // simplex sum tolerance
inline constexpr double kTieEps = 1e-9;       // follower utility tie tolerance
inline constexpr double kFeasEps = 1e-8;      // LP feasibility tolerance
inline constexpr double kPivotEps = 1e-10;    // simplex pivot tolerance
inline constexpr long long kProfileCap = 1000000;      // max K^n for exact sums
inline constexpr long long kDenseLeaderCap = 1000000;  // max A^n for dense u
inline constexpr long long kOfulCap = 4096;            // max K^n gram dimension

// Validation failures: malformed inputs, broken invariants. CLI exit code 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scale guards: profile caps, LP variable caps, horizons. CLI exit code 2.
struct CapExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
// Overflow-safe integer power; returns -1 once past `cap`.
inline long long checked_pow(long long base, int exp, long long cap) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > cap / base) return -1;
    r *= base;
  }
  return r;
}
}  // namespace detail

inline long long pow_or_throw(long long base, int exp, long long cap,
                              const char* what) {
  const long long r = detail::checked_pow(base, exp, cap);
  if (r < 0) throw CapExceededError(std::string(what) + " exceeds cap");
  return r;
}

// ---------------------------------------------------------------------------
// Profiles

struct TypeProfile {
  std::vector<int> types;  // entries in [0, K)

  bool operator==(const TypeProfile&) const = default;
};

struct ActionProfile {
  std::vector<int> actions;  // entries in [0, A)

  bool operator==(const ActionProfile&) const = default;
};

inline long long profile_index(std::span<const int> entries, int radix) {
  long long idx = 0;
  for (int e : entries) idx = idx * radix + e;
  return idx;
}

inline void profile_from_index(long long idx, int n, int radix,
                               std::vector<int>& out) {
  out.assign(static_cast<std::size_t>(n), 0);
  for (int i = n - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(idx % radix);
    idx /= radix;
  }
}

// ---------------------------------------------------------------------------
// MixedStrategy: a point on the leader's simplex.

class MixedStrategy {
 public:
  MixedStrategy() = default;

  explicit MixedStrategy(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.size() < 2) throw ValidationError("MixedStrategy: need L >= 2");
    double sum = 0.0;
    for (auto& v : p_) {
      if (!std::isfinite(v)) throw ValidationError("MixedStrategy: non-finite entry");
      if (v < -kSimplexEps) throw ValidationError("MixedStrategy: negative entry");
      if (v < 0.0) v = 0.0;
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kSimplexEps)
      throw ValidationError("MixedStrategy: probabilities sum to " + std::to_string(sum));
  }

  static MixedStrategy uniform(int L) {
    return MixedStrategy(std::vector<double>(static_cast<std::size_t>(L),
                                             1.0 / static_cast<double>(L)));
  }

  static MixedStrategy unit(int L, int l) {
    std::vector<double> p(static_cast<std::size_t>(L), 0.0);
    p[static_cast<std::size_t>(l)] = 1.0;
    return MixedStrategy(std::move(p));
  }

  int size() const { return static_cast<int>(p_.size()); }
  double operator()(int l) const { return p_[static_cast<std::size_t>(l)]; }
  const std::vector<double>& probs() const { return p_; }

  bool operator==(const MixedStrategy&) const = default;

 private:
  std::vector<double> p_;
};

// ---------------------------------------------------------------------------
// TypeDistribution: general joint table over K^n profiles, or a product of
// n marginals. The general variant is only constructible under the profile
// cap; the independent variant has no cap but exact joint sums over it do.

class TypeDistribution {
 public:
  enum class Kind { kGeneral, kIndependent };

  static TypeDistribution general(int n, int K, std::vector<double> joint) {
    const long long expect = pow_or_throw(K, n, kProfileCap, "K^n");
    if (static_cast<long long>(joint.size()) != expect)
      throw ValidationError("TypeDistribution: joint table has wrong size");
    validate_table(joint, "joint");
    TypeDistribution d;
    d.kind_ = Kind::kGeneral;
    d.n_ = n;
    d.K_ = K;
    d.joint_ = std::move(joint);
    return d;
  }

  static TypeDistribution independent(std::vector<std::vector<double>> marginals) {
    if (marginals.empty())
      throw ValidationError("TypeDistribution: no marginals");
    const int K = static_cast<int>(marginals.front().size());
    for (const auto& m : marginals) {
      if (static_cast<int>(m.size()) != K)
        throw ValidationError("TypeDistribution: ragged marginals");
      validate_table(m, "marginal");
    }
    TypeDistribution d;
    d.kind_ = Kind::kIndependent;
    d.n_ = static_cast<int>(marginals.size());
    d.K_ = K;
    d.marginals_ = std::move(marginals);
    return d;
  }

  Kind kind() const { return kind_; }
  int followers() const { return n_; }
  int type_count() const { return K_; }

  // K^n, or -1 when it exceeds the profile cap (independent variant only).
  long long num_profiles() const {
    return detail::checked_pow(K_, n_, kProfileCap);
  }

  double prob(const TypeProfile& theta) const {
    if (kind_ == Kind::kGeneral)
      return joint_[static_cast<std::size_t>(profile_index(theta.types, K_))];
    double p = 1.0;
    for (int i = 0; i < n_; ++i)
      p *= marginals_[static_cast<std::size_t>(i)]
                     [static_cast<std::size_t>(theta.types[static_cast<std::size_t>(i)])];
    return p;
  }

  double prob_flat(long long idx) const {
    if (kind_ == Kind::kGeneral) return joint_[static_cast<std::size_t>(idx)];
    double p = 1.0;
    for (int i = n_ - 1; i >= 0; --i) {
      p *= marginals_[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx % K_)];
      idx /= K_;
    }
    return p;
  }

  const std::vector<double>& joint() const {
    if (kind_ != Kind::kGeneral)
      throw ValidationError("TypeDistribution: not a general table");
    return joint_;
  }

  const std::vector<std::vector<double>>& marginals() const {
    if (kind_ != Kind::kIndependent)
      throw ValidationError("TypeDistribution: not an independent product");
    return marginals_;
  }

  bool same_shape(const TypeDistribution& o) const {
    return n_ == o.n_ && K_ == o.K_;
  }

 private:
  static void validate_table(const std::vector<double>& t, const char* what) {
    double sum = 0.0;
    for (double v : t) {
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError(std::string("TypeDistribution: bad ") + what + " entry");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kSimplexEps)
      throw ValidationError(std::string("TypeDistribution: ") + what +
                            " sums to " + std::to_string(sum));
  }

  Kind kind_ = Kind::kGeneral;
  int n_ = 0;
  int K_ = 0;
  std::vector<double> joint_;
  std::vector<std::vector<double>> marginals_;
};

// ---------------------------------------------------------------------------
// Leader utility: dense table over A^n joint actions when that fits, or a
// caller-supplied evaluator beyond the cap.

class LeaderUtility {
 public:
  using Evaluator = std::function<double(int l, const ActionProfile&)>;

  static LeaderUtility dense(int n, int L, int A, std::vector<double> table) {
    const long long profiles = pow_or_throw(A, n, kDenseLeaderCap, "A^n");
    if (static_cast<long long>(table.size()) != profiles * L)
      throw ValidationError("LeaderUtility: table has wrong size");
    for (double v : table)
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw ValidationError("LeaderUtility: entry outside [0,1]");
    LeaderUtility u;
    u.n_ = n;
    u.L_ = L;
    u.A_ = A;
    u.table_ = std::move(table);
    return u;
  }

  static LeaderUtility from_evaluator(int n, int L, int A, Evaluator eval) {
    LeaderUtility u;
    u.n_ = n;
    u.L_ = L;
    u.A_ = A;
    u.eval_ = std::move(eval);
    return u;
  }

  bool is_dense() const { return !table_.empty(); }
  const std::vector<double>& table() const { return table_; }

  double at(int l, const ActionProfile& a) const {
    if (is_dense())
      return table_[static_cast<std::size_t>(profile_index(a.actions, A_) * L_ + l)];
    return eval_(l, a);
  }

 private:
  int n_ = 0, L_ = 0, A_ = 0;
  std::vector<double> table_;
  Evaluator eval_;
};

// ---------------------------------------------------------------------------
// PublicView: everything the leader (and so any learner) may see. Holds no
// distribution data by construction.

struct PublicView {
  int n = 0;  // followers
  int L = 0;  // leader actions
  int A = 0;  // follower actions
  int K = 0;  // types per follower
  LeaderUtility leader_utility;
  std::vector<double> follower_utilities;  // v[i][l][a][k], flattened

  double follower_u(int i, int l, int a, int k) const {
    return follower_utilities[static_cast<std::size_t>(((i * L + l) * A + a) * K + k)];
  }

  void validate() const {
    if (n < 1 || L < 2 || A < 2 || K < 1)
      throw ValidationError("PublicView: sizes out of range (need n>=1, L>=2, A>=2, K>=1)");
    const std::size_t expect = static_cast<std::size_t>(n) * L * A * K;
    if (follower_utilities.size() != expect)
      throw ValidationError("PublicView: follower utility table has wrong size");
    for (double v : follower_utilities)
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw ValidationError("PublicView: follower utility outside [0,1]");
  }
};

// ---------------------------------------------------------------------------
// GameInstance: a view plus the hidden distribution.

class GameInstance {
 public:
  GameInstance(PublicView view, TypeDistribution dist)
      : view_(std::move(view)), dist_(std::move(dist)) {
    view_.validate();
    if (dist_.followers() != view_.n || dist_.type_count() != view_.K)
      throw ValidationError("GameInstance: distribution shape mismatch");
  }

  const PublicView& view() const { return view_; }
  const TypeDistribution& distribution() const { return dist_; }

 private:
  PublicView view_;
  TypeDistribution dist_;
};

}  // namespace bsg
