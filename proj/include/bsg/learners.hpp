// The online algorithms behind one learner contract:
//
//   reset(view, T);  then repeated  choose() / observe(feedback)  cycles.
//
// Learners see only the public view and the per-round feedback, never the
// hidden type distribution. choose() is a pure function of accumulated
// state; only observe() mutates. Where a round's decision is needed again
// inside observe() (UCB's chosen region, the bandit's chosen arm), it is
// recomputed deterministically rather than cached.

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bsg/game.hpp"
#include "bsg/geometry.hpp"
#include "bsg/solvers.hpp"
#include "bsg/types.hpp"

namespace bsg {

struct TypeFeedback {
  TypeProfile types;
};

struct ActionFeedback {
  ActionProfile actions;
  int leader_action = 0;       // realized l ~ x^t
  double realized_utility = 0; // u(l, actions)
};

using Feedback = std::variant<TypeFeedback, ActionFeedback>;

enum class FeedbackMode { kType, kAction };

class Learner {
 public:
  virtual ~Learner() = default;
  virtual void reset(const PublicView& view, int horizon) = 0;
  virtual MixedStrategy choose() const = 0;
  virtual void observe(const Feedback& feedback) = 0;
  virtual FeedbackMode mode() const = 0;
  virtual std::string_view name() const = 0;
};

// Loss vector of a strategy, one entry per type profile (row-major):
// phi(x)[theta] = -u(x, br(theta, x)). By construction
// <-phi(x), D> = U_D(x) for every distribution D on the same support.
inline std::vector<double> phi_map(const PublicView& view,
                                   const MixedStrategy& x) {
  const long long profiles = pow_or_throw(view.K, view.n, kOfulCap, "K^n");
  const std::vector<int> w = best_action_table(view, x);
  std::vector<double> phi(static_cast<std::size_t>(profiles));
  std::vector<int> theta(static_cast<std::size_t>(view.n), 0);
  ActionProfile act;
  act.actions.assign(static_cast<std::size_t>(view.n), 0);
  for (long long idx = 0; idx < profiles; ++idx) {
    for (int i = 0; i < view.n; ++i)
      act.actions[static_cast<std::size_t>(i)] =
          w[static_cast<std::size_t>(i) * view.K + theta[static_cast<std::size_t>(i)]];
    phi[static_cast<std::size_t>(idx)] = -leader_action_utility(view, x, act);
    for (int i = view.n - 1; i >= 0; --i) {
      auto& t = theta[static_cast<std::size_t>(i)];
      if (++t < view.K) break;
      t = 0;
    }
  }
  return phi;
}

namespace detail {

inline const TypeFeedback& expect_type(const Feedback& fb) {
  const auto* t = std::get_if<TypeFeedback>(&fb);
  if (!t) throw ValidationError("learner: expected type feedback");
  return *t;
}

inline const ActionFeedback& expect_action(const Feedback& fb) {
  const auto* a = std::get_if<ActionFeedback>(&fb);
  if (!a) throw ValidationError("learner: expected action feedback");
  return *a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Empirically optimal strategy over all observed type profiles; round 1
// plays uniform.

class TypeFeedbackGeneral final : public Learner {
 public:
  void reset(const PublicView& view, int horizon) override {
    (void)horizon;
    view_ = view;
    regions_ = enumerate_regions(view_);
    counts_.clear();
    rounds_ = 0;
  }

  MixedStrategy choose() const override {
    if (rounds_ == 0) return MixedStrategy::uniform(view_.L);
    WeightedProfiles w;
    const double t = static_cast<double>(rounds_);
    for (const auto& [types, c] : counts_)
      w.items.emplace_back(TypeProfile{types}, static_cast<double>(c) / t);
    return detail::optimize_over_regions(view_, regions_, w).x_star;
  }

  void observe(const Feedback& fb) override {
    counts_[detail::expect_type(fb).types.types] += 1;
    ++rounds_;
  }

  FeedbackMode mode() const override { return FeedbackMode::kType; }
  std::string_view name() const override { return "tf-general"; }

 private:
  PublicView view_;
  std::vector<Region> regions_;
  std::map<std::vector<int>, long long> counts_;
  long long rounds_ = 0;
};

// ---------------------------------------------------------------------------
// Per-follower empirical marginals, optimized against their product.

class TypeFeedbackIndependent final : public Learner {
 public:
  void reset(const PublicView& view, int horizon) override {
    (void)horizon;
    pow_or_throw(view.K, view.n, kProfileCap, "K^n");
    view_ = view;
    regions_ = enumerate_regions(view_);
    counts_.assign(static_cast<std::size_t>(view.n),
                   std::vector<long long>(static_cast<std::size_t>(view.K), 0));
    rounds_ = 0;
  }

  MixedStrategy choose() const override {
    if (rounds_ == 0) return MixedStrategy::uniform(view_.L);
    return detail::optimize_over_regions(
               view_, regions_,
               weights_from_distribution(empirical_product()))
        .x_star;
  }

  void observe(const Feedback& fb) override {
    const TypeFeedback& t = detail::expect_type(fb);
    for (int i = 0; i < view_.n; ++i)
      counts_[static_cast<std::size_t>(i)]
             [static_cast<std::size_t>(t.types.types[static_cast<std::size_t>(i)])] += 1;
    ++rounds_;
  }

  TypeDistribution empirical_product() const {
    std::vector<std::vector<double>> marginals(
        static_cast<std::size_t>(view_.n),
        std::vector<double>(static_cast<std::size_t>(view_.K)));
    for (int i = 0; i < view_.n; ++i)
      for (int k = 0; k < view_.K; ++k)
        marginals[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
            static_cast<double>(counts_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) /
            static_cast<double>(rounds_);
    return product_distribution(marginals);
  }

  FeedbackMode mode() const override { return FeedbackMode::kType; }
  std::string_view name() const override { return "tf-independent"; }

 private:
  PublicView view_;
  std::vector<Region> regions_;
  std::vector<std::vector<long long>> counts_;
  long long rounds_ = 0;
};

// ---------------------------------------------------------------------------
// UCB over best-response regions. Each region is an arm; its samples are the
// joint actions observed in rounds where that region was selected, and its
// value estimate is the empirically optimal utility inside the region plus
// the concentration bonus sqrt(4(L+1) log(3T) / N).

class ActionFeedbackUcb final : public Learner {
 public:
  void reset(const PublicView& view, int horizon) override {
    view_ = view;
    regions_ = enumerate_regions(view_);
    if (horizon < static_cast<int>(regions_.size()))
      throw CapExceededError(
          "ucb: horizon T is smaller than the number of best-response regions");
    horizon_ = horizon;
    rounds_ = 0;
    states_.assign(regions_.size(), RegionState{});
    for (auto& s : states_)
      s.util_sum.assign(static_cast<std::size_t>(view_.L), 0.0);
  }

  MixedStrategy choose() const override {
    const int r = pick_region();
    if (rounds_ < static_cast<long long>(regions_.size()))
      return regions_[static_cast<std::size_t>(r)].witness;
    return states_[static_cast<std::size_t>(r)].best_x;
  }

  void observe(const Feedback& fb) override {
    const ActionFeedback& af = detail::expect_action(fb);
    const int r = pick_region();
    RegionState& s = states_[static_cast<std::size_t>(r)];
    s.visits += 1;
    s.action_counts[af.actions.actions] += 1;
    for (int l = 0; l < view_.L; ++l)
      s.util_sum[static_cast<std::size_t>(l)] +=
          view_.leader_utility.at(l, af.actions);
    refresh(r);
    ++rounds_;
  }

  FeedbackMode mode() const override { return FeedbackMode::kAction; }
  std::string_view name() const override { return "ucb"; }

  double bonus(long long visits) const {
    return std::sqrt(4.0 * (view_.L + 1) * std::log(3.0 * horizon_) /
                     static_cast<double>(visits));
  }

  int region_count() const { return static_cast<int>(regions_.size()); }
  long long visit_count(int r) const {
    return states_[static_cast<std::size_t>(r)].visits;
  }
  // empirically optimal utility of the region (no bonus)
  double empirical_value(int r) const {
    return states_[static_cast<std::size_t>(r)].best_value;
  }
  double ucb_value(int r) const {
    const RegionState& s = states_[static_cast<std::size_t>(r)];
    return s.best_value + bonus(s.visits);
  }
  const std::vector<Region>& regions() const { return regions_; }

 private:
  struct RegionState {
    long long visits = 0;
    std::vector<double> util_sum;  // sum over samples of u(l, a^s), per l
    std::map<std::vector<int>, long long> action_counts;
    MixedStrategy best_x;
    double best_value = 0.0;
  };

  int pick_region() const {
    if (rounds_ < static_cast<long long>(regions_.size()))
      return static_cast<int>(rounds_);
    int best = 0;
    double best_ucb = -1.0;
    for (int r = 0; r < static_cast<int>(regions_.size()); ++r) {
      const double u = ucb_value(r);
      if (u > best_ucb + 1e-15) {
        best_ucb = u;
        best = r;
      }
    }
    return best;
  }

  void refresh(int r) {
    RegionState& s = states_[static_cast<std::size_t>(r)];
    std::vector<double> c(s.util_sum);
    for (auto& v : c) v /= static_cast<double>(s.visits);
    const Region& region = regions_[static_cast<std::size_t>(r)];
    const LpResult lp = lp_maximize(c, region.halfspaces);
    s.best_x = region_consistent_point(view_, region, lp.x);
    s.best_value = lp.value;
  }

  PublicView view_;
  std::vector<Region> regions_;
  std::vector<RegionState> states_;
  int horizon_ = 0;
  long long rounds_ = 0;
};

// ---------------------------------------------------------------------------
// OFUL over a finite arm set. Arms are the region vertices (nudged inside
// their region so follower behavior matches the region's mapping), each
// described by its loss vector phi; the unknown parameter is the type
// distribution itself. Ridge regression with lambda = 1, confidence level
// delta = 1/T, parameter norm bound S = 1, noise bound 1.

class ActionFeedbackLinBandit final : public Learner {
 public:
  void reset(const PublicView& view, int horizon) override {
    dim_ = static_cast<int>(pow_or_throw(view.K, view.n, kOfulCap, "K^n"));
    view_ = view;
    horizon_ = horizon;
    rounds_ = 0;
    arms_.clear();

    const std::vector<Region> regions = enumerate_regions(view_);
    for (const Region& region : regions) {
      for (const MixedStrategy& v : region_vertices(region)) {
        Arm arm;
        arm.x = region_consistent_point(view_, region, v);
        arm.phi = phi_map(view_, arm.x);
        bool dup = false;
        for (const Arm& kept : arms_)
          if (kept.phi == arm.phi) {
            dup = true;
            break;
          }
        if (!dup) arms_.push_back(std::move(arm));
      }
    }

    gram_.assign(static_cast<std::size_t>(dim_) * dim_, 0.0);
    for (int i = 0; i < dim_; ++i) gram_[static_cast<std::size_t>(i) * dim_ + i] = kLambda;
    response_.assign(static_cast<std::size_t>(dim_), 0.0);
  }

  MixedStrategy choose() const override {
    return arms_[static_cast<std::size_t>(pick_arm())].x;
  }

  void observe(const Feedback& fb) override {
    const ActionFeedback& af = detail::expect_action(fb);
    const Arm& arm = arms_[static_cast<std::size_t>(pick_arm())];
    const double loss = -af.realized_utility;
    for (int i = 0; i < dim_; ++i) {
      response_[static_cast<std::size_t>(i)] += arm.phi[static_cast<std::size_t>(i)] * loss;
      for (int j = 0; j < dim_; ++j)
        gram_[static_cast<std::size_t>(i) * dim_ + j] +=
            arm.phi[static_cast<std::size_t>(i)] * arm.phi[static_cast<std::size_t>(j)];
    }
    ++rounds_;
  }

  FeedbackMode mode() const override { return FeedbackMode::kAction; }
  std::string_view name() const override { return "linbandit"; }

  int arm_count() const { return static_cast<int>(arms_.size()); }
  const MixedStrategy& arm_strategy(int i) const {
    return arms_[static_cast<std::size_t>(i)].x;
  }
  const std::vector<double>& arm_phi(int i) const {
    return arms_[static_cast<std::size_t>(i)].phi;
  }
  const std::vector<double>& gram() const { return gram_; }
  int dimension() const { return dim_; }

  // OFUL ellipsoid radius at the current state.
  double beta() const {
    const std::vector<double> chol = cholesky();
    double logdet = 0.0;
    for (int i = 0; i < dim_; ++i)
      logdet += 2.0 * std::log(chol[static_cast<std::size_t>(i) * dim_ + i]);
    const double log_inv_delta = std::log(static_cast<double>(horizon_));
    return std::sqrt(logdet - dim_ * std::log(kLambda) + 2.0 * log_inv_delta) +
           std::sqrt(kLambda) * kParamBound;
  }

  int pick_arm() const {
    const std::vector<double> chol = cholesky();
    std::vector<double> est(static_cast<std::size_t>(dim_));
    chol_solve(chol, response_, est);  // ridge estimate V^-1 b
    const double b = beta();

    int best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<double> tmp(static_cast<std::size_t>(dim_));
    for (int a = 0; a < static_cast<int>(arms_.size()); ++a) {
      const auto& phi = arms_[static_cast<std::size_t>(a)].phi;
      double mean = 0.0;
      for (int i = 0; i < dim_; ++i)
        mean += phi[static_cast<std::size_t>(i)] * est[static_cast<std::size_t>(i)];
      chol_solve(chol, phi, tmp);
      double quad = 0.0;
      for (int i = 0; i < dim_; ++i)
        quad += phi[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(i)];
      const double optimistic = mean - b * std::sqrt(std::max(quad, 0.0));
      if (optimistic < best_loss - 1e-15) {
        best_loss = optimistic;
        best = a;
      }
    }
    return best;
  }

 private:
  struct Arm {
    MixedStrategy x;
    std::vector<double> phi;
  };

  static constexpr double kLambda = 1.0;
  static constexpr double kParamBound = 1.0;  // S: ||D||_2 <= ||D||_1 = 1

  // Lower-triangular Cholesky factor of the gram matrix.
  std::vector<double> cholesky() const {
    std::vector<double> c(gram_);
    const int d = dim_;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = c[static_cast<std::size_t>(i) * d + j];
        for (int k = 0; k < j; ++k)
          s -= c[static_cast<std::size_t>(i) * d + k] * c[static_cast<std::size_t>(j) * d + k];
        if (i == j)
          c[static_cast<std::size_t>(i) * d + i] = std::sqrt(std::max(s, 1e-12));
        else
          c[static_cast<std::size_t>(i) * d + j] = s / c[static_cast<std::size_t>(j) * d + j];
      }
      for (int j = i + 1; j < d; ++j) c[static_cast<std::size_t>(i) * d + j] = 0.0;
    }
    return c;
  }

  // Solve (L L^T) z = w.
  void chol_solve(const std::vector<double>& chol, const std::vector<double>& w,
                  std::vector<double>& z) const {
    const int d = dim_;
    for (int i = 0; i < d; ++i) {
      double s = w[static_cast<std::size_t>(i)];
      for (int k = 0; k < i; ++k)
        s -= chol[static_cast<std::size_t>(i) * d + k] * z[static_cast<std::size_t>(k)];
      z[static_cast<std::size_t>(i)] = s / chol[static_cast<std::size_t>(i) * d + i];
    }
    for (int i = d - 1; i >= 0; --i) {
      double s = z[static_cast<std::size_t>(i)];
      for (int k = i + 1; k < d; ++k)
        s -= chol[static_cast<std::size_t>(k) * d + i] * z[static_cast<std::size_t>(k)];
      z[static_cast<std::size_t>(i)] = s / chol[static_cast<std::size_t>(i) * d + i];
    }
  }

  PublicView view_;
  std::vector<Arm> arms_;
  std::vector<double> gram_;      // V = lambda I + sum phi phi^T
  std::vector<double> response_;  // b = sum phi * loss
  int dim_ = 0;
  int horizon_ = 0;
  long long rounds_ = 0;
};

// ---------------------------------------------------------------------------
// Plays one strategy forever; works under either feedback mode.

class FixedStrategyLearner final : public Learner {
 public:
  FixedStrategyLearner(MixedStrategy x, FeedbackMode mode)
      : x_(std::move(x)), mode_(mode) {}

  void reset(const PublicView& view, int horizon) override {
    (void)horizon;
    if (x_.size() != view.L)
      throw ValidationError("fixed learner: strategy dimension != L");
  }
  MixedStrategy choose() const override { return x_; }
  void observe(const Feedback&) override {}
  FeedbackMode mode() const override { return mode_; }
  std::string_view name() const override { return "fixed"; }

 private:
  MixedStrategy x_;
  FeedbackMode mode_;
};

// Learner factory for CLI specs: tf-general | tf-independent | ucb |
// linbandit | fixed:p0,p1,... The requested feedback mode must match the
// learner; `fixed` accepts either.
inline std::unique_ptr<Learner> make_learner(const std::string& spec,
                                             FeedbackMode mode) {
  std::unique_ptr<Learner> l;
  if (spec == "tf-general") l = std::make_unique<TypeFeedbackGeneral>();
  else if (spec == "tf-independent") l = std::make_unique<TypeFeedbackIndependent>();
  else if (spec == "ucb") l = std::make_unique<ActionFeedbackUcb>();
  else if (spec == "linbandit") l = std::make_unique<ActionFeedbackLinBandit>();
  else if (spec.rfind("fixed:", 0) == 0) {
    std::vector<double> p;
    std::string rest = spec.substr(6);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      std::size_t next = rest.find(',', pos);
      if (next == std::string::npos) next = rest.size();
      p.push_back(std::stod(rest.substr(pos, next - pos)));
      pos = next + 1;
    }
    return std::make_unique<FixedStrategyLearner>(MixedStrategy(std::move(p)), mode);
  } else {
    throw ValidationError("unknown learner: " + spec);
  }
  if (l->mode() != mode)
    throw ValidationError("learner " + spec + " does not support the requested feedback mode");
  return l;
}

}  // namespace bsg
