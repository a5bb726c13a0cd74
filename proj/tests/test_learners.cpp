#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bsg/harness.hpp"
#include "bsg/learners.hpp"

using namespace bsg;

namespace {

constexpr int kGood = 0, kBad = 1;

// Drive a learner by hand against an instance, returning the strategies it
// chose. Exercises the reset/choose/observe contract without the harness.
std::vector<MixedStrategy> drive(Learner& learner, const GameInstance& game,
                                 int rounds, std::uint64_t seed) {
  const PublicView& view = game.view();
  learner.reset(view, rounds);
  SplitMix64 type_rng = make_stream(seed, 0, StreamPurpose::kTypes);
  SplitMix64 act_rng = make_stream(seed, 0, StreamPurpose::kLeaderAction);

  std::vector<double> cdf;
  if (game.distribution().kind() == TypeDistribution::Kind::kGeneral) {
    cdf.resize(game.distribution().joint().size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
      acc += game.distribution().joint()[i];
      cdf[i] = acc;
    }
  }

  std::vector<MixedStrategy> plays;
  for (int t = 0; t < rounds; ++t) {
    const MixedStrategy x = learner.choose();
    plays.push_back(x);
    const TypeProfile theta = sample_profile(type_rng, game.distribution(), cdf);
    if (learner.mode() == FeedbackMode::kType) {
      learner.observe(TypeFeedback{theta});
    } else {
      const ActionProfile actions = best_response(x, theta, view);
      const int l = sample_index(act_rng, x.probs());
      learner.observe(ActionFeedback{actions, l, view.leader_utility.at(l, actions)});
    }
  }
  return plays;
}

}  // namespace

TEST_CASE("phi map") {
  const GameInstance g1 = make_g1(0.2);
  SECTION("hand value on the hard instance") {
    const auto phi = phi_map(g1.view(), MixedStrategy({0.7, 0.3}));
    REQUIRE(phi.size() == 2);
    CHECK(phi[0] == -1.0);
    CHECK(phi[1] == 0.0);
  }
  SECTION("zero leader utility gives the zero vector") {
    PublicView view = g1.view();
    view.leader_utility = LeaderUtility::dense(1, 2, 2, std::vector<double>(4, 0.0));
    const auto phi = phi_map(view, MixedStrategy({0.7, 0.3}));
    CHECK(phi == std::vector<double>{0.0, 0.0});
  }
  SECTION("<-phi(x), D> recovers the expected utility") {
    SplitMix64 rng = make_stream(401, 0, StreamPurpose::kAux);
    const GameInstance g = gen_random_instance(2, 2, 2, 2, DistKind::kGeneral, 41);
    for (int t = 0; t < 50; ++t) {
      const MixedStrategy x(sample_simplex(rng, 2));
      const auto phi = phi_map(g.view(), x);
      double dot = 0.0;
      for (long long i = 0; i < 4; ++i)
        dot -= phi[static_cast<std::size_t>(i)] * g.distribution().prob_flat(i);
      CHECK(dot == Catch::Approx(leader_expected_utility(x, g.distribution(), g.view()))
                       .margin(1e-12));
    }
  }
}

TEST_CASE("type-feedback general learner") {
  const GameInstance g1 = make_g1(0.2);
  TypeFeedbackGeneral learner;

  SECTION("round one is uniform") {
    learner.reset(g1.view(), 10);
    CHECK(learner.choose() == MixedStrategy::uniform(2));
  }
  SECTION("plays the empirically optimal region") {
    learner.reset(g1.view(), 10);
    learner.observe(TypeFeedback{TypeProfile{{0}}});
    learner.observe(TypeFeedback{TypeProfile{{0}}});
    learner.observe(TypeFeedback{TypeProfile{{1}}});
    const MixedStrategy x = learner.choose();
    CHECK(x(0) >= x(1));
  }
  SECTION("rejects action feedback") {
    learner.reset(g1.view(), 10);
    CHECK_THROWS_AS(learner.observe(ActionFeedback{ActionProfile{{0}}, 0, 1.0}),
                    ValidationError);
  }
  SECTION("choose is replay-stable and side-effect-free") {
    TypeFeedbackGeneral a, b;
    const auto plays_a = drive(a, g1, 40, 7);
    b.reset(g1.view(), 40);
    SplitMix64 type_rng = make_stream(7, 0, StreamPurpose::kTypes);
    std::vector<double> cdf(g1.distribution().joint().size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
      acc += g1.distribution().joint()[i];
      cdf[i] = acc;
    }
    for (int t = 0; t < 40; ++t) {
      (void)b.choose();  // extra calls must not perturb anything
      const MixedStrategy x = b.choose();
      CHECK(x == plays_a[static_cast<std::size_t>(t)]);
      b.observe(TypeFeedback{sample_profile(type_rng, g1.distribution(), cdf)});
    }
  }
}

TEST_CASE("learners never see the distribution") {
  // identical views with different hidden distributions and identical
  // scripted feedback must produce identical strategy sequences
  const GameInstance a = make_g1(0.2);
  const GameInstance b = make_g1(0.05);
  const std::vector<TypeProfile> script{{{0}}, {{1}}, {{1}}, {{0}}, {{0}}};

  TypeFeedbackGeneral la, lb;
  la.reset(a.view(), 10);
  lb.reset(b.view(), 10);
  for (const auto& theta : script) {
    CHECK(la.choose() == lb.choose());
    la.observe(TypeFeedback{theta});
    lb.observe(TypeFeedback{theta});
  }
  CHECK(la.choose() == lb.choose());
}

TEST_CASE("type-feedback independent learner") {
  SECTION("round one is uniform") {
    const GameInstance g = make_bench_instance();
    TypeFeedbackIndependent learner;
    learner.reset(g.view(), 10);
    CHECK(learner.choose() == MixedStrategy::uniform(2));
  }
  SECTION("marginal counting") {
    const GameInstance g = gen_random_instance(2, 2, 2, 2, DistKind::kIndependent, 10);
    TypeFeedbackIndependent learner;
    learner.reset(g.view(), 10);
    learner.observe(TypeFeedback{TypeProfile{{0, 1}}});
    learner.observe(TypeFeedback{TypeProfile{{0, 0}}});
    const TypeDistribution d = learner.empirical_product();
    CHECK(d.joint() == std::vector<double>{0.5, 0.5, 0.0, 0.0});
  }
}

TEST_CASE("ucb region learner") {
  const GameInstance g1 = make_g1(0.2);

  SECTION("bonus formula and monotonicity") {
    ActionFeedbackUcb learner;
    learner.reset(g1.view(), 100);
    CHECK(learner.bonus(4) ==
          Catch::Approx(std::sqrt(12.0 * std::log(300.0) / 4.0)).margin(1e-12));
    CHECK(learner.bonus(4) == Catch::Approx(4.1366).margin(1e-3));
    for (long long n = 1; n < 50; ++n) CHECK(learner.bonus(n + 1) < learner.bonus(n));
  }
  SECTION("horizon must cover the region count") {
    ActionFeedbackUcb learner;
    CHECK_THROWS_AS(learner.reset(g1.view(), 3), CapExceededError);
  }
  SECTION("initialization sweeps region witnesses in order") {
    const auto regions = enumerate_regions(g1.view());
    ActionFeedbackUcb learner;
    const auto plays = drive(learner, g1, 4, 11);
    for (int t = 0; t < 4; ++t)
      CHECK(plays[static_cast<std::size_t>(t)] ==
            regions[static_cast<std::size_t>(t)].witness);
  }
  SECTION("visit counts account for every round") {
    ActionFeedbackUcb learner;
    learner.reset(g1.view(), 60);
    SplitMix64 type_rng = make_stream(13, 0, StreamPurpose::kTypes);
    std::vector<double> cdf(g1.distribution().joint().size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
      acc += g1.distribution().joint()[i];
      cdf[i] = acc;
    }
    for (int t = 1; t <= 60; ++t) {
      const MixedStrategy x = learner.choose();
      const TypeProfile theta = sample_profile(type_rng, g1.distribution(), cdf);
      const ActionProfile actions = best_response(x, theta, g1.view());
      learner.observe(ActionFeedback{actions, 0, g1.view().leader_utility.at(0, actions)});
      long long total = 0;
      for (int r = 0; r < learner.region_count(); ++r) total += learner.visit_count(r);
      CHECK(total == t);
    }
  }
  SECTION("the optimal region's UCB stays optimistic most rounds") {
    const double optimum = offline_optimal(g1.view(), g1.distribution()).value;
    const auto regions = enumerate_regions(g1.view());
    const int star = region_index_of(regions, BestResponseMapping(1, 2, {kGood, kBad}));
    REQUIRE(star >= 0);
    int below = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      ActionFeedbackUcb learner;
      const int T = 120;
      learner.reset(g1.view(), T);
      SplitMix64 type_rng = make_stream(seed, 0, StreamPurpose::kTypes);
      for (int t = 1; t <= T; ++t) {
        const MixedStrategy x = learner.choose();
        std::vector<double> cdf{g1.distribution().joint()[0], 1.0};
        const TypeProfile theta = sample_profile(type_rng, g1.distribution(), cdf);
        const ActionProfile actions = best_response(x, theta, g1.view());
        learner.observe(
            ActionFeedback{actions, 0, g1.view().leader_utility.at(0, actions)});
        if (t > learner.region_count()) {
          ++total;
          if (learner.ucb_value(star) < optimum - 1e-12) ++below;
        }
      }
    }
    CHECK(below <= total / 10);
  }
}

TEST_CASE("linear bandit learner") {
  const GameInstance g1 = make_g1(0.2);

  SECTION("arm set of the hard instance deduplicates to two loss vectors") {
    ActionFeedbackLinBandit learner;
    learner.reset(g1.view(), 100);
    REQUIRE(learner.arm_count() == 2);
    CHECK(learner.arm_phi(0) == std::vector<double>{-1.0, 0.0});
    CHECK(learner.arm_phi(1) == std::vector<double>{0.0, -1.0});
  }
  SECTION("first round explores the widest arm, lowest index on ties") {
    ActionFeedbackLinBandit learner;
    learner.reset(g1.view(), 100);
    // V = I and b = 0: the estimate is zero and both unit-norm arms tie
    CHECK(learner.pick_arm() == 0);
    CHECK(learner.choose() == learner.arm_strategy(0));
  }
  SECTION("gram matrix stays symmetric with eigenvalues >= lambda") {
    ActionFeedbackLinBandit learner;
    drive(learner, g1, 50, 17);
    const auto& v = learner.gram();
    const int d = learner.dimension();
    SplitMix64 rng = make_stream(431, 0, StreamPurpose::kAux);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        CHECK(v[static_cast<std::size_t>(i) * d + j] ==
              v[static_cast<std::size_t>(j) * d + i]);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> z(static_cast<std::size_t>(d));
      double norm = 0.0;
      for (auto& e : z) {
        e = 2.0 * rng.next_double() - 1.0;
        norm += e * e;
      }
      double quad = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          quad += z[static_cast<std::size_t>(i)] *
                  v[static_cast<std::size_t>(i) * d + j] *
                  z[static_cast<std::size_t>(j)];
      CHECK(quad >= norm - 1e-9);
    }
  }
  SECTION("dimension cap") {
    // K^n = 5^6 well past the gram cap
    const GameInstance big = gen_random_instance(6, 2, 2, 5, DistKind::kIndependent, 3);
    ActionFeedbackLinBandit learner;
    CHECK_THROWS_AS(learner.reset(big.view(), 100), CapExceededError);
  }
}

TEST_CASE("learner factory") {
  CHECK(make_learner("tf-general", FeedbackMode::kType)->name() == "tf-general");
  CHECK(make_learner("ucb", FeedbackMode::kAction)->name() == "ucb");
  CHECK_THROWS_AS(make_learner("ucb", FeedbackMode::kType), ValidationError);
  CHECK_THROWS_AS(make_learner("nope", FeedbackMode::kType), ValidationError);
  const auto fixed = make_learner("fixed:0.25,0.75", FeedbackMode::kType);
  const GameInstance g1 = make_g1(0.2);
  fixed->reset(g1.view(), 5);
  CHECK(fixed->choose()(1) == 0.75);
}
