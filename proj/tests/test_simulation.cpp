#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "freewalk/harmonic.hpp"
#include "freewalk/metrics.hpp"
#include "freewalk/simulation.hpp"

using namespace freewalk;

TEST(Trajectory, ZeroSteps) {
  auto G = cyclic_product({2, 3});
  auto t = simulate(G, StepDistribution::uniform(G), 0, 1);
  EXPECT_TRUE(t.final.empty());
  EXPECT_EQ(t.length_series, std::vector<long long>{0});
}

TEST(Trajectory, DeterministicPerSeedAndStream) {
  auto G = cyclic_product({3, 4});
  auto mu = StepDistribution::uniform(G);
  auto a = simulate(G, mu, 500, 9, std::nullopt, 3);
  auto b = simulate(G, mu, 500, 9, std::nullopt, 3);
  auto c = simulate(G, mu, 500, 9, std::nullopt, 4);
  EXPECT_EQ(a.final, b.final);
  EXPECT_EQ(a.length_series, b.length_series);
  EXPECT_NE(a.length_series, c.length_series);
  auto quiet = simulate(G, mu, 500, 9, std::nullopt, 3, false);
  EXPECT_TRUE(quiet.length_series.empty());
  EXPECT_EQ(quiet.final, a.final);
}

TEST(Trajectory, LengthStepsBounded) {
  CounterRng rng(6);
  for (const auto& G : fwtest::small_products()) {
    if (!G.factor(0).cyclic_order()) continue;
    auto mu = fwtest::random_measure(G, rng);
    const auto len = letter_lengths(G, minimal_generators(G));
    auto t = simulate(G, mu, 2000, 5, len);
    for (std::size_t n = 1; n < t.length_series.size(); ++n)
      ASSERT_LE(std::llabs(t.length_series[n] - t.length_series[n - 1]), len.max_weight());
    EXPECT_EQ(t.final_length, len.length(t.final));
    for (std::size_t i = 1; i < t.final.size(); ++i) ASSERT_FALSE(G.same_factor(t.final[i - 1], t.final[i]));
  }
}

TEST(Drift, MonteCarloWithinFiveSigma) {
  auto w = make_family("zkzk-simple", {{{"k", 4}}, {}, {}});
  auto est = estimate_drift(w.G, w.mu, 5000, 400, 123);
  const double gamma = (std::sqrt(5.0) - 1) / 4;
  EXPECT_EQ(est.reps, 400u);
  EXPECT_GT(est.stderr_, 0.0);
  EXPECT_NEAR(est.estimate, gamma, 5 * est.stderr_ + 1.0 / 5000);
}

TEST(Drift, ThreadCountDoesNotChangeResult) {
  auto w = make_family("z2z3", {{{"p", 0.2}, {"q", 0.3}}, {}, {}});
  auto one = estimate_drift(w.G, w.mu, 300, 64, 5, std::nullopt, 1);
  auto many = estimate_drift(w.G, w.mu, 300, 64, 5, std::nullopt, 8);
  EXPECT_EQ(one.estimate, many.estimate);
  EXPECT_EQ(one.stderr_, many.stderr_);
  EXPECT_THROW(estimate_drift(w.G, w.mu, 300, 1, 5), Error);
  EXPECT_THROW(estimate_drift(w.G, w.mu, 0, 10, 5), Error);
}

TEST(Hitting, HorizonOneIsStepLaw) {
  auto G = cyclic_product({2, 3});
  auto mu = StepDistribution::from_weights(G, {0.5, 0.35, 0.15});
  auto est = estimate_hitting(G, mu, G.id({1, 1}), 1, 20000, 3);
  EXPECT_NEAR(est.estimate, 0.35, 4 * std::sqrt(0.35 * 0.65 / 20000));
  EXPECT_EQ(est.bias_allowance, est.estimate);
}

TEST(Hitting, ApproachesSolverFromBelow) {
  auto G = cyclic_product({2, 3});
  auto mu = StepDistribution::from_weights(G, {0.5, 0.35, 0.15});
  auto rep = solve(G, mu);
  const LetterId a = G.id({0, 1});
  auto shortrun = estimate_hitting(G, mu, a, 5, 20000, 8);
  auto longrun = estimate_hitting(G, mu, a, 400, 20000, 8);
  // same streams: every replication hitting by step 5 also hits by step 400
  EXPECT_LE(shortrun.estimate, longrun.estimate);
  EXPECT_NEAR(longrun.estimate, rep.q[a], 4 * longrun.stderr_ + longrun.bias_allowance);
  EXPECT_LT(longrun.bias_allowance, 0.01);
}

TEST(Prefix, MatchesHarmonicCylinders) {
  auto w = make_family("z2z3", {{{"p", 0.3}, {"q", 0.1}}, {}, {}});
  auto chain = build_chain(w.G, solve(w.G, w.mu).r);
  const std::size_t reps = 20000;
  auto est = estimate_prefix(w.G, w.mu, 200, reps, 17, 2);
  EXPECT_EQ(est.used + est.dropped, reps);
  EXPECT_LT(est.dropped, reps / 100);
  for (const Word& x : normal_words(w.G, 2)) {
    const double p = cylinder_prob(chain, x);
    // prefixes still move occasionally after 200 steps
    EXPECT_NEAR(est.frequency(x), p, 5 * std::sqrt(p * (1 - p) / static_cast<double>(est.used)) + 0.01);
  }
}

TEST(Convolution, SmallPowers) {
  auto G = cyclic_product({2, 3});
  auto mu = StepDistribution::from_weights(G, {0.5, 0.35, 0.15});
  auto c0 = exact_convolution(G, mu, 0);
  EXPECT_EQ(c0.law.size(), 1u);
  auto c1 = exact_convolution(G, mu, 1);
  for (LetterId a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(c1.law.at(Word(normal_form, {a})), mu[a]);
  auto c2 = exact_convolution(G, mu, 2);
  // returns to 1 in two steps: a a, b b^2, b^2 b
  EXPECT_NEAR(c2.law.at(Word{}), 0.25 + 2 * 0.35 * 0.15, 1e-15);
  EXPECT_NEAR(c2.law.at(Word(normal_form, {G.id({1, 2})})), 0.35 * 0.35, 1e-15);
}

TEST(Convolution, MassEntropyAndLengthIncrements) {
  CounterRng rng(15);
  for (const auto& G : fwtest::small_products()) {
    if (G.alphabet_size() > 6) continue;
    auto mu = fwtest::random_measure(G, rng);
    auto series = convolution_series(G, mu, 7);
    ASSERT_EQ(series.size(), 8u);
    for (std::size_t n = 0; n < series.size(); ++n) EXPECT_NEAR(series[n].mass, 1.0, 1e-12);
    for (std::size_t n = 1; n < series.size(); ++n) {
      // subadditivity of H and |.|
      EXPECT_LE(series[n].entropy, series[n - 1].entropy + series[1].entropy + 1e-12);
      EXPECT_LE(series[n].expected_length, series[n - 1].expected_length + 1 + 1e-12);
    }
  }
}

TEST(Convolution, LengthIncrementIdentity) {
  // Z/3 * Z/3 uniform: from X != 1 the length moves +1 w.p. 1/2, 0 w.p. 1/4,
  // -1 w.p. 1/4, so E|X_n| - E|X_{n-1}| = 1/4 + (3/4) P(X_{n-1} = 1)
  auto G = cyclic_product({3, 3});
  auto mu = StepDistribution::uniform(G);
  Convolution prev = exact_convolution(G, mu, 0);
  for (int n = 1; n <= 8; ++n) {
    Convolution cur = exact_convolution(G, mu, n);
    const double back = prev.law.count(Word{}) ? prev.law.at(Word{}) : 0.0;
    EXPECT_NEAR(cur.expected_length - prev.expected_length, 0.25 + 0.75 * back, 1e-12) << n;
    prev = std::move(cur);
  }
}

TEST(Convolution, Budget) {
  auto G = cyclic_product({4, 5});
  auto mu = StepDistribution::uniform(G);
  EXPECT_THROW(exact_convolution(G, mu, 6, 1000), Error);
  EXPECT_THROW(exact_convolution(G, mu, -1), Error);
}
