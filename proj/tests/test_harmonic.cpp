#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "common.hpp"
#include "freewalk/harmonic.hpp"
#include "freewalk/traffic.hpp"

using namespace freewalk;

namespace {

struct Solved {
  FreeProduct G;
  StepDistribution mu;
  SolveReport rep;
  LetterChain chain;
};

Solved solved(Walk w) {
  auto rep = solve(w.G, w.mu);
  auto chain = build_chain(w.G, rep.r);
  return {std::move(w.G), std::move(w.mu), std::move(rep), std::move(chain)};
}

}  // namespace

TEST(Chain, RowsAreProbabilities) {
  CounterRng rng(21);
  for (const auto& G : fwtest::small_products()) {
    auto s = solved({G, fwtest::random_measure(G, rng)});
    const std::size_t n = G.alphabet_size();
    for (LetterId u = 0; u < n; ++u) {
      double row = 0.0;
      for (LetterId v = 0; v < n; ++v) {
        EXPECT_GE(s.chain.P(u, v), 0.0);
        if (G.same_factor(u, v)) {
          EXPECT_EQ(s.chain.P(u, v), 0.0);
        }
        row += s.chain.P(u, v);
      }
      EXPECT_NEAR(row, 1.0, 1e-13);
    }
    // pi P = pi
    for (LetterId v = 0; v < n; ++v) {
      double x = 0.0;
      for (LetterId u = 0; u < n; ++u) x += s.chain.pi[u] * s.chain.P(u, v);
      EXPECT_NEAR(x, s.chain.pi[v], 1e-13);
    }
    for (LetterId a = 0; a < n; ++a) EXPECT_NEAR(s.chain.ratio[a], s.rep.q[a], 1e-12);
  }
}

TEST(Chain, StationaryCaseDoublesR) {
  auto s = solved(make_family("zkzk-simple", {{{"k", 4}}, {}, {}}));
  const LetterId a = s.G.id({0, 1}), b = s.G.id({1, 1}), b2 = s.G.id({1, 2});
  EXPECT_NEAR(s.chain.P(a, b), 2 * s.rep.r[b], 1e-14);
  EXPECT_NEAR(s.chain.P(a, b2), 2 * s.rep.r[b2], 1e-14);
}

TEST(Cylinder, Examples) {
  auto s = solved(make_family("zkzk-simple", {{{"k", 4}}, {}, {}}));
  const double s5 = std::sqrt(5.0);
  EXPECT_NEAR(cylinder_prob(s.chain, parse_word(s.G, "0:1")), (3 - s5) / 4, 1e-13);
  EXPECT_NEAR(cylinder_prob(s.chain, parse_word(s.G, "0:1,1:1")), (3 - s5) / 2 * (3 - s5) / 4, 1e-13);
  EXPECT_NEAR(cylinder_prob(s.chain, parse_word(s.G, "0:1,1:1")), 0.072949, 1e-6);
  EXPECT_EQ(cylinder_prob(s.chain, Word{}), 1.0);
}

TEST(Cylinder, LengthLayersSumToOne) {
  CounterRng rng(8);
  for (const auto& G : fwtest::small_products()) {
    auto s = solved({G, fwtest::random_measure(G, rng)});
    for (int len = 1; len <= 3; ++len) {
      double t = 0.0;
      for (const Word& w : normal_words(G, len)) t += cylinder_prob(s.chain, w);
      EXPECT_NEAR(t, 1.0, 1e-12) << G.describe() << " length " << len;
    }
  }
}

TEST(Cylinder, LogSpaceAgrees) {
  CounterRng rng(4);
  auto G = cyclic_product({3, 4});
  auto s = solved({G, fwtest::random_measure(G, rng)});
  for (std::size_t len : {1u, 5u, 40u, 64u, 65u, 200u}) {
    Word w = fwtest::random_word(G, rng, len);
    const double lp = log_cylinder_prob(s.chain, w);
    double direct = s.chain.first[w.back()];
    for (std::size_t i = 0; i + 1 < w.size(); ++i) direct *= s.chain.ratio[w[i]];
    EXPECT_NEAR(lp, std::log(direct), 1e-10 * len);
    EXPECT_NEAR(std::log(cylinder_prob(s.chain, w)), lp, 1e-10 * len);
  }
}

TEST(Identities, TwoFactorProduct) {
  CounterRng rng(9);
  for (const auto& G : fwtest::small_products()) {
    auto rep = solve(G, fwtest::random_measure(G, rng));
    if (G.num_factors() != 2) {
      EXPECT_THROW(two_factor_identity(G, rep.q), Error);
      continue;
    }
    EXPECT_NEAR(two_factor_identity(G, rep.q), 1.0, 1e-11) << G.describe();
  }
}

TEST(Identities, TauSquaredForTwoFactors) {
  CounterRng rng(10);
  for (const auto& G : fwtest::small_products()) {
    auto s = solved({G, fwtest::random_measure(G, rng)});
    if (G.num_factors() != 2) {
      EXPECT_THROW(tau2_invariance_residual(G, s.chain, parse_word(G, "0:1")), Error);
      continue;
    }
    for (int len = 1; len <= 3; ++len)
      for (const Word& w : normal_words(G, len)) EXPECT_LE(tau2_invariance_residual(G, s.chain, w), 1e-11);
  }
}

TEST(Identities, ShiftInvarianceWhenStationary) {
  // symmetric three-factor walk has r(Sigma_i) = 1/3
  auto s = solved(make_family("uniform", {{}, {3, 3, 3}, {}}));
  ASSERT_TRUE(s.rep.stationary);
  for (int len = 1; len <= 3; ++len)
    for (const Word& w : normal_words(s.G, len)) EXPECT_LE(shift_invariance_residual(s.G, s.chain, w, 1), 1e-12);
  // a non-stationary walk breaks it somewhere
  auto t = solved(make_family("hecke-simple", {{{"k", 4}}, {}, {}}));
  ASSERT_FALSE(t.rep.stationary);
  double worst = 0.0;
  for (const Word& w : normal_words(t.G, 1)) worst = std::max(worst, shift_invariance_residual(t.G, t.chain, w, 1));
  EXPECT_GT(worst, 1e-6);
}

TEST(Identities, MuStationarity) {
  CounterRng rng(12);
  for (const auto& G : fwtest::small_products()) {
    for (int rep = 0; rep < 3; ++rep) {
      auto s = solved({G, fwtest::random_measure(G, rng)});
      const int maxlen = G.alphabet_size() > 8 ? 3 : 4;
      for (int len = 1; len <= maxlen; ++len)
        for (const Word& w : normal_words(G, len))
          ASSERT_LE(mu_invariance_residual(G, s.mu, s.chain, w), 1e-10) << G.describe() << " " << to_string(G, w);
    }
  }
}

TEST(Identities, MuStationarityFailsForWrongR) {
  auto G = cyclic_product({2, 3});
  auto mu = StepDistribution::from_weights(G, {0.5, 0.3, 0.2});
  auto other = solve(G, StepDistribution::from_weights(G, {0.5, 0.2, 0.3}));
  auto chain = build_chain(G, other.r);
  double worst = 0.0;
  for (const Word& w : normal_words(G, 2)) worst = std::max(worst, mu_invariance_residual(G, mu, chain, w));
  EXPECT_GT(worst, 1e-4);
}

TEST(Sampling, NormalFormAndDeterministic) {
  auto s = solved(make_family("z2z3", {{{"p", 0.3}, {"q", 0.2}}, {}, {}}));
  for (std::uint64_t seed = 1; seed < 50; ++seed) {
    Word w = sample_harmonic(s.G, s.chain, 30, seed);
    ASSERT_EQ(w.size(), 30u);
    for (std::size_t i = 1; i < w.size(); ++i) ASSERT_FALSE(s.G.same_factor(w[i - 1], w[i]));
    EXPECT_EQ(w, sample_harmonic(s.G, s.chain, 30, seed));
  }
  EXPECT_THROW(sample_harmonic(s.G, s.chain, 0, 1), Error);
}

TEST(Sampling, TwoLetterFrequencies) {
  auto s = solved(make_family("z2z3", {{{"p", 0.3}, {"q", 0.2}}, {}, {}}));
  const int n = 100000;
  std::map<Word, int> counts;
  for (int i = 0; i < n; ++i) {
    Word w = sample_harmonic(s.G, s.chain, 2, 1000 + static_cast<std::uint64_t>(i));
    ++counts[Word(normal_form, {w[0], w[1]})];
  }
  for (const Word& w : normal_words(s.G, 2)) {
    const double p = cylinder_prob(s.chain, w);
    const double sd = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(static_cast<double>(counts[w]) / n, p, 4 * sd) << to_string(s.G, w);
  }
}
