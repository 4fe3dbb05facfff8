#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

#include "common.hpp"
#include "freewalk/acceptance.hpp"
#include "freewalk/closed_form.hpp"
#include "freewalk/metrics.hpp"
#include "freewalk/traffic.hpp"

using namespace freewalk;
namespace cf = freewalk::closed_form;

TEST(Polynomials, LowOrderF) {
  for (double x = -1.0; x <= 2.0; x += 0.0625) {
    EXPECT_NEAR(cf::eval_F(2, x), -2 * x * x + 4 * x - 1, 1e-12);
    EXPECT_NEAR(cf::eval_F(3, x), 4 * x * x * x - 16 * x * x + 17 * x - 4, 1e-12);
    EXPECT_NEAR(cf::eval_F(4, x), -8 * std::pow(x, 4) + 48 * x * x * x - 96 * x * x + 72 * x - 15, 1e-11);
  }
}

TEST(Polynomials, Recurrences) {
  CounterRng rng(1);
  for (int s = 0; s < 1000; ++s) {
    const double x = rng.uniform(), y = 0.5 * rng.uniform();
    const double c = 8 * (1 - y) / (3 - 2 * y);
    for (int n = 2; n <= 30; ++n) {
      const double f = cf::eval_F(n, x), f1 = cf::eval_F(n - 1, x), f2 = cf::eval_F(n - 2, x);
      ASSERT_NEAR(f - 2 * (2 - x) * f1 + f2, 0.0, 1e-9 * (1 + std::abs(f)));
      const double g = cf::eval_G(n, y), g1 = cf::eval_G(n - 1, y), g2 = cf::eval_G(n - 2, y);
      ASSERT_NEAR(g - c * g1 + g2, 0.0, 1e-9 * (1 + std::abs(g)));
    }
  }
}

TEST(Roots, BoundaryAndPalindrome) {
  using mp = boost::multiprecision::cpp_bin_float_50;
  for (int k = 3; k <= 12; ++k) {
    // F_k is steep at x_k for larger k, so double evaluation alone loses ~1e-11
    const mp xm = cf::solve_xk<mp>(k);
    EXPECT_LT(abs(cf::eval_F<mp>(k, xm) - 1), mp(1e-12));
    mp sm = 0;
    for (int i = 1; i < k; ++i) sm += cf::eval_F<mp>(i, xm);
    EXPECT_LT(abs(sm - 1), mp(1e-12));

    const double x = cf::solve_xk(k);
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 1.0);
    EXPECT_NEAR(cf::eval_F(k, x), 1.0, 1e-10);
    EXPECT_NEAR(x, static_cast<double>(xm), 1e-15);
    double s = 0.0;
    for (int i = 1; i < k; ++i) {
      s += cf::eval_F(i, x);
      EXPECT_NEAR(cf::eval_F(i, x), cf::eval_F(k - i, x), 1e-10);
    }
    EXPECT_NEAR(s, 1.0, 1e-10);
    auto r = cf::r_hecke(k);
    double t = 0.0;
    for (double v : r) t += v;
    EXPECT_NEAR(t, 1.0, 1e-12) << k;
  }
}

TEST(Roots, TableValues) {
  EXPECT_NEAR(cf::solve_xk(3), 0.5, 1e-14);
  EXPECT_NEAR(cf::drift_zkzk(3), 0.25, 1e-14);
  EXPECT_NEAR(cf::drift_zkzk(4), (std::sqrt(5.0) - 1) / 4, 1e-13);
  EXPECT_NEAR(cf::drift_zkzk(5), (std::sqrt(13.0) - 1) / 8, 1e-13);
  EXPECT_NEAR(cf::drift_zkzk(6), 0.330851, 1e-6);
  EXPECT_NEAR(cf::drift_zkzk(7), 0.332515, 1e-6);
  EXPECT_NEAR(cf::drift_zkzk(8), 0.333062, 1e-6);

  EXPECT_NEAR(cf::drift_hecke(3), 2.0 / 15, 1e-13);
  EXPECT_NEAR(cf::drift_hecke(4), (std::sqrt(7.0) - 1) / 9, 1e-13);
  EXPECT_NEAR(cf::drift_hecke(5), (2 * std::sqrt(61.0) - 4) / 57, 1e-13);
  EXPECT_NEAR(cf::drift_hecke(6), 0.213412, 1e-6);
  EXPECT_NEAR(cf::drift_hecke(7), 0.217921, 1e-6);
  EXPECT_NEAR(cf::drift_hecke(8), 0.220101, 1e-6);
  EXPECT_NEAR(cf::solve_yk(4), 2.0 / 3 - std::sqrt(7.0) / 6, 1e-13);
  EXPECT_NEAR(cf::r_hecke(4)[0], (7 - std::sqrt(7.0)) / 12, 1e-13);
}

TEST(Roots, MonotoneLimitsInHighPrecision) {
  using mp = boost::multiprecision::cpp_bin_float_50;
  mp prev_z = 0, prev_h = 0;
  for (int k = 3; k <= 64; ++k) {
    mp z = cf::drift_zkzk<mp>(k), h = cf::drift_hecke<mp>(k);
    EXPECT_GT(z, prev_z) << k;
    EXPECT_LT(z, mp(1) / 3) << k;
    EXPECT_GT(h, prev_h) << k;
    EXPECT_LT(h, mp(2) / 9) << k;
    prev_z = z;
    prev_h = h;
  }
}

TEST(Roots, SolverAgreesWithR) {
  for (int k = 3; k <= 8; ++k) {
    auto w = make_family("zkzk-simple", {{{"k", k}}, {}, {}});
    auto rep = solve(w.G, w.mu);
    auto r = cf::r_zkzk(k);
    for (int i = 1; i < k; ++i) {
      EXPECT_NEAR(rep.r[w.G.id({0, i})], r[static_cast<std::size_t>(i - 1)], 1e-11);
      EXPECT_NEAR(rep.r[w.G.id({1, i})], r[static_cast<std::size_t>(i - 1)], 1e-11);
    }
    auto h = make_family("hecke-simple", {{{"k", k}}, {}, {}});
    auto hr = solve(h.G, h.mu);
    auto rh = cf::r_hecke(k);
    EXPECT_NEAR(hr.r[h.G.id({0, 1})], rh[0], 1e-11);
    for (int i = 1; i < k; ++i) EXPECT_NEAR(hr.r[h.G.id({1, i})], rh[static_cast<std::size_t>(i)], 1e-11);
  }
}

TEST(Z2Z3, RandomizedSolverAgreement) {
  CounterRng rng(41);
  auto G = cyclic_product({2, 3});
  for (int t = 0; t < 100; ++t) {
    double p = 0.98 * rng.uniform() + 0.01, q = 0.98 * rng.uniform() + 0.01;
    if (p + q >= 0.98) continue;
    auto w = make_family("z2z3", {{{"p", p}, {"q", q}}, {}, {}});
    auto rep = solve(w.G, w.mu);
    EXPECT_NEAR(drift(w.G, w.mu, rep.r), cf::drift_z2z3(p, q), 1e-9);
    auto r = cf::r_z2z3(p, q);
    EXPECT_NEAR(rep.r[G.id({0, 1})], r.a, 1e-9);
    EXPECT_NEAR(rep.r[G.id({1, 1})], r.b, 1e-9);
    EXPECT_NEAR(rep.r[G.id({1, 2})], r.b2, 1e-9);
    EXPECT_LE(traffic_residual(G, w.mu, RootVector(std::vector<double>{r.a, r.b, r.b2})), 1e-10);
  }
  EXPECT_THROW(cf::r_z2z3(0.3, 0.3), Error);
}

TEST(Z2Z3, Maximum) {
  auto m = cf::z2z3_max();
  EXPECT_NEAR(m.p, 1 - m.z0, 1e-15);
  EXPECT_EQ(m.q, 0.0);
  // the drift along q = 0 peaks at z0
  const double step = 1e-4;
  EXPECT_GE(m.gamma, cf::drift_z2z3(m.p + step, 0.0));
  EXPECT_GE(m.gamma, cf::drift_z2z3(m.p - step, 0.0));
  EXPECT_NEAR(m.gamma, cf::drift_z2z3(m.p, 0.0), 1e-15);
  for (double z : cf::z0_candidates()) {
    const double f = ((((z * z + 12) * z - 4) * z + 47) * z - 48) * z + 12;
    EXPECT_NEAR(f, 0.0, 1e-9);
  }
}

TEST(Z3Z3, Symmetric) {
  for (double p : {0.05, 0.1, 0.2, 0.25, 0.3, 0.4, 0.45}) {
    auto r = cf::r_z3z3_sym(p);
    EXPECT_NEAR(r.a + r.a2, 0.5, 1e-12);
    auto w = make_family("z3z3-sym", {{{"p", p}}, {}, {}});
    auto rep = solve(w.G, w.mu);
    EXPECT_NEAR(drift(w.G, w.mu, rep.r), cf::drift_z3z3_sym(p), 1e-10);
    EXPECT_NEAR(rep.r[w.G.id({0, 1})], r.a, 1e-10);
    EXPECT_NEAR(rep.r[w.G.id({0, 2})], r.a2, 1e-10);
  }
  EXPECT_NEAR(cf::drift_z3z3_sym(0.25), 0.25, 1e-15);
  EXPECT_THROW(cf::drift_z3z3_sym(0.5), Error);
  EXPECT_THROW(cf::r_z3z3_sym(0.0), Error);
}

TEST(Z3Z3, Asymmetric) {
  for (double p : {0.1, 0.2, 0.3, 0.45}) {
    EXPECT_NEAR(cf::drift_z3z3_asym(p, p), 2 * p * (1 - 2 * p), 1e-14);
    EXPECT_NEAR(cf::drift_z3z3_asym(p, p), cf::drift_uniform_pair(2 * p, 2, 2), 1e-14);
  }
  auto w = make_family("z3z3-asym", {{{"p", 0.3}, {"q", 0.1}}, {}, {}});
  EXPECT_NEAR(drift(w.G, w.mu, solve(w.G, w.mu).r), cf::drift_z3z3_asym(0.3, 0.1), 1e-10);
  EXPECT_THROW(cf::drift_z3z3_asym(0.6, 0.5), Error);
}

TEST(UniformPair, Formula) {
  for (int k = 2; k <= 8; ++k) EXPECT_NEAR(cf::drift_uniform_pair(0.5, k, k), (k - 1.0) / (2.0 * k), 1e-15);
  EXPECT_LT(cf::drift_uniform_pair(1e-9, 3, 4), 1e-7);
  auto w = make_family("uniform-per-factor", {{}, {3, 4}, {0.3, 0.7}});
  EXPECT_NEAR(drift(w.G, w.mu, solve(w.G, w.mu).r), cf::drift_uniform_pair(0.3, 2, 3), 1e-10);
  EXPECT_THROW(cf::drift_uniform_pair(0.5, 1, 1), Error);
  EXPECT_THROW(cf::drift_uniform_pair(1.0, 2, 2), Error);
}

TEST(Errors, SmallK) {
  EXPECT_THROW(cf::solve_xk(2), Error);
  EXPECT_THROW(cf::drift_hecke(2), Error);
  EXPECT_THROW(cf::eval_F(-1, 0.5), Error);
}

TEST(FaultInjection, BreaksTheDriftCriterion) {
  acceptance::Context ctx;
  ctx.inject_fault = true;
  const auto& all = acceptance::criteria();
  auto r = all.at(3).run(ctx);
  EXPECT_EQ(r.id, 4);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(cf::fault_injection().fault_n, -1);
  ctx.inject_fault = false;
  EXPECT_TRUE(all.at(3).run(ctx).pass);
}
