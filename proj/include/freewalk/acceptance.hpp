#pragma once

// Acceptance criteria, shared by `freewalk verify` and the acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "freewalk/closed_form.hpp"
#include "freewalk/error.hpp"
#include "freewalk/group.hpp"
#include "freewalk/harmonic.hpp"
#include "freewalk/metrics.hpp"
#include "freewalk/presets.hpp"
#include "freewalk/rng.hpp"
#include "freewalk/simulation.hpp"
#include "freewalk/spec_io.hpp"
#include "freewalk/traffic.hpp"

namespace freewalk::acceptance {

struct Context {
  /// Perturb F_4 (negative control for criterion 4).
  bool inject_fault = false;
  std::uint64_t seed = 20050101;
  std::size_t threads = 0;
};

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Result(const Context&)> run;
};

namespace detail {

/// Collects failed checks and the largest error seen.
class Checks {
 public:
  void near(const std::string& what, double got, double want, double tol) {
    const double err = std::abs(got - want);
    worst_ = std::max(worst_, err);
    ++count_;
    if (!(err <= tol)) fail(what + ": got " + fmt(got) + ", want " + fmt(want) + " (err " + fmt(err) + ")");
  }
  void le(const std::string& what, double got, double bound) {
    ++count_;
    if (!(got <= bound)) fail(what + ": " + fmt(got) + " > " + fmt(bound));
  }
  void that(const std::string& what, bool ok) {
    ++count_;
    if (!ok) fail(what);
  }
  void fail(const std::string& msg) {
    if (failures_.size() < 6) failures_.push_back(msg);
    ++failed_;
  }
  void note(const std::string& msg) { info_.push_back(msg); }

  Result finish(int id, const std::string& name) const {
    Result r;
    r.id = id;
    r.name = name;
    r.pass = failed_ == 0;
    std::ostringstream d;
    d << count_ << " checks";
    if (failed_) {
      d << ", " << failed_ << " failed";
      for (const auto& f : failures_) d << "; " << f;
    } else if (worst_ > 0.0) {
      d << ", max abs err " << fmt(worst_);
    }
    for (const auto& s : info_) d << "; " << s;
    r.detail = d.str();
    return r;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> info_;
  std::size_t count_ = 0, failed_ = 0;
  double worst_ = 0.0;
};

struct Solved {
  Walk walk;
  SolveReport rep;
};

inline Solved solve_family(const std::string& name, const FamilyParams& p) {
  Walk w = make_family(name, p);
  SolveReport rep = solve(w.G, w.mu);
  return {std::move(w), std::move(rep)};
}

inline FamilyParams scalars(std::map<std::string, double> s) { return {std::move(s), {}, {}}; }
inline FamilyParams orders(std::vector<int> o) { return {{}, std::move(o), {}}; }

inline double solver_drift(const std::string& name, const FamilyParams& p) {
  auto s = solve_family(name, p);
  return drift(s.walk.G, s.walk.mu, s.rep.r);
}

struct FaultScope {
  explicit FaultScope(bool on) {
    if (on) closed_form::fault_injection() = {4, 1e-3};
  }
  ~FaultScope() { closed_form::fault_injection() = {}; }
};

/// Roots of a cubic c3 x^3 + c2 x^2 + c1 x + c0 in [lo, hi], by sign changes.
inline std::vector<double> cubic_roots(double c3, double c2, double c1, double c0, double lo, double hi) {
  auto f = [&](double x) { return ((c3 * x + c2) * x + c1) * x + c0; };
  std::vector<double> out;
  const int grid = 20000;
  for (int i = 0; i < grid; ++i) {
    double a = lo + (hi - lo) * i / grid, b = lo + (hi - lo) * (i + 1) / grid;
    if ((f(a) < 0) == (f(b) < 0)) continue;
    for (int it = 0; it < 200; ++it) {
      double m = 0.5 * (a + b);
      if (!(m > a && m < b)) break;
      ((f(m) < 0) == (f(a) < 0) ? a : b) = m;
    }
    out.push_back(std::abs(f(a)) <= std::abs(f(b)) ? a : b);
  }
  return out;
}

}  // namespace detail

inline Result drift_table_zkzk(const Context&) {
  detail::Checks c;
  const double s5 = std::sqrt(5.0), s13 = std::sqrt(13.0);
  const std::vector<std::pair<double, double>> want{
      {0.25, 1e-10}, {(s5 - 1) / 4, 1e-10}, {(s13 - 1) / 8, 1e-10}, {0.330851, 1e-6}, {0.332515, 1e-6}, {0.333062, 1e-6}};
  for (int k = 3; k <= 8; ++k) {
    const auto [g, tol] = want[static_cast<std::size_t>(k - 3)];
    const std::string tag = "Z/" + std::to_string(k) + "*Z/" + std::to_string(k);
    c.near(tag + " solver", detail::solver_drift("zkzk-simple", detail::scalars({{"k", k}})), g, tol);
    c.near(tag + " closed form", closed_form::drift_zkzk(k), g, tol);
  }
  return c.finish(1, "drift table Z/k*Z/k");
}

inline Result drift_table_hecke(const Context&) {
  detail::Checks c;
  const double s7 = std::sqrt(7.0), s61 = std::sqrt(61.0);
  const std::vector<std::pair<double, double>> want{{2.0 / 15, 1e-10},       {(s7 - 1) / 9, 1e-10}, {(2 * s61 - 4) / 57, 1e-10},
                                                    {0.213412, 1e-6},        {0.217921, 1e-6},      {0.220101, 1e-6}};
  for (int k = 3; k <= 8; ++k) {
    const auto [g, tol] = want[static_cast<std::size_t>(k - 3)];
    const std::string tag = "Z/2*Z/" + std::to_string(k);
    c.near(tag + " solver", detail::solver_drift("hecke-simple", detail::scalars({{"k", k}})), g, tol);
    c.near(tag + " closed form", closed_form::drift_hecke(k), g, tol);
  }
  return c.finish(2, "drift table Z/2*Z/k");
}

inline Result r_vector_z2z4(const Context&) {
  detail::Checks c;
  auto s = detail::solve_family("hecke-simple", detail::scalars({{"k", 4}}));
  const double s7 = std::sqrt(7.0);
  const std::vector<double> want{(7 - s7) / 12, 2.0 / 3 - s7 / 6, (-11 + 5 * s7) / 12, 2.0 / 3 - s7 / 6};
  for (std::size_t a = 0; a < want.size(); ++a)
    c.near("r(" + to_string(s.walk.G.letter(a)) + ")", s.rep.r[a], want[a], 1e-10);
  return c.finish(3, "Z/2*Z/4 r-vector");
}

inline Result recurrence_identities(const Context& ctx) {
  detail::FaultScope fault(ctx.inject_fault);
  detail::Checks c;
  for (int k = 3; k <= 12; ++k) {
    const std::string tag = "k=" + std::to_string(k);
    const double x = closed_form::solve_xk(k);
    c.near(tag + " F_k(x_k)", closed_form::eval_F(k, x), 1.0, 1e-10);
    double sum = 0.0;
    for (int i = 1; i < k; ++i) {
      sum += closed_form::eval_F(i, x);
      c.near(tag + " palindrome i=" + std::to_string(i), closed_form::eval_F(i, x), closed_form::eval_F(k - i, x), 1e-10);
    }
    c.near(tag + " sum F_i(x_k)", sum, 1.0, 1e-10);
    c.near(tag + " (1-x_k)/2 vs solver", (1 - x) / 2, detail::solver_drift("zkzk-simple", detail::scalars({{"k", k}})),
           1e-10);
  }

  using big = boost::multiprecision::cpp_bin_float_50;
  big prev_z = 0, prev_h = 0;
  const big third = big(1) / 3, two_ninths = big(2) / 9;
  for (int k = 3; k <= 64; ++k) {
    const big gz = closed_form::drift_zkzk<big>(k);
    const big gh = closed_form::drift_hecke<big>(k);
    const std::string tag = "k=" + std::to_string(k);
    c.that(tag + " Z/k*Z/k drift below 1/3", gz < third);
    c.that(tag + " Hecke drift below 2/9", gh < two_ninths);
    if (k > 3) {
      c.that(tag + " Z/k*Z/k drift increases", gz > prev_z);
      c.that(tag + " Hecke drift increases", gh > prev_h);
    }
    prev_z = gz;
    prev_h = gh;
  }
  c.note("1/3 - gamma_64 = " + (third - prev_z).str(3) + ", 2/9 - hecke gamma_64 = " + (two_ninths - prev_h).str(3));
  return c.finish(4, "recurrence and root identities");
}

inline Result z4z4_r_vector(const Context&) {
  detail::Checks c;
  auto s = detail::solve_family("zkzk-simple", detail::scalars({{"k", 4}}));
  const double s5 = std::sqrt(5.0);
  const double ra = (3 - s5) / 4, ra2 = (s5 - 2) / 2;
  const std::vector<double> want{ra, ra2, ra, ra, ra2, ra};
  for (std::size_t a = 0; a < want.size(); ++a)
    c.near("r(" + to_string(s.walk.G.letter(a)) + ")", s.rep.r[a], want[a], 1e-10);
  c.near("sum of r", s.rep.r.total(), 1.0, 1e-10);
  c.near("F_4(x_4) with x_4 = 2 r(a)", closed_form::eval_F(4, 2 * ra), 1.0, 1e-10);
  Result r = c.finish(5, "Z/4*Z/4 r-vector");
  r.notes.push_back("the frequently quoted r-vector for Z/4*Z/4 ((3-sqrt5)/8, (sqrt5-2)/4, ...) sums to 1/2; "
                    "the normalized values above are exactly twice it");
  return r;
}

inline Result closed_form_agreement(const Context& ctx) {
  detail::Checks c;
  CounterRng rng(ctx.seed, 6);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  const double m = 0.02;
  for (int i = 0; i < 100; ++i) {
    double p, q;
    do {
      p = u(0.0, 1.0);
      q = u(0.0, 1.0);
    } while (p + q > 1.0 - m || p < 1e-3 || q < 1e-3);
    auto s = detail::solve_family("z2z3", detail::scalars({{"p", p}, {"q", q}}));
    const std::string tag = "z2z3(" + fmt(p) + "," + fmt(q) + ")";
    c.near(tag + " drift", closed_form::drift_z2z3(p, q), drift(s.walk.G, s.walk.mu, s.rep.r), 1e-9);
    if (std::abs(p - q) > 1e-3) {
      auto r = closed_form::r_z2z3(p, q);
      c.near(tag + " r(a)", r.a, s.rep.r[0], 1e-9);
      c.near(tag + " r(b)", r.b, s.rep.r[1], 1e-9);
      c.near(tag + " r(b^2)", r.b2, s.rep.r[2], 1e-9);
    }
  }
  for (int i = 0; i < 100; ++i) {
    const double p = u(m, 0.5 - m);
    auto s = detail::solve_family("z3z3-sym", detail::scalars({{"p", p}}));
    const std::string tag = "z3z3-sym(" + fmt(p) + ")";
    c.near(tag + " drift", closed_form::drift_z3z3_sym(p), drift(s.walk.G, s.walk.mu, s.rep.r), 1e-9);
    auto r = closed_form::r_z3z3_sym(p);
    c.near(tag + " r(a)", r.a, s.rep.r[0], 1e-9);
    c.near(tag + " r(a^2)", r.a2, s.rep.r[1], 1e-9);
  }
  for (int i = 0; i < 100; ++i) {
    double p, q;
    do {
      p = u(m, 1.0);
      q = u(m, 1.0);
    } while (p + q > 1.0 - m);
    auto s = detail::solve_family("z3z3-asym", detail::scalars({{"p", p}, {"q", q}}));
    c.near("z3z3-asym(" + fmt(p) + "," + fmt(q) + ")", closed_form::drift_z3z3_asym(p, q),
           drift(s.walk.G, s.walk.mu, s.rep.r), 1e-9);
  }
  for (int i = 0; i < 100; ++i) {
    int o1, o2;
    do {
      o1 = 2 + static_cast<int>(rng.next() % 6);
      o2 = 2 + static_cast<int>(rng.next() % 6);
    } while (o1 == 2 && o2 == 2);
    const double p = u(m, 1.0 - m);
    auto s = detail::solve_family("uniform-per-factor", FamilyParams{{}, {o1, o2}, {p, 1.0 - p}});
    c.near("uniform pair Z/" + std::to_string(o1) + "*Z/" + std::to_string(o2) + " p=" + fmt(p),
           closed_form::drift_uniform_pair(p, o1 - 1, o2 - 1), drift(s.walk.G, s.walk.mu, s.rep.r), 1e-9);
  }
  return c.finish(6, "closed forms agree with the solver");
}

inline Result z2z3_max_drift(const Context&) {
  detail::Checks c;
  const int N = 1000;
  double best = -1.0;
  int bi = 0, bj = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; i + j < N; ++j) {
      const double g = closed_form::drift_z2z3(static_cast<double>(i) / N, static_cast<double>(j) / N);
      if (g > best) {
        best = g;
        bi = i;
        bj = j;
      }
    }
  const double p = static_cast<double>(bi) / N, q = static_cast<double>(bj) / N;
  const auto z = closed_form::z2z3_max();
  c.near("grid max drift", best, 0.163379, 1e-4);
  c.near("sextic max drift", z.gamma, 0.163379, 1e-4);
  c.near("z0", z.z0, 0.490275, 1e-6);
  c.that("argmax on the boundary q=0 or p=0 (got p=" + fmt(p) + ", q=" + fmt(q) + ")", bi == 0 || bj == 0);
  c.near("argmax position 1 - z0", std::max(p, q), 1.0 - z.z0, 2e-3);
  auto s = detail::solve_family("z2z3", detail::scalars({{"p", p}, {"q", q}}));
  c.near("solver drift at argmax", drift(s.walk.G, s.walk.mu, s.rep.r), best, 1e-9);
  c.note("argmax (p,q) = (" + fmt(p) + ", " + fmt(q) + ")");
  return c.finish(7, "Z/2*Z/3 maximal drift");
}

namespace detail {

struct Instance {
  std::string name;
  Walk walk;
};

inline std::vector<Instance> structural_instances(std::uint64_t seed) {
  std::vector<Instance> out;
  for (int k = 3; k <= 8; ++k) {
    out.push_back({"zkzk-simple k=" + std::to_string(k), make_family("zkzk-simple", scalars({{"k", k}}))});
    out.push_back({"hecke-simple k=" + std::to_string(k), make_family("hecke-simple", scalars({{"k", k}}))});
  }
  CounterRng rng(seed, 8);
  for (int i = 0; i < 5; ++i) {
    double p = 0.05 + 0.4 * rng.uniform(), q = 0.05 + 0.4 * rng.uniform();
    out.push_back({"z2z3 p=" + fmt(p) + " q=" + fmt(q), make_family("z2z3", scalars({{"p", p}, {"q", q}}))});
    double x = 0.05 + 0.4 * rng.uniform(), y = 0.05 + 0.4 * rng.uniform();
    out.push_back({"z3z3-asym p=" + fmt(x) + " q=" + fmt(y), make_family("z3z3-asym", scalars({{"p", x}, {"q", y}}))});
  }
  out.push_back({"z3z3-sym p=0.4", make_family("z3z3-sym", scalars({{"p", 0.4}}))});
  out.push_back({"extremal 2,3,5", make_family("extremal", orders({2, 3, 5}))});
  out.push_back({"z2z2z2 p=0.3", make_family("z2z2z2", scalars({{"p", 0.3}}))});
  out.push_back({"uniform 3,4,5", make_family("uniform", orders({3, 4, 5}))});
  {
    // S_3 as a table group, free product with Z/2, random positive weights
    const std::vector<std::vector<int>> s3{{0, 1, 2, 3, 4, 5}, {1, 2, 0, 4, 5, 3}, {2, 0, 1, 5, 3, 4},
                                           {3, 5, 4, 0, 2, 1}, {4, 3, 5, 1, 0, 2}, {5, 4, 3, 2, 1, 0}};
    FreeProduct G({make_finite_group(s3), make_cyclic(2)});
    std::vector<double> w(G.alphabet_size());
    double t = 0.0;
    for (double& x : w) t += (x = 0.1 + rng.uniform());
    for (double& x : w) x /= t;
    auto mu = StepDistribution::from_weights(G, w);
    out.push_back({"S3*Z/2 random", {std::move(G), std::move(mu)}});
  }
  return out;
}

}  // namespace detail

inline Result structural_identities(const Context& ctx) {
  detail::Checks c;
  for (auto& inst : detail::structural_instances(ctx.seed)) {
    const auto& G = inst.walk.G;
    const auto& mu = inst.walk.mu;
    SolveReport rep = solve(G, mu);
    c.le(inst.name + " consistency residual", rep.consistency_residual, 1e-10);
    const double gamma = drift(G, mu, rep.r), h = entropy(G, mu, rep.r, rep.q);
    const double v = volume(G, LengthTable::natural(G));
    c.le(inst.name + " fundamental inequality h/(gamma v)", h, gamma * v * (1 + 1e-9));
    if (G.num_factors() != 2) continue;
    c.near(inst.name + " q(Sigma_1) q(Sigma_2)", two_factor_identity(G, rep.q), 1.0, 1e-10);
    const LetterChain chain = build_chain(G, rep.r);
    for (int len = 1; len <= 3; ++len)
      for (const Word& w : normal_words(G, len))
        c.le(inst.name + " tau^2 residual at " + to_string(G, w), tau2_invariance_residual(G, chain, w), 1e-10);
  }
  return c.finish(8, "structural identities");
}

inline Result extremal_measures(const Context&) {
  detail::Checks c;
  for (const auto& o : std::vector<std::vector<int>>{{2, 4}, {2, 3, 5}, {3, 3, 3}}) {
    std::string tag = "extremal";
    for (int k : o) tag += " " + std::to_string(k);
    auto s = detail::solve_family("extremal", detail::orders(o));
    const auto& G = s.walk.G;
    const double gamma = drift(G, s.walk.mu, s.rep.r), h = entropy(G, s.walk.mu, s.rep.r, s.rep.q);
    const double v = volume(G, LengthTable::natural(G));
    c.near(tag + " h - gamma v", h - gamma * v, 0.0, 1e-9);
    const LetterChain chain = build_chain(G, s.rep.r);
    for (int len = 1; len <= 3; ++len)
      for (const Word& w : normal_words(G, len))
        c.near(tag + " cylinder " + to_string(G, w), cylinder_prob(chain, w), extremal_cylinders(G, w).harmonic, 1e-10);
  }
  return c.finish(9, "extremal measures");
}

inline Result quality_constants(const Context& ctx) {
  detail::Checks c;
  {
    auto G = cyclic_product({4, 4});
    const auto S = minimal_generators(G);
    auto sweep = quality_sup(G, S, 1e-3, {}, ctx.threads);
    c.that("Z/4*Z/4 sweep has admissible points", sweep.best.has_value());
    if (sweep.best) {
      c.near("Z/4*Z/4 minimal S sweep max", sweep.best_point().quality, 0.987686, 1e-3);
      c.note("Z/4*Z/4 argmax mu(a) = " + fmt(sweep.best_point().mu[0]));
    }
    const double phi = std::numbers::phi;
    const double closed = (5 + std::sqrt(5.0)) / 4 * std::log(phi) / std::log(1 + std::sqrt(2.0));
    c.near("Z/4*Z/4 simple walk quality", quality(G, simple_walk(G), S), closed, 1e-9);
  }
  {
    const auto roots = detail::cubic_roots(5, -13, 7, -1, -10, 10);
    c.that("5x^3-13x^2+7x-1 has three real roots", roots.size() == 3);
    if (roots.size() == 3) {
      const double p = roots[1];
      c.near("middle root", p, 0.432693, 1e-6);
      auto G = cyclic_product({3, 4});
      auto mu = StepDistribution::from_letters(G, {{{0, 1}, p}, {{0, 2}, p}, {{1, 1}, 0.5 - p}, {{1, 3}, 0.5 - p}});
      const auto S = minimal_generators(G);
      auto qv = quality_value(G, mu, S);
      c.near("Z/3*Z/4 h - gamma_S v_S", qv.h - qv.gamma_s * qv.v_s, 0.0, 1e-5);
    }
  }
  {
    for (double p : {1.0 / 3, 0.25, 0.40}) {
      auto w = make_family("z2z2z2", detail::scalars({{"p", p}}));
      const double Q = quality(w.G, w.mu, all_letters(w.G));
      if (p == 1.0 / 3)
        c.near("Z/2*Z/2*Z/2 quality at p=1/3", Q, 1.0, 1e-9);
      else
        c.le("Z/2*Z/2*Z/2 quality at p=" + fmt(p), Q, 1.0 - 1e-6);
    }
  }
  return c.finish(10, "quality constants");
}

inline Result volume_checks(const Context&) {
  detail::Checks c;
  for (const auto& o : std::vector<std::vector<int>>{{4, 4}, {2, 4}, {2, 3}, {2, 3, 5}, {3, 3, 3}, {2, 2, 2}}) {
    auto G = cyclic_product(o);
    const double rho = growth_rho(G);
    c.le(G.describe() + " growth equation residual", growth_residual(G, rho), 1e-14);
    c.near(G.describe() + " log rho vs volume", std::log(rho), volume(G, LengthTable::natural(G)), 1e-12);
  }
  struct Case {
    std::vector<int> orders;
    bool minimal;
    int bfs_radius;
  };
  for (const Case& cs : {Case{{4, 4}, false, 11}, Case{{4, 4}, true, 15}, Case{{2, 4}, true, 15}}) {
    auto G = cyclic_product(cs.orders);
    const auto S = cs.minimal ? minimal_generators(G) : all_letters(G);
    const LengthTable len = letter_lengths(G, S);
    const std::string tag = G.describe() + (cs.minimal ? " minimal S" : " natural");
    const double v = volume(G, len);
    const auto bfs = enumerate_ball(G, S, cs.bfs_radius, 10'000'000);
    const auto dp = ball_count(G, len, 15);
    bool same = true;
    for (int m = 0; m <= cs.bfs_radius; ++m) same = same && bfs[static_cast<std::size_t>(m)] == dp[static_cast<std::size_t>(m)];
    c.that(tag + " BFS sphere sizes equal normal-form counts up to radius " + std::to_string(cs.bfs_radius), same);
    const int n = cs.bfs_radius;
    c.near(tag + " BFS log sphere ratio at radius " + std::to_string(n),
           std::log(static_cast<double>(bfs[static_cast<std::size_t>(n)]) / static_cast<double>(bfs[static_cast<std::size_t>(n - 1)])),
           v, 1e-2);
    c.near(tag + " log sphere ratio at radius 15", std::log(static_cast<double>(dp[15]) / static_cast<double>(dp[14])), v,
           1e-2);
  }
  {
    auto G = cyclic_product({2, 4});
    c.near("Z/2*Z/4 minimal S volume = log phi", volume(G, letter_lengths(G, minimal_generators(G))),
           std::log(std::numbers::phi), 1e-10);
    auto H = cyclic_product({4, 4});
    c.near("Z/4*Z/4 minimal S volume = log(1+sqrt2)", volume(H, letter_lengths(H, minimal_generators(H))),
           std::log(1 + std::sqrt(2.0)), 1e-10);
  }
  return c.finish(11, "volume");
}

inline Result monte_carlo(const Context& ctx) {
  detail::Checks c;
  const std::vector<std::pair<std::string, FamilyParams>> walks{{"zkzk-simple", detail::scalars({{"k", 4}})},
                                                                {"hecke-simple", detail::scalars({{"k", 3}})}};
  std::uint64_t salt = 0;
  for (const auto& [name, params] : walks) {
    auto s = detail::solve_family(name, params);
    const auto& G = s.walk.G;
    const auto& mu = s.walk.mu;
    const std::string tag = G.describe();
    const double gamma = drift(G, mu, s.rep.r);
    auto d = estimate_drift(G, mu, 10'000, 200, ctx.seed + ++salt, std::nullopt, ctx.threads);
    c.le(tag + " drift |est - gamma| / 3se", std::abs(d.estimate - gamma), 3 * d.stderr_);

    auto pre = estimate_prefix(G, mu, 10'000, 200, ctx.seed + ++salt, 1, ctx.threads);
    for (LetterId a = 0; a < G.alphabet_size(); ++a) {
      const double r = s.rep.r[a];
      const double se = std::sqrt(r * (1 - r) / static_cast<double>(pre.used));
      c.le(tag + " first-letter frequency of " + to_string(G.letter(a)),
           std::abs(pre.frequency(Word(normal_form, {a})) - r), 3 * se);
    }

    const LetterId target = 0;
    auto hit = estimate_hitting(G, mu, target, 10'000, 200, ctx.seed + ++salt, ctx.threads);
    const double q = s.rep.q[target];
    const double se = std::sqrt(q * (1 - q) / 200.0);
    c.le(tag + " hitting probability of " + to_string(G.letter(target)), std::abs(hit.estimate - q),
         3 * se + hit.bias_allowance);
  }
  return c.finish(12, "Monte Carlo concordance");
}

inline Result convolution_trend(const Context&) {
  detail::Checks c;
  auto w = make_family("zkzk-simple", detail::scalars({{"k", 3}}));
  SolveReport rep = solve(w.G, w.mu);
  const double gamma = drift(w.G, w.mu, rep.r), h = entropy(w.G, w.mu, rep.r, rep.q);
  const auto series = convolution_series(w.G, w.mu, 8);
  for (int n : {7, 8}) {
    const auto& a = series[static_cast<std::size_t>(n)];
    const auto& b = series[static_cast<std::size_t>(n - 1)];
    c.near("E|X_n| increment at n=" + std::to_string(n), a.expected_length - b.expected_length, gamma, 0.02);
    c.near("H(mu^n) increment at n=" + std::to_string(n), a.entropy - b.entropy, h, 0.05);
  }
  return c.finish(13, "exact convolution trend");
}

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "drift table Z/k*Z/k", drift_table_zkzk},
      {2, "drift table Z/2*Z/k", drift_table_hecke},
      {3, "Z/2*Z/4 r-vector", r_vector_z2z4},
      {4, "recurrence and root identities", recurrence_identities},
      {5, "Z/4*Z/4 r-vector", z4z4_r_vector},
      {6, "closed forms agree with the solver", closed_form_agreement},
      {7, "Z/2*Z/3 maximal drift", z2z3_max_drift},
      {8, "structural identities", structural_identities},
      {9, "extremal measures", extremal_measures},
      {10, "quality constants", quality_constants},
      {11, "volume", volume_checks},
      {12, "Monte Carlo concordance", monte_carlo},
      {13, "exact convolution trend", convolution_trend},
  };
  return all;
}

/// Runs one criterion; library errors become failures rather than escaping.
inline Result run(const Criterion& cr, const Context& ctx) {
  try {
    return cr.run(ctx);
  } catch (const std::exception& e) {
    Result r;
    r.id = cr.id;
    r.name = cr.name;
    r.detail = std::string("error: ") + e.what();
    return r;
  }
}

inline std::string format(const Result& r) {
  std::string s = std::string(r.pass ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name + ": " + r.detail;
  for (const auto& n : r.notes) s += "\n  note: " + n;
  return s;
}

}  // namespace freewalk::acceptance
