#pragma once

// Hitting-probability fixed point and the Traffic Equations.
//
// For every letter a the hitting probabilities satisfy
//
//   q(a) = mu(a) + sum_{u*v=a} mu(u) q(v) + q(a) sum_{c not in Sigma_a} mu(c) q(c^-1),
//
// where u, v range over Sigma_a. The right-hand side (phi) is monotone with
// nonnegative coefficients, so iterating from q = 0 climbs to the least fixed
// point, which is the hitting vector. The boundary marginal is then
// r(a) = q(a) / (1 + q(Sigma_a)).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "freewalk/error.hpp"
#include "freewalk/group.hpp"
#include "freewalk/walk.hpp"

namespace freewalk {

struct SolverOptions {
  double tol = 1e-13;
  std::size_t max_iter = 1'000'000;
  /// Switch to Newton steps once plain iteration has run this long.
  std::size_t newton_after = 20'000;
  /// Newton refinements applied after the monotone iteration has converged.
  int polish_steps = 3;
  double stationarity_tol = 1e-9;
};

inline HittingVector phi(const FreeProduct& G, const StepDistribution& mu, const HittingVector& q) {
  const std::size_t n = G.alphabet_size();
  // return[i] = sum_{c in Sigma_i} mu(c) q(c^-1)
  std::vector<double> back(G.num_factors(), 0.0);
  for (LetterId c = 0; c < n; ++c) back[G.factor_of(c)] += mu[c] * q[G.inverse(c)];
  double back_total = 0.0;
  for (double b : back) back_total += b;

  HittingVector out(n);
  for (LetterId a = 0; a < n; ++a) {
    const std::size_t i = G.factor_of(a);
    double s = mu[a];
    for (LetterId u : G.factor_letters(i)) {
      if (u == a || mu[u] == 0.0) continue;
      // v = u^-1 a is a nonidentity letter because u != a
      s += mu[u] * q[*G.multiply(G.inverse(u), a)];
    }
    out[a] = s + q[a] * (back_total - back[i]);
  }
  return out;
}

namespace detail {

inline double sup_distance(const HittingVector& x, const HittingVector& y) {
  double d = 0.0;
  for (LetterId a = 0; a < x.size(); ++a) d = std::max(d, std::abs(x[a] - y[a]));
  return d;
}

/// Jacobian of phi at q.
inline Eigen::MatrixXd phi_jacobian(const FreeProduct& G, const StepDistribution& mu, const HittingVector& q) {
  const std::size_t n = G.alphabet_size();
  std::vector<double> back(G.num_factors(), 0.0);
  for (LetterId c = 0; c < n; ++c) back[G.factor_of(c)] += mu[c] * q[G.inverse(c)];
  double back_total = 0.0;
  for (double b : back) back_total += b;

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (LetterId a = 0; a < n; ++a) {
    const std::size_t i = G.factor_of(a);
    const auto ra = static_cast<Eigen::Index>(a);
    for (LetterId u : G.factor_letters(i)) {
      if (u == a) continue;
      J(ra, static_cast<Eigen::Index>(*G.multiply(G.inverse(u), a))) += mu[u];
    }
    J(ra, ra) += back_total - back[i];
    for (LetterId v = 0; v < n; ++v)
      if (G.factor_of(v) != i) J(ra, static_cast<Eigen::Index>(v)) += q[a] * mu[G.inverse(v)];
  }
  return J;
}

/// One Newton step for q = phi(q). Returns false if the step leaves [0,1)
/// or does not reduce the fixed-point residual.
inline bool newton_step(const FreeProduct& G, const StepDistribution& mu, HittingVector& q, double& residual) {
  const auto n = static_cast<Eigen::Index>(G.alphabet_size());
  HittingVector image = phi(G, mu, q);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index a = 0; a < n; ++a) rhs(a) = image[static_cast<LetterId>(a)] - q[static_cast<LetterId>(a)];
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - phi_jacobian(G, mu, q);
  Eigen::VectorXd delta = A.partialPivLu().solve(rhs);
  HittingVector next(q);
  for (Eigen::Index a = 0; a < n; ++a) {
    double v = q[static_cast<LetterId>(a)] + delta(a);
    if (!std::isfinite(v) || v < 0.0 || v >= 1.0) return false;
    next[static_cast<LetterId>(a)] = v;
  }
  double next_residual = sup_distance(phi(G, mu, next), next);
  if (!(next_residual < residual)) return false;
  q = std::move(next);
  residual = next_residual;
  return true;
}

}  // namespace detail

struct HittingSolution {
  HittingVector q;
  std::size_t iterations = 0;
  /// sup-norm of phi(q) - q at the returned q.
  double sup_residual = 0.0;
  /// |sum_i q(Sigma_i)/(1+q(Sigma_i)) - 1|.
  double consistency_residual = 0.0;
  bool newton_used = false;
};

inline double consistency_residual(const FreeProduct& G, const HittingVector& q) {
  double s = 0.0;
  for (double qi : factor_sums(G, q)) s += qi / (1.0 + qi);
  return std::abs(s - 1.0);
}

/// Least fixed point of phi by monotone iteration from 0, with Newton
/// refinement at the end (and as a fallback when iteration stalls).
inline HittingSolution solve_hitting(const FreeProduct& G, const StepDistribution& mu, const SolverOptions& opts = {}) {
  const std::size_t n = G.alphabet_size();
  HittingSolution sol;
  HittingVector q(n, 0.0);
  bool converged = false;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    HittingVector next = phi(G, mu, q);
    double change = detail::sup_distance(next, q);
    q = std::move(next);
    sol.iterations = it;
    if (change < opts.tol) {
      converged = true;
      break;
    }
    if (it >= opts.newton_after && it % opts.newton_after == 0) {
      double residual = detail::sup_distance(phi(G, mu, q), q);
      for (int k = 0; k < 100 && residual >= opts.tol; ++k) {
        if (!detail::newton_step(G, mu, q, residual)) break;
        sol.newton_used = true;
      }
      if (residual < opts.tol) {
        converged = true;
        break;
      }
    }
  }
  if (!converged)
    throw Error(ErrorCode::MaxIterExceeded,
                "hitting iteration did not converge in " + std::to_string(opts.max_iter) + " iterations");

  double residual = detail::sup_distance(phi(G, mu, q), q);
  for (int k = 0; k < opts.polish_steps && residual > 0.0; ++k)
    if (!detail::newton_step(G, mu, q, residual)) break;

  sol.sup_residual = residual;
  for (LetterId a = 0; a < n; ++a)
    if (!(q[a] > 0.0) || q[a] >= 1.0 - opts.tol)
      throw Error(ErrorCode::ConsistencyViolation, "hitting probability of " + to_string(G.letter(a)) + " is " +
                                                       std::to_string(q[a]) + "; the walk is not transient");
  sol.consistency_residual = consistency_residual(G, q);
  const double allowed = std::max(10.0 * opts.tol, 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n));
  if (sol.consistency_residual > allowed)
    throw Error(ErrorCode::ConsistencyViolation,
                "sum_i q_i/(1+q_i) misses 1 by " + std::to_string(sol.consistency_residual));
  sol.q = std::move(q);
  return sol;
}

/// r(a) = q(a) / (1 + q(Sigma_a)).
inline RootVector q_to_r(const FreeProduct& G, const HittingVector& q) {
  auto sums = factor_sums(G, q);
  RootVector r(q.size());
  for (LetterId a = 0; a < q.size(); ++a) r[a] = q[a] / (1.0 + sums[G.factor_of(a)]);
  return r;
}

/// q(a) = r(a) / r(Sigma \ Sigma_a).
inline HittingVector r_to_q(const FreeProduct& G, const RootVector& r) {
  auto sums = factor_sums(G, r);
  const double total = r.total();
  HittingVector q(r.size());
  for (LetterId a = 0; a < r.size(); ++a) q[a] = r[a] / (total - sums[G.factor_of(a)]);
  return q;
}

/// Largest absolute defect of the Traffic Equations
///   x(a) = mu(a) x(Sigma\Sigma_a) + sum_{u*v=a} mu(u) x(v)
///          + x(a) sum_{u not in Sigma_a} mu(u^-1) x(u)/x(Sigma\Sigma_u)
/// at x = r.
inline double traffic_residual(const FreeProduct& G, const StepDistribution& mu, const RootVector& r) {
  const std::size_t n = G.alphabet_size();
  auto sums = factor_sums(G, r);
  const double total = r.total();
  std::vector<double> back(G.num_factors(), 0.0);
  for (LetterId u = 0; u < n; ++u)
    back[G.factor_of(u)] += mu[G.inverse(u)] * r[u] / (total - sums[G.factor_of(u)]);
  double back_total = 0.0;
  for (double b : back) back_total += b;

  double worst = 0.0;
  for (LetterId a = 0; a < n; ++a) {
    const std::size_t i = G.factor_of(a);
    double rhs = mu[a] * (total - sums[i]);
    for (LetterId u : G.factor_letters(i))
      if (u != a) rhs += mu[u] * r[*G.multiply(G.inverse(u), a)];
    rhs += r[a] * (back_total - back[i]);
    worst = std::max(worst, std::abs(r[a] - rhs));
  }
  return worst;
}

/// True iff r(Sigma_i) = 1/|I| for every factor, i.e. the harmonic measure is
/// shift-invariant (and then ergodic).
inline bool stationarity_check(const FreeProduct& G, const RootVector& r, double tol) {
  const double target = 1.0 / static_cast<double>(G.num_factors());
  for (double s : factor_sums(G, r))
    if (std::abs(s - target) >= tol) return false;
  return true;
}

struct SolveReport {
  HittingVector q;
  RootVector r;
  std::size_t iterations = 0;
  double sup_residual = 0.0;
  double traffic_residual = 0.0;
  double consistency_residual = 0.0;
  bool stationary = false;
  bool newton_used = false;
};

/// Validates the walk, then solves for q and r.
inline SolveReport solve(const FreeProduct& G, const StepDistribution& mu, const SolverOptions& opts = {}) {
  validate_walk(G, mu);
  HittingSolution hs = solve_hitting(G, mu, opts);
  SolveReport rep;
  rep.r = q_to_r(G, hs.q);
  rep.q = std::move(hs.q);
  rep.iterations = hs.iterations;
  rep.sup_residual = hs.sup_residual;
  rep.consistency_residual = hs.consistency_residual;
  rep.newton_used = hs.newton_used;
  rep.traffic_residual = traffic_residual(G, mu, rep.r);
  rep.stationary = stationarity_check(G, rep.r, opts.stationarity_tol);
  return rep;
}

}  // namespace freewalk
