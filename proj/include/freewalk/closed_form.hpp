#pragma once

// Explicit formulas for small free products, used as independent oracles for
// the solver. The polynomial families are templated on the scalar so that
// monotonicity in k can be checked beyond double precision.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "freewalk/error.hpp"

namespace freewalk::closed_form {

namespace detail {

inline void require_k(int k) {
  if (k < 3) throw Error(ErrorCode::InvalidArgument, "k must be >= 3, got " + std::to_string(k));
}

/// First sign change of f on a uniform grid over (lo, hi), refined by
/// bisection until the bracket stops shrinking.
template <class T, class F>
T first_root(F&& f, T lo, T hi, int grid = 2000) {
  T a = lo;
  T fa = f(a);
  for (int i = 1; i <= grid; ++i) {
    T b = lo + (hi - lo) * T(i) / T(grid);
    T fb = f(b);
    if ((fa < 0) != (fb < 0) || fb == 0) {
      if (fb == 0) return b;
      for (int it = 0; it < 400; ++it) {
        T mid = (a + b) / 2;
        if (!(mid > a && mid < b)) break;
        T fm = f(mid);
        if ((fm < 0) == (fa < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      using std::abs;
      return abs(f(a)) <= abs(f(b)) ? a : b;
    }
    a = b;
    fa = fb;
  }
  throw Error(ErrorCode::DomainError, "no sign change found on the search interval");
}

}  // namespace detail

// F_0 = 1, F_1 = x, F_n = 2(2-x) F_{n-1} - F_{n-2}.

/// Coefficient perturbation hook: when set, F_n for n == fault_n is shifted by
/// fault_delta. Used only as a negative control for the acceptance suite.
struct FaultInjection {
  int fault_n = -1;
  double fault_delta = 0.0;
};

inline FaultInjection& fault_injection() {
  static thread_local FaultInjection f;
  return f;
}

template <class T = double>
T eval_F(int n, const T& x) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "F_n needs n >= 0");
  T prev = T(1), cur = x;
  T out = n == 0 ? prev : cur;
  for (int i = 2; i <= n; ++i) {
    T next = 2 * (2 - x) * cur - prev;
    prev = cur;
    cur = next;
    out = cur;
  }
  const auto& fi = fault_injection();
  if (n == fi.fault_n) out += T(fi.fault_delta);
  return out;
}

/// x_k: root of F_k(x) = 1 in (0,1). x = 1 always solves it as well, so the
/// scan runs from the left and stops at the first crossing.
template <class T = double>
T solve_xk(int k) {
  detail::require_k(k);
  return detail::first_root<T>([k](const T& x) { return eval_F<T>(k, x) - 1; }, T(0), T(1));
}

template <class T = double>
T drift_zkzk(int k) {
  return (1 - solve_xk<T>(k)) / 2;
}

/// Letter values r(a^i) = F_i(x_k)/2 for i = 1..k-1 (identical on both factors).
template <class T = double>
std::vector<T> r_zkzk(int k) {
  const T x = solve_xk<T>(k);
  std::vector<T> r;
  for (int i = 1; i < k; ++i) r.push_back(eval_F<T>(i, x) / 2);
  return r;
}

// G_0 = 1/4 + y/2, G_1 = y, G_n = 8(1-y)/(3-2y) G_{n-1} - G_{n-2}.

template <class T = double>
T eval_G(int n, const T& y) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "G_n needs n >= 0");
  T prev = T(1) / 4 + y / 2, cur = y;
  if (n == 0) return prev;
  const T c = 8 * (1 - y) / (3 - 2 * y);
  for (int i = 2; i <= n; ++i) {
    T next = c * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// y_k: root of G_{k-1}(y) = y in (0, 1/2).
template <class T = double>
T solve_yk(int k) {
  detail::require_k(k);
  return detail::first_root<T>([k](const T& y) { return eval_G<T>(k - 1, y) - y; }, T(0), T(1) / 2);
}

template <class T = double>
T drift_hecke(int k) {
  return (1 - 2 * solve_yk<T>(k)) / 3;
}

/// Z/2 * Z/k simple walk: {r(a), r(b), ..., r(b^{k-1})}.
template <class T = double>
std::vector<T> r_hecke(int k) {
  const T y = solve_yk<T>(k);
  std::vector<T> r{eval_G<T>(0, y)};
  for (int i = 1; i < k; ++i) r.push_back(eval_G<T>(i, y));
  return r;
}

// Z/2 * Z/3 with mu(b) = p, mu(b^2) = q, mu(a) = 1 - p - q.

inline double drift_z2z3(double p, double q) {
  if (!(p >= 0.0 && q >= 0.0 && p + q < 1.0))
    throw Error(ErrorCode::DomainError, "z2z3 needs p, q >= 0 and p + q < 1");
  const double r = 1.0 - p - q;
  const double rp = r + p, rq = r + q;
  const double s = std::sqrt((p * p + q * q) * (3.0 + rp * rp + rq * rq) + 2.0 * p * q * (2.0 * r + 1.0));
  return 2.0 * r * (p * q - p - q + s) / (rp * rp + rq * rq - p * q + 2.0);
}

struct Z2Z3Root {
  double a = 0.0, b = 0.0, b2 = 0.0;
};

inline Z2Z3Root r_z2z3(double p, double q) {
  if (!(p >= 0.0 && q >= 0.0 && p + q < 1.0))
    throw Error(ErrorCode::DomainError, "z2z3 needs p, q >= 0 and p + q < 1");
  if (p == q) throw Error(ErrorCode::DomainError, "r formulas are singular at p = q; use the solver");
  const double d1 = std::sqrt(p * p * p * p + q * q * q * q - 2 * p * p * p - 2 * q * q * q + 2 * p * p * q * q -
                              6 * p * p * q - 6 * p * q * q + 5 * p * p + 5 * q * q + 6 * p * q);
  const double d2 = p * p + q * q - p * q - 2 * p - 2 * q + 4;
  Z2Z3Root out;
  out.a = (p * p + q * q - 2 * p * q - p - q + 4 - d1) / (2 * d2);
  out.b = (q * q * q - 3 * q * q + p * p * q - 5 * p * q + 2 * p + 6 * q - (2 - q) * d1) / (2 * (q - p) * d2);
  out.b2 = (p * p * p - 3 * p * p + p * q * q - 5 * p * q + 6 * p + 2 * q - (2 - p) * d1) / (2 * (p - q) * d2);
  return out;
}

/// Real roots in (0,1) of z^6 + 12z^4 - 4z^3 + 47z^2 - 48z + 12.
inline std::vector<double> z0_candidates() {
  auto f = [](double z) { return ((((z * z + 12.0) * z - 4.0) * z + 47.0) * z - 48.0) * z + 12.0; };
  std::vector<double> roots;
  const int grid = 10000;
  for (int i = 0; i < grid; ++i) {
    double a = static_cast<double>(i) / grid, b = static_cast<double>(i + 1) / grid;
    if ((f(a) < 0) == (f(b) < 0)) continue;
    for (int it = 0; it < 200; ++it) {
      double m = 0.5 * (a + b);
      if (!(m > a && m < b)) break;
      ((f(m) < 0) == (f(a) < 0) ? a : b) = m;
    }
    roots.push_back(std::abs(f(a)) <= std::abs(f(b)) ? a : b);
  }
  return roots;
}

struct Z2Z3Max {
  double z0 = 0.0;
  /// Maximizer (p, q) = (1 - z0, 0).
  double p = 0.0, q = 0.0;
  double gamma = 0.0;
};

/// The sextic root giving the largest drift along q = 0.
inline Z2Z3Max z2z3_max() {
  Z2Z3Max best;
  best.gamma = -1.0;
  for (double z : z0_candidates()) {
    double g = drift_z2z3(1.0 - z, 0.0);
    if (g > best.gamma) best = {z, 1.0 - z, 0.0, g};
  }
  if (best.gamma < 0.0) throw Error(ErrorCode::DomainError, "sextic has no root in (0,1)");
  return best;
}

// Z/3 * Z/3 with mu(a) = mu(b) = p, mu(a^2) = mu(b^2) = 1/2 - p.

inline double drift_z3z3_sym(double p) {
  if (!(p > 0.0 && p < 0.5)) throw Error(ErrorCode::DomainError, "z3z3-sym needs 0 < p < 1/2");
  return -0.25 + 0.25 * std::sqrt(16.0 * p * p - 8.0 * p + 5.0);
}

struct Z3Z3Root {
  double a = 0.0, a2 = 0.0;
};

/// r(a) = r(b) and r(a^2) = r(b^2). At p = 1/4 both reduce to 0/0; the limit
/// is the simple-walk value 1/4.
inline Z3Z3Root r_z3z3_sym(double p) {
  if (!(p > 0.0 && p < 0.5)) throw Error(ErrorCode::DomainError, "z3z3-sym needs 0 < p < 1/2");
  if (std::abs(4.0 * p - 1.0) < 1e-12) return {0.25, 0.25};
  const double s = std::sqrt(16.0 * p * p - 8.0 * p + 5.0);
  return {(4.0 * p - 3.0 + s) / (4.0 * (4.0 * p - 1.0)), (4.0 * p + 1.0 - s) / (4.0 * (4.0 * p - 1.0))};
}

/// mu(a) = p, mu(a^2) = q, mu(b) = mu(b^2) = (1-p-q)/2.
inline double drift_z3z3_asym(double p, double q) {
  if (!(p > 0.0 && q > 0.0 && p + q < 1.0)) throw Error(ErrorCode::DomainError, "z3z3-asym needs p, q > 0, p + q < 1");
  return 2.0 * (1.0 - p - q) * std::sqrt((p * p + q * q + p * q) / (p * p + q * q - 2.0 * p * q + 3.0));
}

/// Uniform on each factor, p = mu(Sigma_1), k_i = |Sigma_i|.
inline double drift_uniform_pair(double p, int k1, int k2) {
  if (k1 < 1 || k2 < 1) throw Error(ErrorCode::InvalidArgument, "factor sizes must be >= 1");
  if (k1 == 1 && k2 == 1) throw Error(ErrorCode::DomainError, "Z/2 * Z/2 is recurrent");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::DomainError, "uniform pair needs 0 < p < 1");
  return 2.0 * p * (1.0 - p) * (k1 * k2 - 1) / ((1.0 - p) * k1 + p * k2 + k1 * k2);
}

}  // namespace freewalk::closed_form
