#pragma once

// Drift, entropy, volume and Vershik quality of a solved walk.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "freewalk/detail/parallel.hpp"
#include "freewalk/error.hpp"
#include "freewalk/group.hpp"
#include "freewalk/harmonic.hpp"
#include "freewalk/traffic.hpp"
#include "freewalk/walk.hpp"

namespace freewalk {

/// gamma = sum_a mu(a) [ -r(a^-1) + r(Sigma \ Sigma_a) ].
inline double drift(const FreeProduct& G, const StepDistribution& mu, const RootVector& r) {
  auto sums = factor_sums(G, r);
  const double total = r.total();
  double g = 0.0;
  for (LetterId a = 0; a < G.alphabet_size(); ++a) {
    if (mu[a] == 0.0) continue;
    g += mu[a] * (-r[G.inverse(a)] + (total - sums[G.factor_of(a)]));
  }
  return g;
}

/// Expected growth of |.|_S per step, seen on the infinite normal form.
inline double drift_weighted(const FreeProduct& G, const StepDistribution& mu, const RootVector& r,
                             const LengthTable& len) {
  auto sums = factor_sums(G, r);
  const double total = r.total();
  double g = 0.0;
  for (LetterId a = 0; a < G.alphabet_size(); ++a) {
    if (mu[a] == 0.0) continue;
    const LetterId ai = G.inverse(a);
    double t = -len[ai] * r[ai] + len[a] * (total - sums[G.factor_of(a)]);
    for (LetterId b : G.factor_letters(G.factor_of(a))) {
      if (b == ai) continue;
      t += (len[*G.multiply(a, b)] - len[b]) * r[b];
    }
    g += mu[a] * t;
  }
  return g;
}

inline double entropy(const FreeProduct& G, const StepDistribution& mu, const RootVector& r, const HittingVector& q) {
  auto sums = factor_sums(G, r);
  const double total = r.total();
  double h = 0.0;
  for (LetterId a = 0; a < G.alphabet_size(); ++a) {
    if (mu[a] == 0.0) continue;
    const LetterId ai = G.inverse(a);
    double t = -std::log(q[ai]) * r[ai] + std::log(q[a]) * (total - sums[G.factor_of(a)]);
    for (LetterId b : G.factor_letters(G.factor_of(a))) {
      if (b == ai) continue;
      auto ab = G.multiply(a, b);
      if (!ab) throw Error(ErrorCode::InvalidArgument, "entropy: a*b collapsed to the identity");
      t += std::log(q[*ab] / q[b]) * r[b];
    }
    h -= mu[a] * t;
  }
  return h;
}

struct VolumeRoot {
  /// Root in (0,1) of sum_i f_i(t)/(1+f_i(t)) = 1.
  double t = 0.0;
  /// 1/t; for natural lengths this solves sum_i k_i/(rho+k_i) = 1.
  double rho = 0.0;
  double v = 0.0;
  double residual = 0.0;
};

namespace detail {

inline double volume_equation(const FreeProduct& G, const LengthTable& len, double t) {
  double s = 0.0;
  for (std::size_t i = 0; i < G.num_factors(); ++i) {
    double f = 0.0;
    for (LetterId u : G.factor_letters(i)) f += std::pow(t, len[u]);
    s += f / (1.0 + f);
  }
  return s - 1.0;
}

}  // namespace detail

/// Growth root of the S-length series. The left side is increasing in t, so
/// bisection runs until the bracket cannot shrink further.
inline VolumeRoot volume_root(const FreeProduct& G, const LengthTable& len) {
  if (len.size() != G.alphabet_size()) throw Error(ErrorCode::InvalidArgument, "length table does not match the alphabet");
  if (!(detail::volume_equation(G, len, 1.0) > 0.0))
    throw Error(ErrorCode::Degenerate, G.describe() + " has subexponential growth; volume is 0");
  double lo = 0.0, hi = 1.0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (detail::volume_equation(G, len, mid) < 0.0 ? lo : hi) = mid;
  }
  const double rlo = std::abs(detail::volume_equation(G, len, lo));
  const double rhi = std::abs(detail::volume_equation(G, len, hi));
  VolumeRoot out;
  out.t = rlo < rhi ? lo : hi;
  out.residual = std::min(rlo, rhi);
  out.rho = 1.0 / out.t;
  out.v = -std::log(out.t);
  return out;
}

inline double volume(const FreeProduct& G, const LengthTable& len) { return volume_root(G, len).v; }

/// Root rho of sum_i k_i/(rho+k_i) = 1, the exponential growth rate of spheres
/// for the natural generators.
inline double growth_rho(const FreeProduct& G) {
  std::vector<double> k;
  double total = 0.0;
  for (std::size_t i = 0; i < G.num_factors(); ++i) {
    k.push_back(static_cast<double>(G.factor_letters(i).size()));
    total += k.back();
  }
  auto f = [&](double rho) {
    double s = 0.0;
    for (double ki : k) s += ki / (rho + ki);
    return s - 1.0;
  };
  if (!(f(0.0) > 0.0) || G.is_infinite_dihedral())
    throw Error(ErrorCode::Degenerate, G.describe() + " has subexponential growth");
  double lo = 0.0, hi = total;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
}

/// |sum_i k_i/(rho+k_i) - 1|.
inline double growth_residual(const FreeProduct& G, double rho) {
  double s = 0.0;
  for (std::size_t i = 0; i < G.num_factors(); ++i) {
    const double k = static_cast<double>(G.factor_letters(i).size());
    s += k / (rho + k);
  }
  return std::abs(s - 1.0);
}

/// mu(u) = 1/(rho + k_i) for u in Sigma_i.
inline StepDistribution extremal_measure(const FreeProduct& G) {
  const double rho = growth_rho(G);
  std::vector<double> w(G.alphabet_size());
  double total = 0.0;
  for (LetterId a = 0; a < w.size(); ++a) {
    w[a] = 1.0 / (rho + static_cast<double>(G.factor_letters(G.factor_of(a)).size()));
    total += w[a];
  }
  for (double& x : w) x /= total;
  return StepDistribution::from_weights(G, std::move(w));
}

struct ExtremalCylinders {
  double harmonic = 0.0;
  double max_entropy = 0.0;
};

/// Cylinder masses of the harmonic measure of the extremal walk and of the
/// measure of maximal entropy on infinite normal words. The latter is the
/// Parry measure of the letter shift: with c_i = 1/(rho+k_i) and
/// Z = sum_i k_i c_i^2, nu(u_1...u_k) = c_i c_j / (Z rho^(k-1)).
inline ExtremalCylinders extremal_cylinders(const FreeProduct& G, const Word& w) {
  if (w.empty()) return {1.0, 1.0};
  const double rho = growth_rho(G);
  auto c = [&](LetterId a) {
    return 1.0 / (rho + static_cast<double>(G.factor_letters(G.factor_of(a)).size()));
  };
  double Z = 0.0;
  for (std::size_t i = 0; i < G.num_factors(); ++i) {
    const double k = static_cast<double>(G.factor_letters(i).size());
    Z += k / ((rho + k) * (rho + k));
  }
  const double k = static_cast<double>(w.size());
  ExtremalCylinders out;
  out.harmonic = std::pow(rho, -(k - 1.0)) * c(w.back());
  out.max_entropy = c(w.front()) * c(w.back()) / (Z * std::pow(rho, k - 1.0));
  return out;
}

struct QualityValue {
  double h = 0.0;
  double gamma_s = 0.0;
  double v_s = 0.0;
  double quality = 0.0;
};

/// h / (gamma_S v_S) for a single step law.
inline QualityValue quality_value(const FreeProduct& G, const StepDistribution& mu, std::span<const LetterId> S,
                                  const SolverOptions& opts = {}) {
  const LengthTable len = letter_lengths(G, S);
  SolveReport rep = solve(G, mu, opts);
  QualityValue out;
  out.h = entropy(G, mu, rep.r, rep.q);
  out.gamma_s = drift_weighted(G, mu, rep.r, len);
  out.v_s = volume(G, len);
  if (!(out.gamma_s > opts.tol))
    throw Error(ErrorCode::Degenerate, "S-drift " + std::to_string(out.gamma_s) + " is not positive");
  out.quality = out.h / (out.gamma_s * out.v_s);
  return out;
}

inline double quality(const FreeProduct& G, const StepDistribution& mu, std::span<const LetterId> S,
                      const SolverOptions& opts = {}) {
  return quality_value(G, mu, S, opts).quality;
}

struct QualityPoint {
  /// Mass of each inversion orbit of S, in units of 1/resolution.
  std::vector<int> counts;
  std::vector<double> orbit_mass;
  std::vector<double> mu;
  /// NaN when the measure is not admissible (non-generating, degenerate).
  double quality = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct QualitySweep {
  /// Inversion orbits of S, each listed by letter id.
  std::vector<std::vector<LetterId>> orbits;
  std::vector<QualityPoint> points;
  std::optional<std::size_t> best;
  /// True when the best point has an orbit at the grid's minimal positive
  /// mass, so the supremum may sit on the closure of the simplex.
  bool on_boundary = false;

  const QualityPoint& best_point() const { return points.at(best.value()); }
};

inline std::vector<std::vector<LetterId>> inversion_orbits(const FreeProduct& G, std::span<const LetterId> S) {
  std::vector<LetterId> s(S.begin(), S.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  std::vector<std::vector<LetterId>> orbits;
  std::vector<bool> seen(G.alphabet_size(), false);
  for (LetterId a : s) {
    if (seen[a]) continue;
    const LetterId ai = G.inverse(a);
    if (!std::binary_search(s.begin(), s.end(), ai))
      throw Error(ErrorCode::InvalidArgument, "S is not closed under inverses: " + to_string(G.letter(a)));
    seen[a] = seen[ai] = true;
    orbits.push_back(a == ai ? std::vector<LetterId>{a} : std::vector<LetterId>{a, ai});
  }
  return orbits;
}

/// Grid search of h/(gamma_S v_S) over symmetric laws supported on S. Every
/// orbit gets a multiple of 1/N of the mass, N = round(1/resolution).
inline QualitySweep quality_sup(const FreeProduct& G, std::span<const LetterId> S, double resolution,
                                const SolverOptions& opts = {}, unsigned threads = 0) {
  if (!(resolution > 0.0 && resolution <= 0.5)) throw Error(ErrorCode::InvalidArgument, "resolution must be in (0, 1/2]");
  letter_lengths(G, S);  // rejects non-generating S up front
  QualitySweep sweep;
  sweep.orbits = inversion_orbits(G, S);
  const int N = static_cast<int>(std::lround(1.0 / resolution));
  const std::size_t m = sweep.orbits.size();

  std::vector<std::vector<int>> grid;
  std::vector<int> cur(m, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == m) {
      cur[i] = left;
      grid.push_back(cur);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      cur[i] = c;
      self(self, i + 1, left - c);
    }
  };
  rec(rec, 0, N);

  sweep.points.resize(grid.size());
  detail::parallel_for(
      grid.size(),
      [&](std::size_t idx) {
        QualityPoint& pt = sweep.points[idx];
        pt.counts = grid[idx];
        pt.mu.assign(G.alphabet_size(), 0.0);
        for (std::size_t o = 0; o < m; ++o) {
          const double mass = static_cast<double>(pt.counts[o]) / N;
          pt.orbit_mass.push_back(mass);
          for (LetterId a : sweep.orbits[o]) pt.mu[a] = mass / static_cast<double>(sweep.orbits[o].size());
        }
        try {
          auto mu = StepDistribution::from_weights(G, pt.mu);
          pt.quality = quality(G, mu, S, opts);
        } catch (const Error& e) {
          pt.error = error_name(e.code());
        }
      },
      threads);

  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const double Q = sweep.points[i].quality;
    if (std::isnan(Q)) continue;
    if (!sweep.best || Q > sweep.points[*sweep.best].quality) sweep.best = i;
  }
  if (sweep.best) {
    const auto& c = sweep.points[*sweep.best].counts;
    sweep.on_boundary = std::any_of(c.begin(), c.end(), [](int x) { return x <= 1; });
  }
  return sweep;
}

/// (h/gamma, v): dimensions of the harmonic measure and of the space of ends
/// for the metric exp(-|xi_1 ^ xi_2|).
struct Hausdorff {
  double measure = 0.0;
  double support = 0.0;
};

inline Hausdorff hausdorff(const FreeProduct& G, const StepDistribution& mu, const SolverOptions& opts = {}) {
  SolveReport rep = solve(G, mu, opts);
  return {entropy(G, mu, rep.r, rep.q) / drift(G, mu, rep.r), volume(G, LengthTable::natural(G))};
}

struct MetricsReport {
  double gamma = 0.0;
  double gamma_s = 0.0;
  double h = 0.0;
  double v = 0.0;
  double v_s = 0.0;
  /// h / (gamma_S v_S).
  double quality = 0.0;
  double hd_measure = 0.0;
  double hd_support = 0.0;
  bool stationary = false;
};

/// All metrics from a solved walk. S defaults to the natural generators.
inline MetricsReport compute_metrics(const FreeProduct& G, const StepDistribution& mu, const SolveReport& rep,
                                     const LengthTable& len) {
  MetricsReport m;
  m.gamma = drift(G, mu, rep.r);
  m.gamma_s = drift_weighted(G, mu, rep.r, len);
  m.h = entropy(G, mu, rep.r, rep.q);
  m.v = volume(G, LengthTable::natural(G));
  m.v_s = len.is_natural() ? m.v : volume(G, len);
  m.quality = m.h / (m.gamma_s * m.v_s);
  m.hd_measure = m.h / m.gamma;
  m.hd_support = m.v;
  m.stationary = rep.stationary;
  return m;
}

inline MetricsReport compute_metrics(const FreeProduct& G, const StepDistribution& mu, const SolveReport& rep) {
  return compute_metrics(G, mu, rep, LengthTable::natural(G));
}

}  // namespace freewalk
