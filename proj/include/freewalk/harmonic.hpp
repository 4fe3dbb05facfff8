#pragma once

// Markovian multiplicative harmonic measure on infinite normal-form words.
// Cylinder masses are nu(u_1...u_k) = q(u_1)...q(u_{k-1}) r(u_k), with
// q(a) = r(a)/r(Sigma \ Sigma_a); equivalently a Markov chain on letters with
// initial law r and transitions P_{u,v} = r(v)/r(Sigma \ Sigma_u) off Sigma_u.

#include <cmath>
#include <cstdint>
#include <vector>

#include "freewalk/error.hpp"
#include "freewalk/group.hpp"
#include "freewalk/rng.hpp"
#include "freewalk/traffic.hpp"
#include "freewalk/walk.hpp"

namespace freewalk {

struct LetterChain {
  RootVector first;
  /// r(a) / r(Sigma \ Sigma_a); equals the hitting vector at the solution.
  HittingVector ratio;
  /// Row-major transition matrix over letters.
  std::vector<double> trans;
  /// Stationary law of trans, proportional to r(a) r(Sigma \ Sigma_a).
  std::vector<double> pi;

  std::size_t size() const noexcept { return first.size(); }
  double P(LetterId u, LetterId v) const { return trans[u * size() + v]; }
};

inline LetterChain build_chain(const FreeProduct& G, const RootVector& r) {
  const std::size_t n = G.alphabet_size();
  if (r.size() != n) throw Error(ErrorCode::InvalidArgument, "root vector does not match the alphabet");
  for (LetterId a = 0; a < n; ++a)
    if (!(r[a] > 0.0)) throw Error(ErrorCode::InvalidArgument, "root vector must be strictly positive");
  auto sums = factor_sums(G, r);
  const double total = r.total();

  LetterChain chain;
  chain.first = r;
  chain.ratio = HittingVector(n);
  chain.trans.assign(n * n, 0.0);
  chain.pi.assign(n, 0.0);
  double pi_total = 0.0;
  for (LetterId u = 0; u < n; ++u) {
    const double off = total - sums[G.factor_of(u)];
    chain.ratio[u] = r[u] / off;
    for (LetterId v = 0; v < n; ++v)
      if (!G.same_factor(u, v)) chain.trans[u * n + v] = r[v] / off;
    chain.pi[u] = r[u] * off;
    pi_total += chain.pi[u];
  }
  for (double& p : chain.pi) p /= pi_total;
  return chain;
}

/// log nu(w Sigma^N); summing logs keeps long cylinders from underflowing.
inline double log_cylinder_prob(const LetterChain& chain, const Word& w) {
  if (w.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) s += std::log(chain.ratio[w[i]]);
  return s + std::log(chain.first[w.back()]);
}

inline double cylinder_prob(const LetterChain& chain, const Word& w) {
  if (w.empty()) return 1.0;
  if (w.size() > 64) return std::exp(log_cylinder_prob(chain, w));
  double p = chain.first[w.back()];
  for (std::size_t i = 0; i + 1 < w.size(); ++i) p *= chain.ratio[w[i]];
  return p;
}

/// q(Sigma_1) q(Sigma_2); equal to 1 for every transient walk on a free
/// product of two finite groups.
inline double two_factor_identity(const FreeProduct& G, const HittingVector& q) {
  if (G.num_factors() != 2) throw Error(ErrorCode::InvalidArgument, "the two-factor identity needs exactly two factors");
  auto s = factor_sums(G, q);
  return s[0] * s[1];
}

namespace detail {

inline void sum_prefixed(const FreeProduct& G, const LetterChain& chain, std::vector<LetterId>& prefix, int remaining,
                         const Word& w, double& acc) {
  if (remaining == 0) {
    std::vector<LetterId> full(prefix);
    full.insert(full.end(), w.letters().begin(), w.letters().end());
    acc += cylinder_prob(chain, Word(normal_form, std::move(full)));
    return;
  }
  for (LetterId v = 0; v < G.alphabet_size(); ++v) {
    if (!prefix.empty() && G.same_factor(prefix.back(), v)) continue;
    if (remaining == 1 && !w.empty() && G.same_factor(v, w.front())) continue;
    prefix.push_back(v);
    sum_prefixed(G, chain, prefix, remaining - 1, w, acc);
    prefix.pop_back();
  }
}

}  // namespace detail

/// |nu(w) - sum_{|v| = shift} nu(v w)| over normal-form prefixes v.
/// Zero for shift = 1 iff nu is shift-invariant.
inline double shift_invariance_residual(const FreeProduct& G, const LetterChain& chain, const Word& w, int shift) {
  if (shift < 1) throw Error(ErrorCode::InvalidArgument, "shift must be >= 1");
  std::vector<LetterId> prefix;
  double acc = 0.0;
  detail::sum_prefixed(G, chain, prefix, shift, w, acc);
  return std::abs(cylinder_prob(chain, w) - acc);
}

/// Residual of invariance under the two-step shift, which holds for every
/// walk on a free product of two groups.
inline double tau2_invariance_residual(const FreeProduct& G, const LetterChain& chain, const Word& w) {
  if (G.num_factors() != 2) throw Error(ErrorCode::InvalidArgument, "tau^2 invariance is only defined for two factors");
  return shift_invariance_residual(G, chain, w, 2);
}

/// |nu(w) - sum_a mu(a) nu({xi : a.xi in [w]})|. The preimage of [w] under
/// xi -> a.xi is a finite union of cylinders:
///   xi_0 outside Sigma_a (prepend):  needs w_1 = a, leaves [w_2...w_k]
///                                    (or {xi_0 not in Sigma_a} when k = 1);
///   xi_0 in Sigma_a, xi_0 != a^-1:   needs w_1 in Sigma_a \ {a}, gives [(a^-1 w_1) w_2...];
///   xi_0 = a^-1 (cancel):            needs w_1 outside Sigma_a, gives [a^-1 w].
inline double mu_invariance_residual(const FreeProduct& G, const StepDistribution& mu, const LetterChain& chain,
                                     const Word& w) {
  if (w.empty()) return 0.0;
  auto sums = factor_sums(G, chain.first);
  const double total = chain.first.total();
  const auto tail = w.letters().subspan(1);
  double acc = 0.0;
  for (LetterId a = 0; a < G.alphabet_size(); ++a) {
    if (mu[a] == 0.0) continue;
    double mass = 0.0;
    if (w.front() == a) {
      mass += w.size() == 1 ? total - sums[G.factor_of(a)]
                            : cylinder_prob(chain, Word(normal_form, {tail.begin(), tail.end()}));
    }
    if (G.same_factor(a, w.front()) && w.front() != a) {
      std::vector<LetterId> pre{*G.multiply(G.inverse(a), w.front())};
      pre.insert(pre.end(), tail.begin(), tail.end());
      mass += cylinder_prob(chain, Word(normal_form, std::move(pre)));
    }
    if (!G.same_factor(a, w.front())) {
      std::vector<LetterId> pre{G.inverse(a)};
      pre.insert(pre.end(), w.letters().begin(), w.letters().end());
      mass += cylinder_prob(chain, Word(normal_form, std::move(pre)));
    }
    acc += mu[a] * mass;
  }
  return std::abs(cylinder_prob(chain, w) - acc);
}

/// All normal-form words of exactly `length` letters, in lexicographic order of ids.
inline std::vector<Word> normal_words(const FreeProduct& G, int length) {
  std::vector<std::vector<LetterId>> cur{{}};
  for (int k = 0; k < length; ++k) {
    std::vector<std::vector<LetterId>> next;
    for (const auto& w : cur)
      for (LetterId v = 0; v < G.alphabet_size(); ++v)
        if (w.empty() || !G.same_factor(w.back(), v)) {
          auto x = w;
          x.push_back(v);
          next.push_back(std::move(x));
        }
    cur = std::move(next);
  }
  std::vector<Word> out;
  out.reserve(cur.size());
  for (auto& w : cur) out.emplace_back(normal_form, std::move(w));
  return out;
}

/// Prefix of length `length` of a boundary point drawn from the chain.
inline Word sample_harmonic(const FreeProduct& G, const LetterChain& chain, int length, std::uint64_t seed) {
  if (length < 1) throw Error(ErrorCode::InvalidArgument, "sample length must be >= 1");
  const std::size_t n = G.alphabet_size();
  CounterRng rng(seed);
  DiscreteSampler first(chain.first.values());
  std::vector<LetterId> letters{first(rng)};
  std::vector<DiscreteSampler> rows;
  rows.reserve(n);
  for (LetterId u = 0; u < n; ++u)
    rows.emplace_back(std::span<const double>(chain.trans).subspan(u * n, n));
  while (static_cast<int>(letters.size()) < length) letters.push_back(rows[letters.back()](rng));
  return Word(normal_form, std::move(letters));
}

}  // namespace freewalk
