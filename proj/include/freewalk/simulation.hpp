#pragma once

// Monte Carlo trajectories X_{n+1} = X_n * x_n and exact convolution powers.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "freewalk/detail/parallel.hpp"
#include "freewalk/error.hpp"
#include "freewalk/group.hpp"
#include "freewalk/rng.hpp"
#include "freewalk/walk.hpp"

namespace freewalk {

struct Trajectory {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t steps = 0;
  /// |X_n| for n = 0..steps; empty when recording was switched off.
  std::vector<long long> length_series;
  long long final_length = 0;
  Word final;
};

namespace detail {

/// Right-multiplies by a and returns the change of weighted length.
inline long long step_right(const FreeProduct& G, std::vector<LetterId>& letters, LetterId a, const LengthTable& len) {
  if (letters.empty() || !G.same_factor(letters.back(), a)) {
    letters.push_back(a);
    return len[a];
  }
  const LetterId last = letters.back();
  if (auto m = G.multiply(last, a)) {
    letters.back() = *m;
    return static_cast<long long>(len[*m]) - len[last];
  }
  letters.pop_back();
  return -static_cast<long long>(len[last]);
}

}  // namespace detail

inline Trajectory simulate(const FreeProduct& G, const StepDistribution& mu, std::size_t steps, std::uint64_t seed,
                           const std::optional<LengthTable>& lengths = std::nullopt, std::uint64_t stream = 0,
                           bool record_series = true) {
  const LengthTable len = lengths ? *lengths : LengthTable::natural(G);
  if (len.size() != G.alphabet_size()) throw Error(ErrorCode::InvalidArgument, "length table does not match the alphabet");
  CounterRng rng(seed, stream);
  DiscreteSampler draw(mu.values());
  if (draw.empty()) throw Error(ErrorCode::InvalidMeasure, "measure has empty support");

  Trajectory t;
  t.seed = seed;
  t.stream = stream;
  t.steps = steps;
  std::vector<LetterId> letters;
  long long length = 0;
  if (record_series) {
    t.length_series.reserve(steps + 1);
    t.length_series.push_back(0);
  }
  for (std::size_t n = 0; n < steps; ++n) {
    length += detail::step_right(G, letters, draw(rng), len);
    if (record_series) t.length_series.push_back(length);
  }
  t.final_length = length;
  t.final = Word(normal_form, std::move(letters));
  return t;
}

struct EstimateReport {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t reps = 0;
  std::size_t horizon = 0;
  /// Size of the known one-sided bias, 0 when the estimator is unbiased.
  double bias_allowance = 0.0;
};

namespace detail {

inline EstimateReport summarize(const std::vector<double>& x, std::size_t horizon) {
  EstimateReport rep;
  rep.reps = x.size();
  rep.horizon = horizon;
  double s = 0.0, s2 = 0.0;
  for (double v : x) s += v;
  rep.estimate = s / static_cast<double>(x.size());
  for (double v : x) s2 += (v - rep.estimate) * (v - rep.estimate);
  if (x.size() > 1) rep.stderr_ = std::sqrt(s2 / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return rep;
}

inline void require_reps(std::size_t reps, std::size_t horizon) {
  if (reps < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 replications");
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
}

}  // namespace detail

/// Mean of |X_steps|/steps over independent replications; replication i uses
/// stream i of the seed.
inline EstimateReport estimate_drift(const FreeProduct& G, const StepDistribution& mu, std::size_t steps,
                                     std::size_t reps, std::uint64_t seed,
                                     const std::optional<LengthTable>& lengths = std::nullopt, std::size_t threads = 0) {
  detail::require_reps(reps, steps);
  std::vector<double> speed(reps);
  detail::parallel_for(
      reps,
      [&](std::size_t i) {
        auto t = simulate(G, mu, steps, seed, lengths, i, false);
        speed[i] = static_cast<double>(t.final_length) / static_cast<double>(steps);
      },
      threads);
  return detail::summarize(speed, steps);
}

/// Fraction of replications visiting `target` within the horizon. Missing the
/// hits after the horizon biases this downward; the allowance reported is the
/// fraction of replications whose first hit fell in (horizon/2, horizon].
inline EstimateReport estimate_hitting(const FreeProduct& G, const StepDistribution& mu, LetterId target,
                                       std::size_t horizon, std::size_t reps, std::uint64_t seed,
                                       std::size_t threads = 0) {
  detail::require_reps(reps, horizon);
  if (target >= G.alphabet_size()) throw Error(ErrorCode::InvalidArgument, "target letter out of range");
  const LengthTable len = LengthTable::natural(G);
  std::vector<double> hit(reps, 0.0);
  std::vector<int> late(reps, 0);
  detail::parallel_for(
      reps,
      [&](std::size_t i) {
        CounterRng rng(seed, i);
        DiscreteSampler draw(mu.values());
        std::vector<LetterId> letters;
        for (std::size_t n = 1; n <= horizon; ++n) {
          detail::step_right(G, letters, draw(rng), len);
          if (letters.size() == 1 && letters[0] == target) {
            hit[i] = 1.0;
            late[i] = 2 * n > horizon;
            return;
          }
          // the walk needs at least |X_n| - 1 more steps to come back
          if (letters.size() > horizon - n + 1) return;
        }
      },
      threads);
  EstimateReport rep = detail::summarize(hit, horizon);
  double l = 0.0;
  for (int x : late) l += x;
  rep.bias_allowance = l / static_cast<double>(reps);
  return rep;
}

struct PrefixEstimate {
  std::map<Word, std::size_t> counts;
  std::size_t used = 0;
  /// Replications whose final word was shorter than the prefix.
  std::size_t dropped = 0;

  double frequency(const Word& w) const {
    auto it = counts.find(w);
    return it == counts.end() || used == 0 ? 0.0 : static_cast<double>(it->second) / static_cast<double>(used);
  }
};

/// Empirical law of the first prefix_len letters of X_steps.
inline PrefixEstimate estimate_prefix(const FreeProduct& G, const StepDistribution& mu, std::size_t steps,
                                      std::size_t reps, std::uint64_t seed, std::size_t prefix_len,
                                      std::size_t threads = 0) {
  if (prefix_len < 1) throw Error(ErrorCode::InvalidArgument, "prefix length must be >= 1");
  detail::require_reps(reps, steps);
  std::vector<std::optional<Word>> prefix(reps);
  detail::parallel_for(
      reps,
      [&](std::size_t i) {
        auto t = simulate(G, mu, steps, seed, std::nullopt, i, false);
        if (t.final.size() < prefix_len) return;
        auto l = t.final.letters();
        prefix[i] = Word(normal_form, {l.begin(), l.begin() + static_cast<std::ptrdiff_t>(prefix_len)});
      },
      threads);
  PrefixEstimate est;
  for (auto& p : prefix) {
    if (!p) {
      ++est.dropped;
      continue;
    }
    ++est.counts[*p];
    ++est.used;
  }
  return est;
}

struct Convolution {
  int n = 0;
  std::map<Word, double> law;
  double expected_length = 0.0;
  /// -sum p log p.
  double entropy = 0.0;
  double mass = 0.0;
};

namespace detail {

inline void finish(Convolution& c) {
  c.expected_length = c.entropy = c.mass = 0.0;
  for (const auto& [w, p] : c.law) {
    c.mass += p;
    c.expected_length += p * static_cast<double>(w.size());
    if (p > 0.0) c.entropy -= p * std::log(p);
  }
}

inline void push_forward(const FreeProduct& G, const StepDistribution& mu, Convolution& c, std::size_t budget) {
  std::map<Word, double> next;
  const auto support = mu.support();
  for (const auto& [w, p] : c.law) {
    for (LetterId a : support) {
      std::vector<LetterId> letters(w.letters().begin(), w.letters().end());
      multiply_right(G, letters, a);
      next[Word(normal_form, std::move(letters))] += p * mu[a];
    }
    if (next.size() > budget)
      throw Error(ErrorCode::BudgetExceeded, "convolution support exceeds " + std::to_string(budget) + " words");
  }
  c.law = std::move(next);
  ++c.n;
  finish(c);
}

}  // namespace detail

/// Exact law of X_n.
inline Convolution exact_convolution(const FreeProduct& G, const StepDistribution& mu, int n,
                                     std::size_t budget = 10'000'000) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "n must be >= 0");
  Convolution c;
  c.law[Word{}] = 1.0;
  detail::finish(c);
  for (int k = 0; k < n; ++k) detail::push_forward(G, mu, c, budget);
  return c;
}

struct ConvolutionStats {
  double expected_length = 0.0;
  double entropy = 0.0;
  double mass = 0.0;
};

/// (E|X_n|, H(mu^{*n}), mass) for n = 0..n_max, computed in one pass.
inline std::vector<ConvolutionStats> convolution_series(const FreeProduct& G, const StepDistribution& mu, int n_max,
                                                        std::size_t budget = 10'000'000) {
  if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "n must be >= 0");
  Convolution c;
  c.law[Word{}] = 1.0;
  detail::finish(c);
  std::vector<ConvolutionStats> out{{c.expected_length, c.entropy, c.mass}};
  for (int k = 0; k < n_max; ++k) {
    detail::push_forward(G, mu, c, budget);
    out.push_back({c.expected_length, c.entropy, c.mass});
  }
  return out;
}

}  // namespace freewalk
