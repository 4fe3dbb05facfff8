#pragma once

#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "freewalk/error.hpp"
#include "freewalk/group.hpp"

namespace freewalk {

/// Real vector indexed by letters. The tag keeps hitting probabilities and
/// boundary marginals from being mixed up.
template <class Tag>
class LetterVector {
 public:
  LetterVector() = default;
  explicit LetterVector(std::vector<double> values) : values_(std::move(values)) {}
  explicit LetterVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}

  double operator[](LetterId a) const { return values_[a]; }
  double& operator[](LetterId a) { return values_[a]; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  double sum(std::span<const LetterId> ids) const {
    double s = 0.0;
    for (LetterId a : ids) s += values_[a];
    return s;
  }
  double total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

  friend bool operator==(const LetterVector&, const LetterVector&) = default;

 private:
  std::vector<double> values_;
};

/// q(a): probability that the walk started at 1 ever visits a.
using HittingVector = LetterVector<struct HittingTag>;
/// r(a): first-letter marginal of the harmonic measure.
using RootVector = LetterVector<struct RootTag>;

/// x(Sigma_i) for every factor i.
template <class Tag>
std::vector<double> factor_sums(const FreeProduct& G, const LetterVector<Tag>& x) {
  std::vector<double> s(G.num_factors(), 0.0);
  for (LetterId a = 0; a < G.alphabet_size(); ++a) s[G.factor_of(a)] += x[a];
  return s;
}

/// Step law mu on the natural generators. Zero entries are allowed.
class StepDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  StepDistribution() = default;

  static StepDistribution from_weights(const FreeProduct& G, std::vector<double> prob) {
    if (prob.size() != G.alphabet_size())
      throw Error(ErrorCode::InvalidMeasure, "expected " + std::to_string(G.alphabet_size()) + " probabilities, got " +
                                                 std::to_string(prob.size()));
    double total = 0.0;
    for (LetterId a = 0; a < prob.size(); ++a) {
      if (!std::isfinite(prob[a]) || prob[a] < 0.0 || prob[a] > 1.0)
        throw Error(ErrorCode::InvalidMeasure,
                    "probability of " + to_string(G.letter(a)) + " is outside [0,1]: " + std::to_string(prob[a]));
      total += prob[a];
    }
    if (std::abs(total - 1.0) > kSumTolerance)
      throw Error(ErrorCode::InvalidMeasure, "probabilities sum to " + std::to_string(total) + ", not 1");
    return StepDistribution(std::move(prob));
  }

  static StepDistribution from_letters(const FreeProduct& G, const std::map<Letter, double>& masses) {
    std::vector<double> prob(G.alphabet_size(), 0.0);
    for (const auto& [l, p] : masses) prob[G.id(l)] += p;
    return from_weights(G, std::move(prob));
  }

  static StepDistribution uniform(const FreeProduct& G) {
    return StepDistribution(std::vector<double>(G.alphabet_size(), 1.0 / static_cast<double>(G.alphabet_size())));
  }

  double operator[](LetterId a) const { return prob_[a]; }
  std::size_t size() const noexcept { return prob_.size(); }
  std::span<const double> values() const noexcept { return prob_; }

  std::vector<LetterId> support() const {
    std::vector<LetterId> s;
    for (LetterId a = 0; a < prob_.size(); ++a)
      if (prob_[a] > 0.0) s.push_back(a);
    return s;
  }

  bool is_symmetric(const FreeProduct& G, double tol = 1e-15) const {
    for (LetterId a = 0; a < prob_.size(); ++a)
      if (std::abs(prob_[a] - prob_[G.inverse(a)]) > tol) return false;
    return true;
  }

 private:
  explicit StepDistribution(std::vector<double> prob) : prob_(std::move(prob)) {}
  std::vector<double> prob_;
};

/// Transience and irreducibility check: G must not be Z/2 * Z/2, and supp mu
/// cap Sigma_i must generate G_i for every factor.
inline void validate_walk(const FreeProduct& G, const StepDistribution& mu) {
  if (mu.size() != G.alphabet_size()) throw Error(ErrorCode::InvalidMeasure, "measure does not match the alphabet");
  if (G.is_infinite_dihedral())
    throw Error(ErrorCode::RecurrentGroup, "Z/2 * Z/2 is amenable; every nearest-neighbor walk on it is recurrent");
  for (std::size_t i = 0; i < G.num_factors(); ++i) {
    std::vector<int> gens;
    for (LetterId a : G.factor_letters(i))
      if (mu[a] > 0.0) gens.push_back(G.letter(a).element);
    if (!G.factor(i).generates(gens))
      throw Error(ErrorCode::NonGenerating, "support of mu does not generate factor " + std::to_string(i), i);
  }
}

}  // namespace freewalk
