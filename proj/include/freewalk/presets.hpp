#pragma once

// Named measure families. Factor 0 is written a, factor 1 is b (and c for a
// third factor); element g of a cyclic factor is the power a^g.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "freewalk/error.hpp"
#include "freewalk/group.hpp"
#include "freewalk/metrics.hpp"
#include "freewalk/walk.hpp"

namespace freewalk {

struct Walk {
  FreeProduct G;
  StepDistribution mu;
};

struct FamilyParams {
  std::map<std::string, double> scalars;
  std::vector<int> orders;
  std::vector<double> weights;

  double get(const std::string& key) const {
    auto it = scalars.find(key);
    if (it == scalars.end()) throw Error(ErrorCode::SpecParse, "missing parameter '" + key + "'");
    return it->second;
  }
  int get_int(const std::string& key) const {
    double v = get(key);
    if (v != std::floor(v)) throw Error(ErrorCode::SpecParse, "parameter '" + key + "' must be an integer");
    return static_cast<int>(v);
  }
};

inline FreeProduct cyclic_product(const std::vector<int>& orders) {
  if (orders.size() < 2) throw Error(ErrorCode::InvalidGroup, "a free product needs at least two factors");
  std::vector<FiniteGroup> f;
  for (int k : orders) f.push_back(make_cyclic(k));
  return FreeProduct(std::move(f));
}

/// {g, g^-1} for the generator g = 1 of each cyclic factor.
inline std::vector<LetterId> minimal_generators(const FreeProduct& G) {
  std::vector<LetterId> S;
  for (std::size_t i = 0; i < G.num_factors(); ++i) {
    if (!G.factor(i).cyclic_order())
      throw Error(ErrorCode::InvalidArgument, "minimal generators are only defined for cyclic factors");
    const LetterId g = G.id({i, 1});
    S.push_back(g);
    if (G.inverse(g) != g) S.push_back(G.inverse(g));
  }
  return S;
}

/// Uniform law on minimal_generators(G).
inline StepDistribution simple_walk(const FreeProduct& G) {
  const auto S = minimal_generators(G);
  std::vector<double> w(G.alphabet_size(), 0.0);
  for (LetterId a : S) w[a] = 1.0 / static_cast<double>(S.size());
  return StepDistribution::from_weights(G, std::move(w));
}

inline const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names{"zkzk-simple", "hecke-simple", "z2z3",      "z3z3-sym",  "z3z3-asym",
                                              "z2z2z2",      "uniform",      "uniform-per-factor", "extremal"};
  return names;
}

namespace detail {

inline void require_keys(const std::string& family, const FamilyParams& p, std::vector<std::string> keys,
                         bool orders = false, bool weights = false) {
  for (const auto& [k, v] : p.scalars)
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw Error(ErrorCode::SpecParse, "family '" + family + "' has no parameter '" + k + "'");
  if (!orders && !p.orders.empty()) throw Error(ErrorCode::SpecParse, "family '" + family + "' takes no orders");
  if (!weights && !p.weights.empty()) throw Error(ErrorCode::SpecParse, "family '" + family + "' takes no weights");
  if (orders && p.orders.empty()) throw Error(ErrorCode::SpecParse, "family '" + family + "' needs orders");
}

inline Walk by_letters(FreeProduct G, const std::map<Letter, double>& m) {
  auto mu = StepDistribution::from_letters(G, m);
  return {std::move(G), std::move(mu)};
}

}  // namespace detail

inline Walk make_family(const std::string& name, const FamilyParams& p) {
  if (name == "zkzk-simple") {
    detail::require_keys(name, p, {"k"});
    int k = p.get_int("k");
    auto G = cyclic_product({k, k});
    auto mu = simple_walk(G);
    return {std::move(G), std::move(mu)};
  }
  if (name == "hecke-simple") {
    detail::require_keys(name, p, {"k"});
    int k = p.get_int("k");
    auto G = cyclic_product({2, k});
    auto mu = simple_walk(G);
    return {std::move(G), std::move(mu)};
  }
  if (name == "z2z3") {
    detail::require_keys(name, p, {"p", "q"});
    const double b = p.get("p"), b2 = p.get("q");
    return detail::by_letters(cyclic_product({2, 3}), {{{0, 1}, 1.0 - b - b2}, {{1, 1}, b}, {{1, 2}, b2}});
  }
  if (name == "z3z3-sym") {
    detail::require_keys(name, p, {"p"});
    const double x = p.get("p");
    return detail::by_letters(cyclic_product({3, 3}),
                              {{{0, 1}, x}, {{1, 1}, x}, {{0, 2}, 0.5 - x}, {{1, 2}, 0.5 - x}});
  }
  if (name == "z3z3-asym") {
    detail::require_keys(name, p, {"p", "q"});
    const double x = p.get("p"), y = p.get("q"), rest = (1.0 - x - y) / 2.0;
    return detail::by_letters(cyclic_product({3, 3}), {{{0, 1}, x}, {{0, 2}, y}, {{1, 1}, rest}, {{1, 2}, rest}});
  }
  if (name == "z2z2z2") {
    detail::require_keys(name, p, {"p"});
    const double x = p.get("p");
    return detail::by_letters(cyclic_product({2, 2, 2}), {{{0, 1}, x}, {{1, 1}, x}, {{2, 1}, 1.0 - 2.0 * x}});
  }
  if (name == "uniform") {
    detail::require_keys(name, p, {}, true);
    auto G = cyclic_product(p.orders);
    auto mu = StepDistribution::uniform(G);
    return {std::move(G), std::move(mu)};
  }
  if (name == "uniform-per-factor") {
    detail::require_keys(name, p, {}, true, true);
    if (p.weights.size() != p.orders.size())
      throw Error(ErrorCode::SpecParse, "uniform-per-factor needs one weight per factor");
    auto G = cyclic_product(p.orders);
    std::vector<double> w(G.alphabet_size());
    for (LetterId a = 0; a < w.size(); ++a) {
      const std::size_t i = G.factor_of(a);
      w[a] = p.weights[i] / static_cast<double>(G.factor_letters(i).size());
    }
    auto mu = StepDistribution::from_weights(G, std::move(w));
    return {std::move(G), std::move(mu)};
  }
  if (name == "extremal") {
    detail::require_keys(name, p, {}, true);
    auto G = cyclic_product(p.orders);
    auto mu = extremal_measure(G);
    return {std::move(G), std::move(mu)};
  }
  throw Error(ErrorCode::SpecParse, "unknown family '" + name + "'");
}

}  // namespace freewalk
