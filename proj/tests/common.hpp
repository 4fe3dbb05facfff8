#pragma once

#include <vector>

#include "freewalk/group.hpp"
#include "freewalk/presets.hpp"
#include "freewalk/rng.hpp"
#include "freewalk/walk.hpp"

namespace fwtest {

using namespace freewalk;

inline const std::vector<std::vector<int>>& s3_table() {
  static const std::vector<std::vector<int>> t{{0, 1, 2, 3, 4, 5}, {1, 2, 0, 4, 5, 3}, {2, 0, 1, 5, 3, 4},
                                               {3, 5, 4, 0, 2, 1}, {4, 3, 5, 1, 0, 2}, {5, 4, 3, 2, 1, 0}};
  return t;
}

inline std::vector<FreeProduct> small_products() {
  return {cyclic_product({2, 3}), cyclic_product({3, 3}), cyclic_product({2, 4}), cyclic_product({4, 4}),
          cyclic_product({2, 2, 2}), cyclic_product({2, 3, 5}),
          FreeProduct({make_finite_group(s3_table()), make_cyclic(2)})};
}

/// Random law with every letter charged, so every factor is generated.
inline StepDistribution random_measure(const FreeProduct& G, CounterRng& rng) {
  std::vector<double> w(G.alphabet_size());
  double t = 0.0;
  for (double& x : w) t += (x = 0.05 + rng.uniform());
  for (double& x : w) x /= t;
  return StepDistribution::from_weights(G, w);
}

inline Word random_word(const FreeProduct& G, CounterRng& rng, std::size_t len) {
  std::vector<LetterId> w;
  while (w.size() < len) {
    LetterId a = rng.next() % G.alphabet_size();
    if (!w.empty() && G.same_factor(w.back(), a)) continue;
    w.push_back(a);
  }
  return Word(normal_form, std::move(w));
}

}  // namespace fwtest
