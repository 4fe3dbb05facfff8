#pragma once

// Finite groups given by multiplication tables, their free product, and
// normal-form words.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "freewalk/error.hpp"

namespace freewalk {

using LetterId = std::size_t;

class FiniteGroup;
FiniteGroup make_cyclic(int k);
FiniteGroup make_finite_group(const std::vector<std::vector<int>>& table);

/// A finite group on the elements {0, ..., order-1}; element 0 is the identity.
class FiniteGroup {
 public:
  static constexpr int kIdentity = 0;

  int order() const noexcept { return order_; }
  int mul(int g, int h) const { return table_[static_cast<std::size_t>(g * order_ + h)]; }
  int inv(int g) const { return inv_[static_cast<std::size_t>(g)]; }

  /// Set when built by make_cyclic; used for naming and serialization.
  std::optional<int> cyclic_order() const noexcept { return cyclic_; }

  std::vector<std::vector<int>> table() const {
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(order_));
    for (int g = 0; g < order_; ++g)
      for (int h = 0; h < order_; ++h) rows[static_cast<std::size_t>(g)].push_back(mul(g, h));
    return rows;
  }

  /// Elements of the subgroup generated by `gens`, sorted.
  std::vector<int> closure(std::span<const int> gens) const {
    std::vector<char> seen(static_cast<std::size_t>(order_), 0);
    std::vector<int> frontier{kIdentity};
    seen[0] = 1;
    while (!frontier.empty()) {
      int x = frontier.back();
      frontier.pop_back();
      for (int s : gens) {
        int y = mul(x, s);
        if (!seen[static_cast<std::size_t>(y)]) {
          seen[static_cast<std::size_t>(y)] = 1;
          frontier.push_back(y);
        }
      }
    }
    std::vector<int> out;
    for (int g = 0; g < order_; ++g)
      if (seen[static_cast<std::size_t>(g)]) out.push_back(g);
    return out;
  }

  bool generates(std::span<const int> gens) const {
    return closure(gens).size() == static_cast<std::size_t>(order_);
  }

  std::string name() const {
    if (cyclic_) return "Z/" + std::to_string(*cyclic_);
    return "G" + std::to_string(order_);
  }

  friend bool operator==(const FiniteGroup& a, const FiniteGroup& b) {
    return a.order_ == b.order_ && a.table_ == b.table_;
  }

 private:
  FiniteGroup(int order, std::vector<int> table, std::optional<int> cyclic)
      : order_(order), table_(std::move(table)), inv_(static_cast<std::size_t>(order)), cyclic_(cyclic) {
    for (int g = 0; g < order_; ++g)
      for (int h = 0; h < order_; ++h)
        if (mul(g, h) == kIdentity) inv_[static_cast<std::size_t>(g)] = h;
  }

  int order_;
  std::vector<int> table_;
  std::vector<int> inv_;
  std::optional<int> cyclic_;

  friend FiniteGroup make_cyclic(int k);
  friend FiniteGroup make_finite_group(const std::vector<std::vector<int>>& table);
};

inline FiniteGroup make_cyclic(int k) {
  if (k < 2) throw Error(ErrorCode::InvalidGroup, "cyclic group order must be >= 2, got " + std::to_string(k));
  std::vector<int> table(static_cast<std::size_t>(k * k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) table[static_cast<std::size_t>(i * k + j)] = (i + j) % k;
  return FiniteGroup(k, std::move(table), k);
}

/// Validates a multiplication table exhaustively: shape, identity at 0,
/// two-sided inverses, associativity (first failing triple is reported).
inline FiniteGroup make_finite_group(const std::vector<std::vector<int>>& table) {
  const int m = static_cast<int>(table.size());
  if (m < 2) throw Error(ErrorCode::InvalidGroup, "group order must be >= 2");
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(m * m));
  for (int g = 0; g < m; ++g) {
    const auto& row = table[static_cast<std::size_t>(g)];
    if (static_cast<int>(row.size()) != m)
      throw Error(ErrorCode::InvalidGroup, "table is not square (row " + std::to_string(g) + ")");
    for (int x : row) {
      if (x < 0 || x >= m)
        throw Error(ErrorCode::InvalidGroup, "entry " + std::to_string(x) + " out of range in row " + std::to_string(g));
      flat.push_back(x);
    }
  }
  auto at = [&](int g, int h) { return flat[static_cast<std::size_t>(g * m + h)]; };
  for (int g = 0; g < m; ++g)
    if (at(0, g) != g || at(g, 0) != g)
      throw Error(ErrorCode::InvalidGroup, "element 0 is not a two-sided identity (fails at " + std::to_string(g) + ")");
  for (int g = 0; g < m; ++g) {
    bool found = false;
    for (int h = 0; h < m && !found; ++h) found = at(g, h) == 0 && at(h, g) == 0;
    if (!found) throw Error(ErrorCode::InvalidGroup, "element " + std::to_string(g) + " has no inverse");
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        if (at(at(a, b), c) != at(a, at(b, c)))
          throw Error(ErrorCode::InvalidGroup, "associativity fails: (a*b)*c != a*(b*c) for (a,b,c)=(" +
                                                   std::to_string(a) + "," + std::to_string(b) + "," +
                                                   std::to_string(c) + ")");
  return FiniteGroup(m, std::move(flat), std::nullopt);
}

/// Nonidentity element `element` of factor `factor`.
struct Letter {
  std::size_t factor = 0;
  int element = 1;

  auto operator<=>(const Letter&) const = default;
};

inline std::string to_string(const Letter& l) {
  return std::to_string(l.factor) + ":" + std::to_string(l.element);
}

/// Parses "i:g".
inline Letter parse_letter(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size())
    throw Error(ErrorCode::SpecParse, "letter must look like \"factor:element\", got \"" + std::string(text) + "\"");
  auto parse_int = [&](std::string_view s) {
    long long v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw Error(ErrorCode::SpecParse, "bad letter \"" + std::string(text) + "\"");
      v = v * 10 + (c - '0');
      if (v > 1'000'000'000) throw Error(ErrorCode::SpecParse, "bad letter \"" + std::string(text) + "\"");
    }
    return v;
  };
  return Letter{static_cast<std::size_t>(parse_int(text.substr(0, colon))),
                static_cast<int>(parse_int(text.substr(colon + 1)))};
}

/// Free product of at least two finite groups. Letters of factor i occupy a
/// contiguous block of ids, ordered by element index.
class FreeProduct {
 public:
  static constexpr std::int32_t kIdentityProduct = -1;
  static constexpr std::int32_t kCrossFactor = -2;

  explicit FreeProduct(std::vector<FiniteGroup> factors) : factors_(std::move(factors)) {
    if (factors_.size() < 2) throw Error(ErrorCode::InvalidGroup, "a free product needs at least two factors");
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      std::vector<LetterId> ids;
      for (int g = 1; g < factors_[i].order(); ++g) {
        ids.push_back(alphabet_.size());
        alphabet_.push_back(Letter{i, g});
        factor_of_.push_back(i);
      }
      block_.push_back(std::move(ids));
    }
    const std::size_t n = alphabet_.size();
    inverse_.resize(n);
    product_.assign(n * n, kCrossFactor);
    for (LetterId a = 0; a < n; ++a) {
      const auto& [i, g] = alphabet_[a];
      const auto& grp = factors_[i];
      inverse_[a] = id(Letter{i, grp.inv(g)});
      for (LetterId b : block_[i]) {
        int gh = grp.mul(g, alphabet_[b].element);
        product_[a * n + b] = gh == FiniteGroup::kIdentity ? kIdentityProduct
                                                           : static_cast<std::int32_t>(block_[i][static_cast<std::size_t>(gh - 1)]);
      }
    }
  }

  std::size_t num_factors() const noexcept { return factors_.size(); }
  const FiniteGroup& factor(std::size_t i) const { return factors_.at(i); }
  const std::vector<FiniteGroup>& factors() const noexcept { return factors_; }

  std::size_t alphabet_size() const noexcept { return alphabet_.size(); }
  const std::vector<Letter>& alphabet() const noexcept { return alphabet_; }
  const Letter& letter(LetterId a) const { return alphabet_.at(a); }

  LetterId id(const Letter& l) const {
    if (l.factor >= factors_.size() || l.element <= 0 || l.element >= factors_[l.factor].order())
      throw Error(ErrorCode::InvalidArgument, "no such letter " + to_string(l));
    return block_[l.factor][static_cast<std::size_t>(l.element - 1)];
  }

  std::size_t factor_of(LetterId a) const { return factor_of_[a]; }
  LetterId inverse(LetterId a) const { return inverse_[a]; }
  bool same_factor(LetterId a, LetterId b) const { return factor_of_[a] == factor_of_[b]; }

  /// Sigma_i: ids of the nonidentity elements of factor i.
  std::span<const LetterId> factor_letters(std::size_t i) const { return block_.at(i); }

  /// Product of two letters of the same factor; nullopt when it is the identity.
  std::optional<LetterId> multiply(LetterId a, LetterId b) const {
    std::int32_t p = product_[a * alphabet_.size() + b];
    if (p == kCrossFactor) throw Error(ErrorCode::InvalidArgument, "letters belong to different factors");
    if (p == kIdentityProduct) return std::nullopt;
    return static_cast<LetterId>(p);
  }

  /// True when every factor has order 2 and there are exactly two factors.
  bool is_infinite_dihedral() const {
    return factors_.size() == 2 && factors_[0].order() == 2 && factors_[1].order() == 2;
  }

  std::string describe() const {
    std::string s;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (i) s += " * ";
      s += factors_[i].name();
    }
    return s;
  }

 private:
  std::vector<FiniteGroup> factors_;
  std::vector<Letter> alphabet_;
  std::vector<std::size_t> factor_of_;
  std::vector<std::vector<LetterId>> block_;
  std::vector<LetterId> inverse_;
  std::vector<std::int32_t> product_;
};

struct normal_form_t {
  explicit normal_form_t() = default;
};
/// Tag for constructing a Word from letters already known to be in normal form.
inline constexpr normal_form_t normal_form{};

/// Element of a free product as a normal-form word; the empty word is the unit.
class Word {
 public:
  Word() = default;
  Word(normal_form_t, std::vector<LetterId> letters) : letters_(std::move(letters)) {}

  /// Checks the alternating-factor condition.
  static Word from_letters(const FreeProduct& G, std::vector<LetterId> letters) {
    for (std::size_t i = 0; i < letters.size(); ++i) {
      if (letters[i] >= G.alphabet_size()) throw Error(ErrorCode::InvalidArgument, "letter id out of range");
      if (i > 0 && G.same_factor(letters[i - 1], letters[i]))
        throw Error(ErrorCode::InvalidArgument, "word is not in normal form at position " + std::to_string(i));
    }
    return Word(normal_form, std::move(letters));
  }

  static Word from_letters(const FreeProduct& G, std::span<const Letter> letters) {
    std::vector<LetterId> ids;
    for (const auto& l : letters) ids.push_back(G.id(l));
    return from_letters(G, std::move(ids));
  }

  std::span<const LetterId> letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  LetterId operator[](std::size_t i) const { return letters_[i]; }
  LetterId front() const { return letters_.front(); }
  LetterId back() const { return letters_.back(); }

  auto operator<=>(const Word&) const = default;

 private:
  std::vector<LetterId> letters_;
};

inline std::string to_string(const FreeProduct& G, const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ",";
    s += to_string(G.letter(w[i]));
  }
  return s;
}

/// Parses a comma- or space-separated letter list; "1" or "" is the unit.
inline Word parse_word(const FreeProduct& G, std::string_view text) {
  std::vector<LetterId> ids;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find_first_of(", ", pos);
    if (end == std::string_view::npos) end = text.size();
    auto tok = text.substr(pos, end - pos);
    if (!tok.empty() && tok != "1") ids.push_back(G.id(parse_letter(tok)));
    pos = end + 1;
  }
  return Word::from_letters(G, std::move(ids));
}

/// Right-multiplies `letters` (normal form) by the letter `a` in place and
/// returns the change in letter count: +1 append, 0 merge, -1 cancel.
inline int multiply_right(const FreeProduct& G, std::vector<LetterId>& letters, LetterId a) {
  if (letters.empty() || !G.same_factor(letters.back(), a)) {
    letters.push_back(a);
    return 1;
  }
  auto m = G.multiply(letters.back(), a);
  if (m) {
    letters.back() = *m;
    return 0;
  }
  letters.pop_back();
  return -1;
}

/// Group law on normal forms: concatenation with simplification at the
/// contact point, cascading while inverse pairs meet.
inline Word concat_normalize(const FreeProduct& G, const Word& w1, const Word& w2) {
  std::vector<LetterId> out(w1.letters().begin(), w1.letters().end());
  std::size_t j = 0;
  while (j < w2.size() && !out.empty() && G.same_factor(out.back(), w2[j])) {
    auto m = G.multiply(out.back(), w2[j]);
    out.pop_back();
    ++j;
    if (m) {
      out.push_back(*m);
      break;
    }
  }
  out.insert(out.end(), w2.letters().begin() + static_cast<std::ptrdiff_t>(j), w2.letters().end());
  return Word(normal_form, std::move(out));
}

inline Word inverse(const FreeProduct& G, const Word& w) {
  std::vector<LetterId> out;
  out.reserve(w.size());
  for (std::size_t i = w.size(); i-- > 0;) out.push_back(G.inverse(w[i]));
  return Word(normal_form, std::move(out));
}

struct LeftMulResult {
  Word word;
  int length_delta = 0;
};

/// a * w, with the change in letter count (+1 prepend, 0 merge, -1 cancel).
inline LeftMulResult left_mul_letter(const FreeProduct& G, LetterId a, const Word& w) {
  auto letters = w.letters();
  if (w.empty() || !G.same_factor(a, letters.front())) {
    std::vector<LetterId> out{a};
    out.insert(out.end(), letters.begin(), letters.end());
    return {Word(normal_form, std::move(out)), 1};
  }
  std::vector<LetterId> out(letters.begin(), letters.end());
  if (auto m = G.multiply(a, letters.front())) {
    out.front() = *m;
    return {Word(normal_form, std::move(out)), 0};
  }
  out.erase(out.begin());
  return {Word(normal_form, std::move(out)), -1};
}

/// Per-letter geodesic length |u|_S for a generating set S contained in Sigma.
class LengthTable {
 public:
  LengthTable() = default;
  explicit LengthTable(std::vector<int> weights) : weights_(std::move(weights)) {}

  static LengthTable natural(const FreeProduct& G) {
    return LengthTable(std::vector<int>(G.alphabet_size(), 1));
  }

  int operator[](LetterId a) const { return weights_[a]; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const int> weights() const noexcept { return weights_; }
  int max_weight() const { return weights_.empty() ? 0 : *std::max_element(weights_.begin(), weights_.end()); }
  bool is_natural() const {
    return std::all_of(weights_.begin(), weights_.end(), [](int w) { return w == 1; });
  }

  long long length(const Word& w) const {
    long long s = 0;
    for (LetterId a : w.letters()) s += weights_[a];
    return s;
  }

  friend bool operator==(const LengthTable&, const LengthTable&) = default;

 private:
  std::vector<int> weights_;
};

/// Geodesic length of every letter with respect to S. A geodesic for an
/// element of G_i never leaves G_i, so each factor is handled by a BFS over
/// its own Cayley graph with generators S cap G_i.
inline LengthTable letter_lengths(const FreeProduct& G, std::span<const LetterId> S) {
  std::set<LetterId> members(S.begin(), S.end());
  for (LetterId s : members) {
    if (s >= G.alphabet_size()) throw Error(ErrorCode::InvalidArgument, "generator id out of range");
    if (!members.count(G.inverse(s)))
      throw Error(ErrorCode::InvalidArgument, "generating set must be closed under inverses (missing inverse of " +
                                                  to_string(G.letter(s)) + ")");
  }
  std::vector<int> weights(G.alphabet_size(), 0);
  for (std::size_t i = 0; i < G.num_factors(); ++i) {
    const auto& grp = G.factor(i);
    std::vector<int> gens;
    for (LetterId s : members)
      if (G.factor_of(s) == i) gens.push_back(G.letter(s).element);
    std::vector<int> dist(static_cast<std::size_t>(grp.order()), -1);
    std::deque<int> queue{FiniteGroup::kIdentity};
    dist[0] = 0;
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      for (int g : gens) {
        int y = grp.mul(x, g);
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
          queue.push_back(y);
        }
      }
    }
    for (LetterId a : G.factor_letters(i)) {
      int d = dist[static_cast<std::size_t>(G.letter(a).element)];
      if (d < 0) throw Error(ErrorCode::NonGenerating, "generators do not generate factor " + std::to_string(i), i);
      weights[a] = d;
    }
  }
  return LengthTable(std::move(weights));
}

inline std::vector<LetterId> all_letters(const FreeProduct& G) {
  std::vector<LetterId> ids(G.alphabet_size());
  for (LetterId a = 0; a < ids.size(); ++a) ids[a] = a;
  return ids;
}

/// Sphere sizes #{g : |g|_S = m} for m = 0..n, counted exactly over normal
/// forms (|g|_S is the sum of the letter weights of the normal form).
inline std::vector<std::uint64_t> ball_count(const FreeProduct& G, const LengthTable& lengths, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "radius must be >= 0");
  const std::size_t k = G.num_factors();
  const int wmax = lengths.max_weight();
  // by_weight[i][w]: letters of factor i with weight w
  std::vector<std::vector<std::uint64_t>> by_weight(k, std::vector<std::uint64_t>(static_cast<std::size_t>(wmax + 1), 0));
  for (LetterId a = 0; a < G.alphabet_size(); ++a) ++by_weight[G.factor_of(a)][static_cast<std::size_t>(lengths[a])];
  // ending[m][i]: words of weighted length m whose last letter lies in factor i
  std::vector<std::vector<std::uint64_t>> ending(static_cast<std::size_t>(n + 1), std::vector<std::uint64_t>(k, 0));
  std::vector<std::uint64_t> spheres(static_cast<std::size_t>(n + 1), 0);
  spheres[0] = 1;
  auto add = [](std::uint64_t a, std::uint64_t b) {
    std::uint64_t s;
    if (__builtin_add_overflow(a, b, &s)) throw Error(ErrorCode::BudgetExceeded, "sphere count overflows 64 bits");
    return s;
  };
  auto mul = [](std::uint64_t a, std::uint64_t b) {
    std::uint64_t p;
    if (__builtin_mul_overflow(a, b, &p)) throw Error(ErrorCode::BudgetExceeded, "sphere count overflows 64 bits");
    return p;
  };
  for (int m = 1; m <= n; ++m) {
    for (std::size_t i = 0; i < k; ++i) {
      std::uint64_t total = 0;
      for (int w = 1; w <= wmax && w <= m; ++w) {
        std::uint64_t c = by_weight[i][static_cast<std::size_t>(w)];
        if (!c) continue;
        std::uint64_t prefixes = (m == w) ? 1 : 0;
        for (std::size_t j = 0; j < k; ++j)
          if (j != i) prefixes = add(prefixes, ending[static_cast<std::size_t>(m - w)][j]);
        total = add(total, mul(c, prefixes));
      }
      ending[static_cast<std::size_t>(m)][i] = total;
      spheres[static_cast<std::size_t>(m)] = add(spheres[static_cast<std::size_t>(m)], total);
    }
  }
  return spheres;
}

/// Breadth-first search of the Cayley graph with generators S, for radius n.
/// Exhaustive; throws BudgetExceeded past `budget` visited elements.
inline std::vector<std::uint64_t> enumerate_ball(const FreeProduct& G, std::span<const LetterId> S, int n,
                                                 std::size_t budget = 1'000'000) {
  std::set<std::vector<LetterId>> seen{{}};
  std::vector<std::vector<LetterId>> frontier{{}};
  std::vector<std::uint64_t> spheres{1};
  for (int m = 1; m <= n; ++m) {
    std::vector<std::vector<LetterId>> next;
    for (const auto& w : frontier) {
      for (LetterId s : S) {
        auto x = w;
        multiply_right(G, x, s);
        if (seen.insert(x).second) {
          if (seen.size() > budget)
            throw Error(ErrorCode::BudgetExceeded, "ball enumeration exceeded " + std::to_string(budget) + " states");
          next.push_back(std::move(x));
        }
      }
    }
    spheres.push_back(next.size());
    frontier = std::move(next);
  }
  return spheres;
}

}  // namespace freewalk
