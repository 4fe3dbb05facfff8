#pragma once

// JSON walk specs and the key = value report format.
//
//   {
//     "factors": [{"cyclic": 2}, {"table": [[0,1,2],[1,2,0],[2,0,1]]}],
//     "measure": {"0:1": 0.5, "1:1": 0.25, "1:2": 0.25},
//     "generators": "natural",            // or "minimal", "support", ["0:1", ...]
//     "solver": {"tol": 1e-13, "max_iter": 1000000},
//     "seed": 1
//   }
//
// Instead of "factors"/"measure" a spec may name a family:
//   {"family": "z2z3", "params": {"p": 0.3, "q": 0.1}}
// with "orders" and "weights" arrays in params where the family needs them.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "freewalk/error.hpp"
#include "freewalk/group.hpp"
#include "freewalk/presets.hpp"
#include "freewalk/traffic.hpp"
#include "freewalk/walk.hpp"

namespace freewalk {

/// "%.17g": enough digits to round-trip every double.
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

enum class GeneratorKind { Natural, Minimal, Support, Explicit };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Natural;
  std::vector<Letter> letters;
};

struct WalkSpec {
  Walk walk;
  GeneratorSpec generators;
  SolverOptions solver;
  std::uint64_t seed = 1;
  /// Empty for explicit factor/measure specs.
  std::string family;
  FamilyParams params;
};

inline std::vector<LetterId> resolve_generators(const FreeProduct& G, const StepDistribution& mu,
                                                const GeneratorSpec& g) {
  switch (g.kind) {
    case GeneratorKind::Natural: return all_letters(G);
    case GeneratorKind::Minimal: return minimal_generators(G);
    case GeneratorKind::Support: return mu.support();
    case GeneratorKind::Explicit: {
      std::vector<LetterId> S;
      for (const auto& l : g.letters) S.push_back(G.id(l));
      return S;
    }
  }
  return {};
}

inline std::vector<LetterId> resolve_generators(const WalkSpec& s) {
  return resolve_generators(s.walk.G, s.walk.mu, s.generators);
}

namespace detail {

using nlohmann::json;

inline void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::SpecParse, where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) throw Error(ErrorCode::SpecParse, "unknown key '" + k + "' in " + where);
  }
}

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorCode::SpecParse, what + " must be a number");
  return j.get<double>();
}

inline FamilyParams parse_params(const json& j) {
  FamilyParams p;
  if (!j.is_object()) throw Error(ErrorCode::SpecParse, "params must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "orders") {
      if (!v.is_array()) throw Error(ErrorCode::SpecParse, "orders must be an array");
      for (const auto& x : v) {
        if (!x.is_number_integer()) throw Error(ErrorCode::SpecParse, "orders must be integers");
        p.orders.push_back(x.get<int>());
      }
    } else if (k == "weights") {
      if (!v.is_array()) throw Error(ErrorCode::SpecParse, "weights must be an array");
      for (const auto& x : v) p.weights.push_back(number(x, "weights entry"));
    } else {
      p.scalars[k] = number(v, "parameter '" + k + "'");
    }
  }
  return p;
}

inline FiniteGroup parse_factor(const json& j) {
  only_keys(j, {"cyclic", "table"}, "factor");
  if (j.contains("cyclic") == j.contains("table"))
    throw Error(ErrorCode::SpecParse, "factor needs exactly one of 'cyclic' or 'table'");
  if (j.contains("cyclic")) {
    if (!j["cyclic"].is_number_integer()) throw Error(ErrorCode::SpecParse, "cyclic order must be an integer");
    return make_cyclic(j["cyclic"].get<int>());
  }
  std::vector<std::vector<int>> table;
  try {
    table = j["table"].get<std::vector<std::vector<int>>>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::SpecParse, "table must be an array of integer rows");
  }
  return make_finite_group(table);
}

inline GeneratorSpec parse_generators(const json& j) {
  GeneratorSpec g;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "natural") g.kind = GeneratorKind::Natural;
    else if (s == "minimal") g.kind = GeneratorKind::Minimal;
    else if (s == "support") g.kind = GeneratorKind::Support;
    else throw Error(ErrorCode::SpecParse, "generators must be natural, minimal, support or a letter list");
    return g;
  }
  if (!j.is_array()) throw Error(ErrorCode::SpecParse, "generators must be a string or a list of letters");
  g.kind = GeneratorKind::Explicit;
  for (const auto& x : j) {
    if (!x.is_string()) throw Error(ErrorCode::SpecParse, "generator letters must be strings like \"0:1\"");
    g.letters.push_back(parse_letter(x.get<std::string>()));
  }
  return g;
}

}  // namespace detail

/// Builds the walk; validation errors from the group and measure propagate.
/// Solver settings absent from the spec are taken from `defaults`.
inline WalkSpec parse_walk_spec(const nlohmann::json& j, const SolverOptions& defaults = {}) {
  using detail::json;
  detail::only_keys(j, {"factors", "measure", "family", "params", "generators", "solver", "seed"}, "walk spec");
  const bool named = j.contains("family");
  if (named && (j.contains("factors") || j.contains("measure")))
    throw Error(ErrorCode::SpecParse, "give either family/params or factors/measure, not both");
  if (!named && !(j.contains("factors") && j.contains("measure")))
    throw Error(ErrorCode::SpecParse, "walk spec needs factors and measure, or a family");
  if (!named && j.contains("params")) throw Error(ErrorCode::SpecParse, "params only go with a family");

  std::optional<Walk> walk;
  std::string family;
  FamilyParams params;
  if (named) {
    if (!j["family"].is_string()) throw Error(ErrorCode::SpecParse, "family must be a string");
    family = j["family"].get<std::string>();
    if (j.contains("params")) params = detail::parse_params(j["params"]);
    walk = make_family(family, params);
  } else {
    if (!j["factors"].is_array()) throw Error(ErrorCode::SpecParse, "factors must be an array");
    std::vector<FiniteGroup> factors;
    for (const auto& f : j["factors"]) factors.push_back(detail::parse_factor(f));
    if (factors.size() < 2) throw Error(ErrorCode::InvalidGroup, "a free product needs at least two factors");
    FreeProduct G(std::move(factors));
    if (!j["measure"].is_object()) throw Error(ErrorCode::SpecParse, "measure must map letters to probabilities");
    std::map<Letter, double> m;
    for (const auto& [k, v] : j["measure"].items()) {
      Letter l = parse_letter(k);
      if (m.count(l)) throw Error(ErrorCode::SpecParse, "letter " + k + " given twice");
      m[l] = detail::number(v, "probability of " + k);
    }
    auto mu = StepDistribution::from_letters(G, m);
    walk = Walk{std::move(G), std::move(mu)};
  }

  WalkSpec spec{std::move(*walk), {}, defaults, 1, family, params};
  if (j.contains("generators")) spec.generators = detail::parse_generators(j["generators"]);
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    detail::only_keys(s, {"tol", "max_iter"}, "solver");
    if (s.contains("tol")) {
      spec.solver.tol = detail::number(s["tol"], "solver.tol");
      if (!(spec.solver.tol > 0.0)) throw Error(ErrorCode::SpecParse, "solver.tol must be positive");
    }
    if (s.contains("max_iter")) {
      if (!s["max_iter"].is_number_unsigned()) throw Error(ErrorCode::SpecParse, "solver.max_iter must be a positive integer");
      spec.solver.max_iter = s["max_iter"].get<std::size_t>();
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw Error(ErrorCode::SpecParse, "seed must be a nonnegative integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  return spec;
}

inline WalkSpec parse_walk_spec(const std::string& text, const SolverOptions& defaults = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SpecParse, e.what());
  }
  return parse_walk_spec(j, defaults);
}

inline WalkSpec parse_walk_spec(const char* text, const SolverOptions& defaults = {}) {
  return parse_walk_spec(std::string(text), defaults);
}

inline WalkSpec load_walk_spec(const std::string& path, const SolverOptions& defaults = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SpecParse, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_walk_spec(text, defaults);
}

/// Same spec with some family parameters replaced.
inline WalkSpec with_params(const WalkSpec& base, const std::map<std::string, double>& overrides) {
  if (base.family.empty()) throw Error(ErrorCode::SpecParse, "parameter overrides need a family spec");
  FamilyParams p = base.params;
  for (const auto& [k, v] : overrides) p.scalars[k] = v;
  WalkSpec s{make_family(base.family, p), base.generators, base.solver, base.seed, base.family, p};
  return s;
}

/// Writes "key = value" lines.
class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}

  Report& put(const std::string& key, double v) { return line(key, fmt(v)); }
  Report& put(const std::string& key, const std::string& v) { return line(key, v); }
  Report& put(const std::string& key, const char* v) { return line(key, v); }
  Report& put(const std::string& key, bool v) { return line(key, v ? "true" : "false"); }
  Report& put(const std::string& key, std::size_t v) { return line(key, std::to_string(v)); }

 private:
  Report& line(const std::string& key, const std::string& v) {
    out_ << key << " = " << v << '\n';
    return *this;
  }
  std::ostream& out_;
};

}  // namespace freewalk
