// freewalk: command-line front end.
//
// Exit codes: 0 ok, 1 verify found failing criteria, 2 usage error, and
// 3..13 for library errors (see freewalk/error.hpp).

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "freewalk/acceptance.hpp"
#include "freewalk/closed_form.hpp"
#include "freewalk/detail/parallel.hpp"
#include "freewalk/harmonic.hpp"
#include "freewalk/metrics.hpp"
#include "freewalk/presets.hpp"
#include "freewalk/simulation.hpp"
#include "freewalk/spec_io.hpp"
#include "freewalk/traffic.hpp"

using namespace freewalk;

namespace {

SolverOptions env_defaults() {
  SolverOptions o;
  if (const char* t = std::getenv("FREEWALK_TOL")) {
    char* end = nullptr;
    double v = std::strtod(t, &end);
    if (end == t || *end != '\0' || !(v > 0.0))
      throw Error(ErrorCode::InvalidArgument, std::string("FREEWALK_TOL is not a positive number: ") + t);
    o.tol = v;
  }
  return o;
}

/// Walk given either as a JSON file or through --family/--param flags.
struct SpecInput {
  std::string file;
  std::string family;
  std::vector<std::string> params;
  std::vector<int> orders;
  std::vector<double> weights;
  std::string generators;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("spec", file, "walk spec JSON file");
    cmd->add_option("--family", family, "named family instead of a spec file");
    cmd->add_option("--param", params, "family parameter name=value (repeatable)");
    cmd->add_option("--orders", orders, "cyclic factor orders for families that take them")->delimiter(',');
    cmd->add_option("--weights", weights, "factor weights for uniform-per-factor")->delimiter(',');
    cmd->add_option("--generators", generators, "natural, minimal, support, or a comma list of letters");
    cmd->add_option("--tol", tol, "solver tolerance");
    cmd->add_option("--seed", seed, "random seed");
  }

  /// `fallback` fills family parameters the input leaves out (sweep axes).
  WalkSpec load(const std::map<std::string, double>& fallback = {}) const {
    const SolverOptions defaults = env_defaults();
    WalkSpec spec = [&] {
      if (!file.empty()) {
        if (!family.empty()) throw Error(ErrorCode::SpecParse, "give a spec file or --family, not both");
        if (fallback.empty()) return load_walk_spec(file, defaults);
        std::ifstream f(file);
        if (!f) throw Error(ErrorCode::SpecParse, "cannot open " + file);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorCode::SpecParse, e.what());
        }
        if (j.is_object() && j.contains("family")) {
          if (!j.contains("params")) j["params"] = nlohmann::json::object();
          for (const auto& [k, v] : fallback)
            if (j["params"].is_object() && !j["params"].contains(k)) j["params"][k] = v;
        }
        return parse_walk_spec(j, defaults);
      }
      if (family.empty()) throw Error(ErrorCode::SpecParse, "no walk given: pass a spec file or --family");
      FamilyParams p{fallback, orders, weights};
      for (const auto& kv : params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::SpecParse, "--param wants name=value, got " + kv);
        p.scalars[kv.substr(0, eq)] = parse_number(kv.substr(eq + 1));
      }
      return WalkSpec{make_family(family, p), {}, defaults, 1, family, p};
    }();
    if (!generators.empty()) {
      nlohmann::json g;
      if (generators == "natural" || generators == "minimal" || generators == "support") {
        g = generators;
      } else {
        g = nlohmann::json::array();
        std::stringstream ss(generators);
        for (std::string item; std::getline(ss, item, ',');) g.push_back(item);
      }
      nlohmann::json wrapper{{"family", "uniform"}, {"params", {{"orders", {2, 3}}}}, {"generators", g}};
      spec.generators = parse_walk_spec(wrapper).generators;
    }
    if (tol) spec.solver.tol = *tol;
    if (seed) spec.seed = *seed;
    return spec;
  }

  static double parse_number(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::SpecParse, "not a number: " + s);
    return v;
  }
};

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  return file;
}

double max_tau2_residual(const FreeProduct& G, const LetterChain& chain, int max_len) {
  double worst = 0.0;
  for (int len = 1; len <= max_len; ++len)
    for (const Word& w : normal_words(G, len)) worst = std::max(worst, tau2_invariance_residual(G, chain, w));
  return worst;
}

int cmd_solve(const SpecInput& in) {
  WalkSpec spec = in.load();
  const auto& G = spec.walk.G;
  const auto& mu = spec.walk.mu;
  SolveReport rep = solve(G, mu, spec.solver);
  const auto S = resolve_generators(spec);
  const MetricsReport m = compute_metrics(G, mu, rep, letter_lengths(G, S));

  Report out(std::cout);
  out.put("group", G.describe());
  for (LetterId a = 0; a < G.alphabet_size(); ++a) out.put("mu[" + to_string(G.letter(a)) + "]", mu[a]);
  for (LetterId a = 0; a < G.alphabet_size(); ++a) out.put("q[" + to_string(G.letter(a)) + "]", rep.q[a]);
  for (LetterId a = 0; a < G.alphabet_size(); ++a) out.put("r[" + to_string(G.letter(a)) + "]", rep.r[a]);
  out.put("iterations", rep.iterations)
      .put("newton_used", rep.newton_used)
      .put("sup_residual", rep.sup_residual)
      .put("traffic_residual", rep.traffic_residual)
      .put("consistency_residual", rep.consistency_residual)
      .put("stationary", m.stationary)
      .put("gamma", m.gamma)
      .put("gamma_s", m.gamma_s)
      .put("h", m.h)
      .put("v", m.v)
      .put("v_s", m.v_s)
      .put("quality", m.quality)
      .put("hd_measure", m.hd_measure)
      .put("hd_support", m.hd_support);
  if (G.num_factors() == 2) {
    out.put("two_factor_identity", two_factor_identity(G, rep.q));
    out.put("tau2_residual", max_tau2_residual(G, build_chain(G, rep.r), 3));
  }
  return 0;
}

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

GridAxis parse_axis(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::SpecParse, "--grid wants name=start:stop:step, got " + text);
  GridAxis ax{text.substr(0, eq), {}};
  std::vector<double> parts;
  std::stringstream ss(text.substr(eq + 1));
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(SpecInput::parse_number(item));
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw Error(ErrorCode::SpecParse, "--grid wants name=start:stop:step with step > 0, got " + text);
  const long n = std::lround(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (long i = 0; i <= n; ++i) ax.values.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  return ax;
}

int cmd_sweep(const SpecInput& in, const std::vector<std::string>& grid, const std::string& out_path,
              std::size_t threads) {
  std::vector<GridAxis> axes;
  for (const auto& g : grid) axes.push_back(parse_axis(g));
  if (axes.empty()) throw Error(ErrorCode::SpecParse, "sweep needs at least one --grid");
  std::map<std::string, double> first;
  for (const auto& ax : axes)
    if (!ax.values.empty()) first[ax.name] = ax.values.front();
  const WalkSpec base = in.load(first);

  std::vector<std::vector<double>> points{{}};
  for (const auto& ax : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& p : points)
      for (double v : ax.values) {
        auto x = p;
        x.push_back(v);
        next.push_back(std::move(x));
      }
    points = std::move(next);
  }

  std::vector<std::string> rows(points.size());
  detail::parallel_for(
      points.size(),
      [&](std::size_t i) {
        std::string row;
        for (double v : points[i]) row += fmt(v) + ",";
        try {
          std::map<std::string, double> over;
          for (std::size_t a = 0; a < axes.size(); ++a) over[axes[a].name] = points[i][a];
          WalkSpec s = with_params(base, over);
          SolveReport rep = solve(s.walk.G, s.walk.mu, s.solver);
          const auto S = resolve_generators(s);
          MetricsReport m = compute_metrics(s.walk.G, s.walk.mu, rep, letter_lengths(s.walk.G, S));
          row += fmt(m.gamma) + "," + fmt(m.h) + "," + fmt(m.v_s) + "," + fmt(m.quality) + ",";
        } catch (const Error& e) {
          row += ",,,," + std::string(error_name(e.code()));
        }
        rows[i] = std::move(row);
      },
      threads);

  std::ofstream file;
  std::ostream& out = open_out(out_path, file);
  for (const auto& ax : axes) out << ax.name << ',';
  out << "gamma,h,v,quality,error\n";
  for (const auto& r : rows) out << r << '\n';
  return 0;
}

/// One closed-form evaluation; returns CSV columns after the family name.
std::string closed_form_row(const std::string& fam, const std::map<std::string, double>& p) {
  auto get = [&](const char* k) {
    auto it = p.find(k);
    if (it == p.end()) throw Error(ErrorCode::InvalidArgument, fam + " needs --" + std::string(k));
    return it->second;
  };
  auto geti = [&](const char* k) { return static_cast<int>(std::lround(get(k))); };
  if (fam == "zkzk") {
    const int k = geti("k");
    std::string row = fmt(closed_form::solve_xk(k)) + "," + fmt(closed_form::drift_zkzk(k));
    for (double r : closed_form::r_zkzk(k)) row += "," + fmt(r);
    return row;
  }
  if (fam == "hecke") {
    const int k = geti("k");
    std::string row = fmt(closed_form::solve_yk(k)) + "," + fmt(closed_form::drift_hecke(k));
    for (double r : closed_form::r_hecke(k)) row += "," + fmt(r);
    return row;
  }
  if (fam == "z2z3") return fmt(closed_form::drift_z2z3(get("p"), get("q")));
  if (fam == "z2z3-r") {
    auto r = closed_form::r_z2z3(get("p"), get("q"));
    return fmt(r.a) + "," + fmt(r.b) + "," + fmt(r.b2);
  }
  if (fam == "z2z3-max") {
    auto m = closed_form::z2z3_max();
    return fmt(m.z0) + "," + fmt(m.p) + "," + fmt(m.q) + "," + fmt(m.gamma);
  }
  if (fam == "z3z3-sym") {
    auto r = closed_form::r_z3z3_sym(get("p"));
    return fmt(closed_form::drift_z3z3_sym(get("p"))) + "," + fmt(r.a) + "," + fmt(r.a2);
  }
  if (fam == "z3z3-asym") return fmt(closed_form::drift_z3z3_asym(get("p"), get("q")));
  if (fam == "uniform-pair") return fmt(closed_form::drift_uniform_pair(get("p"), geti("k1"), geti("k2")));
  throw Error(ErrorCode::InvalidArgument, "unknown closed-form family '" + fam + "'");
}

const char* closed_form_header(const std::string& fam) {
  if (fam == "zkzk") return "x_k,gamma,r...";
  if (fam == "hecke") return "y_k,gamma,r...";
  if (fam == "z2z3-r") return "r_a,r_b,r_b2";
  if (fam == "z2z3-max") return "z0,p,q,gamma";
  if (fam == "z3z3-sym") return "gamma,r_a,r_a2";
  return "gamma";
}

int cmd_closed_form(const std::string& fam, const std::map<std::string, std::optional<double>>& flags,
                    const std::string& k_range, const std::string& batch) {
  std::vector<std::map<std::string, double>> jobs;
  std::vector<std::string> names;
  if (!batch.empty()) {
    std::ifstream in(batch);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + batch);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::SpecParse, "empty batch file");
    std::stringstream hs(line);
    for (std::string h; std::getline(hs, h, ',');) names.push_back(h);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ls(line);
      std::map<std::string, double> job;
      std::size_t i = 0;
      for (std::string v; std::getline(ls, v, ','); ++i) {
        if (i >= names.size()) throw Error(ErrorCode::SpecParse, "batch row has too many columns: " + line);
        job[names[i]] = SpecInput::parse_number(v);
      }
      jobs.push_back(job);
    }
  } else {
    std::map<std::string, double> job;
    for (const auto& [k, v] : flags)
      if (v) job[k] = *v;
    if (!k_range.empty()) {
      auto colon = k_range.find(':');
      if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--k-range wants lo:hi");
      const int lo = std::stoi(k_range.substr(0, colon)), hi = std::stoi(k_range.substr(colon + 1));
      for (int k = lo; k <= hi; ++k) {
        job["k"] = k;
        jobs.push_back(job);
      }
    } else {
      jobs.push_back(job);
    }
    for (const auto& [k, v] : jobs.front()) names.push_back(k);
  }

  std::cout << "family";
  for (const auto& n : names) std::cout << ',' << n;
  std::cout << ',' << closed_form_header(fam) << ",error\n";
  int status = 0;
  for (const auto& job : jobs) {
    std::cout << fam;
    for (const auto& n : names) std::cout << ',' << fmt(job.at(n));
    try {
      std::cout << ',' << closed_form_row(fam, job) << ",\n";
    } catch (const Error& e) {
      std::cout << ",," << error_name(e.code()) << '\n';
      if (jobs.size() == 1) status = static_cast<int>(e.code());
    }
  }
  return status;
}

int cmd_simulate(const SpecInput& in, std::size_t steps, std::size_t reps, const std::string& target,
                 std::size_t horizon, std::size_t prefix, const std::string& series, std::size_t threads) {
  WalkSpec spec = in.load();
  const auto& G = spec.walk.G;
  const auto& mu = spec.walk.mu;
  validate_walk(G, mu);
  const auto S = resolve_generators(spec);
  const LengthTable len = letter_lengths(G, S);

  std::cout << "quantity,estimate,stderr,reps,horizon,bias_allowance\n";
  auto row = [](const std::string& what, const EstimateReport& r) {
    std::cout << what << ',' << fmt(r.estimate) << ',' << fmt(r.stderr_) << ',' << r.reps << ',' << r.horizon << ','
              << fmt(r.bias_allowance) << '\n';
  };
  row("drift", estimate_drift(G, mu, steps, reps, spec.seed, len, threads));
  if (!target.empty()) {
    const LetterId t = G.id(parse_letter(target));
    row("hitting[" + target + "]", estimate_hitting(G, mu, t, horizon ? horizon : steps, reps, spec.seed + 1, threads));
  }
  if (prefix > 0) {
    auto est = estimate_prefix(G, mu, steps, reps, spec.seed + 2, prefix, threads);
    for (const auto& [w, n] : est.counts) {
      const double f = static_cast<double>(n) / static_cast<double>(est.used);
      EstimateReport r{f, std::sqrt(f * (1 - f) / static_cast<double>(est.used)), est.used, steps, 0.0};
      row("prefix[" + to_string(G, w) + "]", r);
    }
    std::cout << "prefix_dropped," << est.dropped << ",,,,\n";
  }
  if (!series.empty()) {
    std::ofstream file;
    std::ostream& out = open_out(series, file);
    out << "rep,n,length\n";
    for (std::size_t i = 0; i < reps; ++i) {
      auto t = simulate(G, mu, steps, spec.seed, len, i, true);
      for (std::size_t n = 0; n < t.length_series.size(); ++n) out << i << ',' << n << ',' << t.length_series[n] << '\n';
    }
  }
  return 0;
}

int cmd_verify(bool list, bool inject, const std::vector<int>& only, std::size_t threads) {
  const auto& all = acceptance::criteria();
  if (list) {
    for (const auto& c : all) std::cout << c.id << ' ' << c.name << '\n';
    return 0;
  }
  acceptance::Context ctx;
  ctx.inject_fault = inject;
  ctx.threads = threads;
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    auto r = acceptance::run(c, ctx);
    std::cout << acceptance::format(r) << std::endl;
    failed += !r.pass;
  }
  std::cout << (failed ? "FAILED " : "OK ") << failed << " criteria failing\n";
  return failed ? 1 : 0;
}

int cmd_quality(const SpecInput& in, double resolution, const std::string& csv, std::size_t threads) {
  WalkSpec spec = in.load();
  const auto& G = spec.walk.G;
  const auto S = resolve_generators(spec);
  Report out(std::cout);
  out.put("group", G.describe());
  std::string sset;
  for (LetterId a : S) sset += (sset.empty() ? "" : ",") + to_string(G.letter(a));
  out.put("generators", sset);
  if (resolution <= 0.0) {
    auto qv = quality_value(G, spec.walk.mu, S, spec.solver);
    out.put("h", qv.h).put("gamma_s", qv.gamma_s).put("v_s", qv.v_s).put("quality", qv.quality);
    return 0;
  }
  auto sweep = quality_sup(G, S, resolution, spec.solver, threads);
  out.put("points", sweep.points.size());
  if (sweep.best) {
    const auto& b = sweep.best_point();
    out.put("best_quality", b.quality);
    for (LetterId a = 0; a < G.alphabet_size(); ++a) out.put("best_mu[" + to_string(G.letter(a)) + "]", b.mu[a]);
    out.put("on_boundary", sweep.on_boundary);
  } else {
    out.put("best_quality", "none");
  }
  if (!csv.empty()) {
    std::ofstream file;
    std::ostream& o = open_out(csv, file);
    for (const auto& orbit : sweep.orbits) o << "mass[" << to_string(G.letter(orbit.front())) << "],";
    o << "quality,error\n";
    for (const auto& p : sweep.points) {
      for (double m : p.orbit_mass) o << fmt(m) << ',';
      o << (std::isnan(p.quality) ? "" : fmt(p.quality)) << ',' << p.error << '\n';
    }
  }
  return 0;
}

int cmd_cylinder(const SpecInput& in, const std::string& word) {
  WalkSpec spec = in.load();
  const auto& G = spec.walk.G;
  SolveReport rep = solve(G, spec.walk.mu, spec.solver);
  const LetterChain chain = build_chain(G, rep.r);
  const Word w = parse_word(G, word);
  Report out(std::cout);
  out.put("word", to_string(G, w)).put("probability", cylinder_prob(chain, w)).put("log_probability",
                                                                                  log_cylinder_prob(chain, w));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic measure, drift and entropy of nearest-neighbor walks on free products of finite groups"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");

  SpecInput solve_in;
  auto* solve_cmd = app.add_subcommand("solve", "solve the traffic equations and report all metrics");
  solve_in.attach(solve_cmd);

  SpecInput sweep_in;
  std::vector<std::string> grid;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "metrics over a parameter grid, as CSV");
  sweep_in.attach(sweep_cmd);
  sweep_cmd->add_option("--grid", grid, "axis name=start:stop:step (repeatable)")->required();
  sweep_cmd->add_option("-o,--out", sweep_out, "CSV output file (default stdout)");

  std::string cf_family, k_range, batch;
  std::map<std::string, std::optional<double>> cf_flags{{"k", {}}, {"p", {}}, {"q", {}}, {"k1", {}}, {"k2", {}}};
  auto* cf_cmd = app.add_subcommand("closed-form", "evaluate explicit formulas");
  cf_cmd->add_option("family", cf_family, "zkzk, hecke, z2z3, z2z3-r, z2z3-max, z3z3-sym, z3z3-asym, uniform-pair")
      ->required();
  for (auto& [k, v] : cf_flags) cf_cmd->add_option("--" + k, v);
  cf_cmd->add_option("--k-range", k_range, "lo:hi, one row per k");
  cf_cmd->add_option("--batch", batch, "CSV file with a header row of parameter names");

  SpecInput sim_in;
  std::size_t steps = 10'000, reps = 200, horizon = 0, prefix = 0;
  std::string target, series;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimates as CSV");
  sim_in.attach(sim_cmd);
  sim_cmd->add_option("--steps", steps, "steps per trajectory");
  sim_cmd->add_option("--reps", reps, "independent replications");
  sim_cmd->add_option("--target", target, "estimate the hitting probability of this letter");
  sim_cmd->add_option("--horizon", horizon, "hitting horizon (default: steps)");
  sim_cmd->add_option("--prefix", prefix, "estimate the law of the first n letters");
  sim_cmd->add_option("--series", series, "dump per-trajectory length series to this CSV");

  bool list = false, inject = false;
  std::vector<int> only;
  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance criteria");
  verify_cmd->add_flag("--list", list, "list criteria without running them");
  verify_cmd->add_flag("--inject-fault", inject, "perturb F_4 to check that criterion 4 notices");
  verify_cmd->add_option("--only", only, "run only these criterion ids");

  SpecInput q_in;
  double resolution = 0.0;
  std::string q_csv;
  auto* q_cmd = app.add_subcommand("quality", "h/(gamma_S v_S), or its supremum over symmetric laws on S");
  q_in.attach(q_cmd);
  q_cmd->add_option("--sweep", resolution, "grid step for the sweep over symmetric measures");
  q_cmd->add_option("--csv", q_csv, "write every sweep point to this CSV");

  SpecInput cyl_in;
  std::string word;
  auto* cyl_cmd = app.add_subcommand("cylinder", "harmonic measure of a cylinder");
  cyl_in.attach(cyl_cmd);
  cyl_cmd->add_option("--word", word, "comma-separated letters, e.g. 0:1,1:2")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_in);
    if (*sweep_cmd) return cmd_sweep(sweep_in, grid, sweep_out, threads);
    if (*cf_cmd) return cmd_closed_form(cf_family, cf_flags, k_range, batch);
    if (*sim_cmd) return cmd_simulate(sim_in, steps, reps, target, horizon, prefix, series, threads);
    if (*verify_cmd) return cmd_verify(list, inject, only, threads);
    if (*q_cmd) return cmd_quality(q_in, resolution, q_csv, threads);
    if (*cyl_cmd) return cmd_cylinder(cyl_in, word);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCode::InvalidArgument);
  }
  return 0;
}
