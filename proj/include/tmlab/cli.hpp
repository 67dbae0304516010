#pragma once

// Command-line front end: tmlab <subcommand> [options].

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tmlab/certify.hpp"
#include "tmlab/extremal.hpp"
#include "tmlab/families.hpp"
#include "tmlab/functionals.hpp"
#include "tmlab/hessian.hpp"
#include "tmlab/model.hpp"
#include "tmlab/special_fn.hpp"

namespace tmlab::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

inline constexpr const char* kOutDirEnv = "TMLAB_OUT_DIR";

struct SweepConfig {
  std::string mode = "beta";  // beta | eps | corollary | j
  std::optional<std::vector<double>> values;
  std::optional<std::string> profile;
  std::vector<double> a{0.5, 1, 2};
  std::vector<double> b{0, 1, 2};
  std::vector<double> gamma{0.5, 1};
};

struct RunConfig {
  int dim = 2;
  PerturbationSpec f = PerturbationSpec::zero();
  SolverOptions solver{};
  std::string out_dir;
  unsigned threads = 0;  // 0: hardware concurrency
  bool dry_run = false;
  std::vector<double> eps_grid = default_eps_grid();
  std::vector<double> j_list;
  double beta_factor = 1.2;
  SweepConfig sweep;
};

/// Comma-separated numbers; the empty string is the empty list.
inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(parse_double(item.substr(b, e - b + 1), what));
  }
  return out;
}

namespace detail {

inline void reject_unknown(const Json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError("unknown config key '" + where + it.key() + "'");
  }
}

template <class T>
T get(const Json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + where + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Apply a JSON config object. Grammar (every key optional):
///   dim, perturbation (string or object), quadrature {panels, nodes_per_panel, t_max, growth},
///   solver {init, damping, tol, maxiter, multistart, anderson_depth}, seed, output_dir,
///   threads, dry_run, eps_grid, j_list, beta_factor,
///   sweep {mode, values, profile, a, b, gamma}.
inline void apply_json(RunConfig& cfg, const Json& j) {
  using detail::get;
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  detail::reject_unknown(j, {"dim", "perturbation", "quadrature", "solver", "seed", "output_dir", "threads", "dry_run",
                             "eps_grid", "j_list", "beta_factor", "sweep"},
                         "");
  if (j.contains("dim")) cfg.dim = get<int>(j, "dim", "");
  if (j.contains("perturbation")) cfg.f = PerturbationSpec::from_json(j.at("perturbation"));
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    if (!q.is_object()) throw ConfigError("config key 'quadrature' must be an object");
    detail::reject_unknown(q, {"panels", "nodes_per_panel", "t_max", "growth"}, "quadrature.");
    if (q.contains("panels")) cfg.solver.scheme.panels = get<std::size_t>(q, "panels", "quadrature.");
    if (q.contains("nodes_per_panel")) cfg.solver.scheme.order = get<std::size_t>(q, "nodes_per_panel", "quadrature.");
    if (q.contains("t_max")) cfg.solver.scheme.t_max = get<double>(q, "t_max", "quadrature.");
    if (q.contains("growth")) cfg.solver.scheme.growth = get<double>(q, "growth", "quadrature.");
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (!s.is_object()) throw ConfigError("config key 'solver' must be an object");
    detail::reject_unknown(s, {"init", "damping", "tol", "maxiter", "multistart", "anderson_depth"}, "solver.");
    if (s.contains("init")) cfg.solver.init = get<std::string>(s, "init", "solver.");
    if (s.contains("damping")) cfg.solver.damping = get<double>(s, "damping", "solver.");
    if (s.contains("tol")) cfg.solver.tol = get<double>(s, "tol", "solver.");
    if (s.contains("maxiter")) cfg.solver.maxiter = get<int>(s, "maxiter", "solver.");
    if (s.contains("multistart")) cfg.solver.multistart = get<int>(s, "multistart", "solver.");
    if (s.contains("anderson_depth")) cfg.solver.anderson_depth = get<int>(s, "anderson_depth", "solver.");
  }
  if (j.contains("seed")) cfg.solver.seed = get<std::uint64_t>(j, "seed", "");
  if (j.contains("output_dir")) cfg.out_dir = get<std::string>(j, "output_dir", "");
  if (j.contains("threads")) cfg.threads = get<unsigned>(j, "threads", "");
  if (j.contains("dry_run")) cfg.dry_run = get<bool>(j, "dry_run", "");
  if (j.contains("eps_grid")) cfg.eps_grid = get<std::vector<double>>(j, "eps_grid", "");
  if (j.contains("j_list")) cfg.j_list = get<std::vector<double>>(j, "j_list", "");
  if (j.contains("beta_factor")) cfg.beta_factor = get<double>(j, "beta_factor", "");
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (!s.is_object()) throw ConfigError("config key 'sweep' must be an object");
    detail::reject_unknown(s, {"mode", "values", "profile", "a", "b", "gamma"}, "sweep.");
    if (s.contains("mode")) cfg.sweep.mode = get<std::string>(s, "mode", "sweep.");
    if (s.contains("values")) cfg.sweep.values = get<std::vector<double>>(s, "values", "sweep.");
    if (s.contains("profile")) cfg.sweep.profile = get<std::string>(s, "profile", "sweep.");
    if (s.contains("a")) cfg.sweep.a = get<std::vector<double>>(s, "a", "sweep.");
    if (s.contains("b")) cfg.sweep.b = get<std::vector<double>>(s, "b", "sweep.");
    if (s.contains("gamma")) cfg.sweep.gamma = get<std::vector<double>>(s, "gamma", "sweep.");
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  apply_json(cfg, j);
}

inline void validate(const RunConfig& cfg) {
  const auto& s = cfg.solver.scheme;
  if (s.panels < 1) throw ConfigError("panels must be positive");
  if (s.order < 2 || s.order > 64) throw ConfigError("nodes per panel must lie in [2, 64]");
  if (!(s.t_max >= 20.0) || !std::isfinite(s.t_max)) throw ConfigError("t_max must be at least 20");
  if (!(s.growth > 0.0) || !std::isfinite(s.growth)) throw ConfigError("growth must be positive");
  if (!(cfg.solver.damping >= 0.0 && cfg.solver.damping <= 1.0)) throw ConfigError("damping must lie in [0, 1]");
  if (!(cfg.solver.tol > 0.0)) throw ConfigError("tol must be positive");
  if (cfg.solver.maxiter < 1) throw ConfigError("maxiter must be at least 1");
  multistart_inits(cfg.solver.multistart);
  if (!(cfg.beta_factor > 0.0)) throw ConfigError("beta_factor must be positive");
}

inline std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::string dir = cfg.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv(kOutDirEnv); env && *env) dir = env;
    else dir = "tmlab_out";
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  const auto probe = std::filesystem::path(dir) / ".tmlab_write_probe";
  {
    std::ofstream test(probe);
    if (!test) throw IoError("output directory '" + dir + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
  return dir;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  CsvTable::write_text_file(path.string(), j.dump(2) + "\n");
}

/// Runs fn(i) for i in [0, n) on at most `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline Json run_header(const char* kind, const RunConfig& cfg, const DimensionParams& P) {
  Json j;
  j["schema"] = std::string("tmlab.") + kind + "/1";
  j["generated_at"] = utc_timestamp();
  j["params"] = P.to_json();
  j["perturbation"] = cfg.f.to_json();
  j["quadrature"] = scheme_json(cfg.solver.scheme);
  return j;
}

inline int cmd_params(const RunConfig& cfg, std::ostream& out) {
  const auto P = make_params(cfg.dim);
  out << "N        = " << P.N << "\n"
      << "k        = " << P.k << "\n"
      << "omega    = " << fmt17(P.omega) << "\n"
      << "c_N      = " << fmt17(P.c_N) << "\n"
      << "mu_N     = " << fmt17(P.mu_N) << "\n"
      << "a_N      = " << fmt17(P.a_N) << "\n"
      << "conc_upper = " << fmt17(concentration_upper(P)) << "\n";
  return kOk;
}

inline int cmd_identities(const RunConfig& cfg, std::ostream& out) {
  const auto dir = prepare_out_dir(cfg);
  CsvTable tab({"identity", "x", "y", "lhs", "rhs", "residual", "passed"});
  bool all = true;
  const std::vector<double> grid{0.5, 1, 2, 3.5};
  for (double x : grid)
    for (double y : grid) {
      const auto b = beta_integral(x, y);
      const bool ok = b.difference < 1e-8;
      all = all && ok;
      tab.add_row({"beta", fmt17(x), fmt17(y), fmt17(b.quadrature.value), fmt17(b.gamma_ratio), fmt17(b.difference),
                   ok ? "1" : "0"});
    }
  for (double z : {0.1, 1.0, 10.0, 100.0})
    for (double p : {2.0, 2.5, 3.0, 4.0}) {
      const auto l = lt1(z, p);
      const bool ok = l.residual < 1e-8;
      all = all && ok;
      tab.add_row({"lt1", fmt17(z), fmt17(p), fmt17(l.direct.value), fmt17(l.identity_rhs), fmt17(l.residual),
                   ok ? "1" : "0"});
    }
  {
    const auto l = lt2(1.0, 2.0);
    tab.add_row({"lt2_printed", "1", "2", fmt17(l.direct.value), fmt17(l.printed_rhs),
                 fmt17(l.printed_identity_residual), "logged"});
  }
  for (double x : {0.5, 1.0, 2.0, 5.0}) {
    const double series = digamma(x).value;
    const double integral = digamma_dirichlet(x).value;
    const bool ok = std::abs(series - integral) < 1e-8;
    all = all && ok;
    tab.add_row({"digamma", fmt17(x), "", fmt17(integral), fmt17(series), fmt17(std::abs(series - integral)),
                 ok ? "1" : "0"});
  }
  tab.write((dir / "identities.csv").string());
  out << tab.str();
  return all ? kOk : kNumeric;
}

inline int cmd_families(const RunConfig& cfg, std::ostream& out) {
  const auto P = make_params(cfg.dim);
  const auto dir = prepare_out_dir(cfg);
  const auto& scheme = cfg.solver.scheme;
  CsvTable moser_tab({"j", "plateau", "kink_r", "norm"});
  for (double j : {1.0, 5.0, 10.0, 20.0})
    moser_tab.add_row(std::vector<double>{j, moser_plateau(j, P), std::exp(-j / P.N), x1_norm(moser(j, P), P, scheme)});
  CsvTable conc_tab({"eps", "c", "b", "kink_r", "continuity_residual", "mu_b", "mu_b_limit", "norm", "value"});
  for (double eps : cfg.eps_grid) {
    const auto cp = conc_params(eps, P);
    const auto v = conc_family(eps, P);
    conc_tab.add_row(std::vector<double>{eps, cp.c, cp.b, cp.kink_r, cp.continuity_residual, cp.mu_b, cp.mu_b_limit,
                                         x1_norm(v, P, scheme), tm_integral(v, cfg.f, P.mu_N, P, scheme).value});
  }
  moser_tab.write((dir / "moser.csv").string());
  conc_tab.write((dir / "conc.csv").string());
  out << moser_tab.str() << "\n" << conc_tab.str();
  return kOk;
}

inline int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
  const auto P = make_params(cfg.dim);
  const auto dir = prepare_out_dir(cfg);
  ReportOptions ro;
  ro.solver = cfg.solver;
  ro.eps_grid = cfg.eps_grid;
  ro.j_list = cfg.j_list;
  ro.beta_factor = cfg.beta_factor;
  ro.dry_run = cfg.dry_run;
  const auto rep = build_report(cfg.f, P, ro);
  if (rep.witness) rep.witness->csv().write((dir / "witness.csv").string());
  if (rep.blowup) rep.blowup->csv().write((dir / "blowup.csv").string());
  if (rep.extremal) {
    const auto& best = rep.extremal->selected();
    profile_csv(best.profile, profile_grid(best.profile, cfg.solver.scheme)).write((dir / "profile.csv").string());
    best.history_csv().write((dir / "history.csv").string());
  }
  write_json(dir / "certificate.json", rep.json);
  out << "concentration_upper = " << fmt17(rep.json["concentration_upper"].get<double>()) << "\n";
  if (rep.witness) out << "witness_lower = " << fmt17(rep.witness->value) << "\n";
  else if (cfg.dry_run) out << "witness_lower = " << fmt17(rep.json["witness"]["value"].get<double>()) << " (dry run)\n";
  if (rep.extremal) out << "extremal_value = " << fmt17(rep.extremal->selected().functional_value) << "\n";
  for (const auto& f : rep.failures) out << "failure: " << f << "\n";
  out << "report: " << (dir / "certificate.json").string() << "\n";
  return rep.ok() ? kOk : kNumeric;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const auto P = make_params(cfg.dim);
  const auto dir = prepare_out_dir(cfg);
  const auto& scheme = cfg.solver.scheme;
  std::vector<std::string> inits;
  if (cfg.solver.multistart <= 1) inits = {cfg.solver.init};
  else inits = multistart_inits(cfg.solver.multistart);
  const auto ms = solve_multistart(cfg.f, P, cfg.solver, inits);
  const auto& best = ms.selected();
  Json j = run_header("solution", cfg, P);
  j["solver"] = Json{{"init", cfg.solver.init},
                     {"damping", cfg.solver.damping},
                     {"tol", cfg.solver.tol},
                     {"maxiter", cfg.solver.maxiter},
                     {"anderson_depth", cfg.solver.anderson_depth},
                     {"multistart", cfg.solver.multistart},
                     {"seed", cfg.solver.seed}};
  j["solution"] = best.to_json();
  j["starts"] = Json::array();
  for (const auto& s : ms.starts)
    j["starts"].push_back(Json{{"init", s.init},
                               {"status", to_string(s.status)},
                               {"functional_value", s.functional_value},
                               {"el_residual", s.el_residual},
                               {"iterations", s.iterations}});
  j["selected"] = best.init;
  j["disagreement"] = ms.disagreement;
  j["spread"] = ms.spread;
  if (best.converged()) {
    const auto st = stationarity_probe(best, cfg.f, P, scheme, cfg.solver.seed);
    j["stationarity"] = Json{{"seed", st.seed}, {"step", st.step}, {"max_abs", st.max_abs}, {"derivatives", st.derivatives}};
    j["radial_estimate"] = radial_bound_check(best.profile, P, scheme, 1e-6).to_json();
    j["admissibility"] = admissibility_check(lift(best, cfg.f, P), scheme).to_json();
  }
  j["files"] = Json{{"profile", "profile.csv"}, {"history", "history.csv"}};
  profile_csv(best.profile, profile_grid(best.profile, scheme)).write((dir / "profile.csv").string());
  best.history_csv().write((dir / "history.csv").string());
  write_json(dir / "solution.json", j);
  out << "status = " << to_string(best.status) << "\n"
      << "iterations = " << best.iterations << "\n"
      << "functional_value = " << fmt17(best.functional_value) << "\n"
      << "lambda = " << fmt17(best.lambda) << "\n"
      << "el_residual = " << fmt17(best.el_residual) << "\n";
  if (best.status == SolveStatus::no_progress) out << "no progress: the iteration map left the iterate unchanged\n";
  return best.converged() ? kOk : kNumeric;
}

inline int cmd_check(const RunConfig& cfg, const std::string& profile_path, std::ostream& out) {
  const auto P = make_params(cfg.dim);
  const auto& scheme = cfg.solver.scheme;
  if (profile_path.empty()) throw ConfigError("check: --profile PATH is required");
  const auto v = read_profile_csv(profile_path);
  const auto u = lift(v, P);
  const auto adm = admissibility_check(u, scheme);
  Json j;
  j["profile"] = profile_path;
  j["norm"] = phi_norm(u, scheme);
  j["radial_estimate"] = radial_bound_check(v, P, scheme, 1e-6).to_json();
  j["admissibility"] = adm.to_json();
  out << j.dump(2) << "\n";
  return adm.pass ? kOk : kNumeric;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const auto P = make_params(cfg.dim);
  const auto dir = prepare_out_dir(cfg);
  const auto& scheme = cfg.solver.scheme;
  const auto& sw = cfg.sweep;
  std::unique_ptr<CsvTable> tab;
  std::vector<std::vector<std::string>> rows;

  auto fv = [](const FunctionalValue& v) { return v.blowup ? std::string("inf") : fmt17(v.value); };
  if (sw.mode == "beta") {
    const auto values = sw.values.value_or(std::vector<double>{0.8, 1.0, 1.2});
    const auto v = initial_profile(sw.profile.value_or("moser:10"), P);
    tab = std::make_unique<CsvTable>(std::vector<std::string>{"beta_factor", "beta", "value", "refinement_delta",
                                                              "blowup", "blowup_regime"});
    rows.resize(values.size());
    parallel_for(values.size(), cfg.threads, [&](std::size_t i) {
      const double beta = values[i] * P.mu_N;
      const auto r = tm_integral(v, cfg.f, beta, P, scheme);
      rows[i] = {fmt17(values[i]), fmt17(beta), fv(r), fmt17(r.refinement_delta), r.blowup ? "1" : "0",
                 beta > P.mu_N ? "1" : "0"};
    });
  } else if (sw.mode == "eps") {
    const auto values = sw.values.value_or(default_eps_grid());
    tab = std::make_unique<CsvTable>(std::vector<std::string>{"eps", "c", "b", "norm", "value", "refinement_delta"});
    rows.resize(values.size());
    parallel_for(values.size(), cfg.threads, [&](std::size_t i) {
      const auto cp = conc_params(values[i], P);
      const auto v = conc_family(values[i], P);
      const auto r = tm_integral(v, cfg.f, P.mu_N, P, scheme);
      rows[i] = {fmt17(values[i]), fmt17(cp.c), fmt17(cp.b), fmt17(x1_norm(v, P, scheme)), fv(r),
                 fmt17(r.refinement_delta)};
    });
  } else if (sw.mode == "corollary") {
    const auto v = initial_profile(sw.profile.value_or("conc:1e-4"), P);
    struct Cell {
      double a, b, g;
    };
    std::vector<Cell> cells;
    for (double a : sw.a)
      for (double b : sw.b)
        for (double g : sw.gamma) cells.push_back({a, b, g});
    tab = std::make_unique<CsvTable>(
        std::vector<std::string>{"a", "b", "gamma", "value", "refinement_delta", "finite", "blowup"});
    rows.resize(cells.size());
    parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
      const auto f = PerturbationSpec::power(cells[i].a, cells[i].b, cells[i].g);
      const auto r = tm_integral(v, f, P.mu_N, P, scheme);
      rows[i] = {fmt17(cells[i].a), fmt17(cells[i].b),       fmt17(cells[i].g), fv(r), fmt17(r.refinement_delta),
                 std::isfinite(r.value) ? "1" : "0", r.blowup ? "1" : "0"};
    });
  } else if (sw.mode == "j") {
    const auto values = sw.values.value_or(std::vector<double>{5, 10, 15, 20});
    const double beta = cfg.beta_factor * P.mu_N;
    tab = std::make_unique<CsvTable>(
        std::vector<std::string>{"j", "beta", "value", "lower_bound", "above_bound", "refinement_delta"});
    rows.resize(values.size());
    parallel_for(values.size(), cfg.threads, [&](std::size_t i) {
      const auto r = tm_integral(moser(values[i], P), cfg.f, beta, P, scheme);
      const double lb = std::exp(values[i] * (beta / P.mu_N - 1.0)) / P.N;
      rows[i] = {fmt17(values[i]), fmt17(beta), fv(r), fmt17(lb), r.value >= lb * (1 - 1e-12) ? "1" : "0",
                 fmt17(r.refinement_delta)};
    });
  } else {
    throw ConfigError("unknown sweep mode '" + sw.mode + "' (expected beta, eps, corollary or j)");
  }
  for (auto& r : rows) tab->add_row(std::move(r));
  tab->write((dir / "sweep.csv").string());
  out << tab->str();
  return kOk;
}

/// Entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"tmlab: supercritical Trudinger-Moser laboratory for the k-Hessian in the limit case N = 2k"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, f_text, init, out_dir, grid_text, a_text, b_text, gamma_text, profile_text, mode;
  std::optional<int> dim, maxiter, multistart;
  std::optional<std::size_t> panels, nodes;
  std::optional<double> tmax, damping, tol;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool dry_run = false;

  app.add_option("--config", config_path, "JSON config file (flags override its values)");
  app.add_option("--dim", dim, "dimension N (even, >= 2)");
  app.add_option("--f", f_text, "perturbation: zero | power:a=..,b=..,gamma=.. | log:c=..,sigma=.. | table:PATH");
  app.add_option("--panels", panels, "quadrature panels");
  app.add_option("--nodes", nodes, "Gauss-Legendre nodes per panel");
  app.add_option("--tmax", tmax, "truncation t_max in t = -ln r");
  app.add_option("--init", init, "solver init: conc:EPS | linear | quadratic | moser:J | CSV path");
  app.add_option("--damping", damping, "mixing parameter in [0, 1]");
  app.add_option("--tol", tol, "sup-node change tolerance");
  app.add_option("--maxiter", maxiter, "maximum solver iterations");
  app.add_option("--multistart", multistart, "number of initial profiles");
  app.add_option("--seed", seed, "seed for the stationarity directions");
  app.add_option("--out", out_dir, std::string("output directory (default $") + kOutDirEnv + " or ./tmlab_out)");
  app.add_option("--threads", threads, "sweep worker threads (0: all cores)");
  app.add_flag("--dry-run", dry_run, "bounds: zero profile only, no solver");

  auto* params_cmd = app.add_subcommand("params", "print the dimension constants");
  auto* ident_cmd = app.add_subcommand("identities", "special-function identity suite");
  auto* fam_cmd = app.add_subcommand("families", "Moser and concentration family tables");
  auto* bounds_cmd = app.add_subcommand("bounds", "certificate report (JSON + CSV)");
  auto* solve_cmd = app.add_subcommand("solve", "extremal profile via the Euler-Lagrange iteration");
  auto* check_cmd = app.add_subcommand("check", "admissibility of a profile CSV");
  check_cmd->add_option("--profile", profile_text, "profile CSV with columns r,t,v,slope")->required();
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep to CSV");
  sweep_cmd->add_option("--mode", mode, "beta | eps | corollary | j");
  sweep_cmd->add_option("--grid", grid_text, "comma-separated values (beta factors, eps or j); empty for none");
  sweep_cmd->add_option("--profile", profile_text, "profile for beta/corollary sweeps (init grammar)");
  sweep_cmd->add_option("--a", a_text, "corollary grid for a");
  sweep_cmd->add_option("--b", b_text, "corollary grid for b");
  sweep_cmd->add_option("--gamma", gamma_text, "corollary grid for gamma");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    if (dim) cfg.dim = *dim;
    if (!f_text.empty()) cfg.f = PerturbationSpec::parse(f_text);
    if (panels) cfg.solver.scheme.panels = *panels;
    if (nodes) cfg.solver.scheme.order = *nodes;
    if (tmax) cfg.solver.scheme.t_max = *tmax;
    if (!init.empty()) cfg.solver.init = init;
    if (damping) cfg.solver.damping = *damping;
    if (tol) cfg.solver.tol = *tol;
    if (maxiter) cfg.solver.maxiter = *maxiter;
    if (multistart) cfg.solver.multistart = *multistart;
    if (seed) cfg.solver.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads) cfg.threads = *threads;
    if (dry_run) cfg.dry_run = true;
    if (!mode.empty()) cfg.sweep.mode = mode;
    if (sweep_cmd->count("--grid")) cfg.sweep.values = parse_list(grid_text, "--grid");
    if (sweep_cmd->count("--profile")) cfg.sweep.profile = profile_text;
    if (sweep_cmd->count("--a")) cfg.sweep.a = parse_list(a_text, "--a");
    if (sweep_cmd->count("--b")) cfg.sweep.b = parse_list(b_text, "--b");
    if (sweep_cmd->count("--gamma")) cfg.sweep.gamma = parse_list(gamma_text, "--gamma");
    validate(cfg);
    try {
      make_params(cfg.dim);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }

    if (*params_cmd) return cmd_params(cfg, out);
    if (*ident_cmd) return cmd_identities(cfg, out);
    if (*fam_cmd) return cmd_families(cfg, out);
    if (*bounds_cmd) return cmd_bounds(cfg, out);
    if (*solve_cmd) return cmd_solve(cfg, out);
    if (*check_cmd) return cmd_check(cfg, profile_text, out);
    if (*sweep_cmd) return cmd_sweep(cfg, out);
    return kConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainError& e) {
    err << "argument error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  }
}

}  // namespace tmlab::cli
