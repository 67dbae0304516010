#pragma once

// Bound constants, lemma checks and the machine-readable certificate.

#include <chrono>
#include <cmath>
#include <ctime>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tmlab/extremal.hpp"
#include "tmlab/families.hpp"
#include "tmlab/functionals.hpp"
#include "tmlab/hessian.hpp"
#include "tmlab/model.hpp"
#include "tmlab/special_fn.hpp"

namespace tmlab {

/// (1/N)(1 + e^{Psi(N/2+1) + gamma}).
inline double concentration_upper(const DimensionParams& params) {
  return (1.0 + std::exp(digamma(params.k + 1.0).value + kEulerGamma)) / params.N;
}

/// P = (1 - norm^{k+1})^{-2/N}; +inf for norm = 1.
inline double cc_exponent(double norm_v, const DimensionParams& params) {
  if (!(norm_v >= 0.0) || norm_v > 1.0) throw DomainError("cc_exponent: norm must lie in [0, 1], got " + fmt17(norm_v));
  if (norm_v == 1.0) return std::numeric_limits<double>::infinity();
  return std::pow(-std::expm1((params.k + 1.0) * std::log(norm_v)), -2.0 / params.N);
}

/// w on [a, inf) as nodes with values and derivatives. A repeated node
/// marks a kink (left derivative first). w is held constant past the last node.
struct HalfLineSample {
  std::vector<double> t;
  std::vector<double> w;
  std::vector<double> dw;
};

struct SharpEstimateReport {
  double a = 0.0;
  double p = 2.0;
  double q = 2.0;
  double delta = 0.0;  // int_a^inf |w'|^p
  double c = 0.0;      // q w^{q-1}(a)
  double gamma_p = 0.0;
  double lhs = 0.0;  // int_a^inf e^{w^q - t} dt
  double rhs = 0.0;
  bool holds = false;

  [[nodiscard]] Json to_json() const {
    return Json{{"a", a}, {"p", p}, {"delta", delta}, {"lhs", lhs}, {"rhs", rhs}, {"holds", holds}};
  }
};

inline SharpEstimateReport sharp_estimate_check(const HalfLineSample& w, double a, double p) {
  const std::size_t n = w.t.size();
  if (n < 1 || w.w.size() != n || w.dw.size() != n) throw DomainError("sharp_estimate_check: malformed sample");
  if (!(a > 0.0)) throw DomainError("sharp_estimate_check: a must be positive");
  if (!(p >= 2.0)) throw DomainError("sharp_estimate_check: p must be >= 2");
  if (w.t.front() != a) throw DomainError("sharp_estimate_check: sample must start at t = a");
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && w.t[i + 1] < w.t[i]) throw DomainError("sharp_estimate_check: nodes must be nondecreasing");
    if (!(w.w[i] >= 0.0)) throw DomainError("sharp_estimate_check: w must be nonnegative");
  }
  SharpEstimateReport rep;
  rep.a = a;
  rep.p = p;
  rep.q = p / (p - 1.0);
  const double q = rep.q;
  double lhs = 0.0, delta = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t0 = w.t[i], t1 = w.t[i + 1];
    if (t1 == t0) continue;
    const double y0 = w.w[i], y1 = w.w[i + 1], d0 = w.dw[i], d1 = w.dw[i + 1];
    auto wq = [&](double t) { return abs_pow(hermite(t0, t1, y0, y1, d0, d1, t), q); };
    auto dwp = [&](double t) { return std::pow(std::abs(hermite_derivative(t0, t1, y0, y1, d0, d1, t)), p); };
    lhs += integrate_adaptive([&](double t) { return std::exp(wq(t) - t); }, t0, t1, 0.0, 1e-13).value;
    delta += integrate_adaptive(dwp, t0, t1, 0.0, 1e-13).value;
  }
  const double T = w.t.back();
  lhs += std::exp(abs_pow(w.w.back(), q) - T);
  rep.delta = delta;
  rep.lhs = lhs;
  if (!(delta < 1.0)) throw DomainError("sharp_estimate_check: delta = " + fmt17(delta) + " >= 1, the bound is vacuous");
  const double droot = std::pow(delta, 1.0 / (p - 1.0));
  rep.c = q * abs_pow(w.w.front(), q - 1.0);
  rep.gamma_p = delta * std::pow(1.0 - droot, 1.0 - p);
  const double expo = std::pow((p - 1.0) / p, p - 1.0) * std::pow(rep.c, p) * rep.gamma_p / p + digamma(p).value +
                      kEulerGamma;
  rep.rhs = std::exp(abs_pow(w.w.front(), q) - a) / (1.0 - droot) * std::exp(expo);
  rep.holds = rep.lhs <= rep.rhs * (1.0 + 1e-8);
  return rep;
}

/// Moser function w_j after t -> N t and scaling by c_N^{1/(k+1)} N^{N/(N+2)}:
/// j^{-2/(N+2)} t up to t = j, then j^{N/(N+2)}; sampled on [a, j].
inline HalfLineSample transformed_moser(double j, double a, const DimensionParams& params) {
  if (!(a > 0.0) || !(a < j)) throw DomainError("transformed_moser: need 0 < a < j");
  const double N = params.N;
  const double slope = std::pow(j, -2.0 / (N + 2));
  const double plateau = std::pow(j, N / (N + 2));
  return HalfLineSample{{a, j, j}, {slope * a, plateau, plateau}, {slope, slope, 0.0}};
}

struct ReportOptions {
  SolverOptions solver{};
  std::vector<double> eps_grid = default_eps_grid();
  std::vector<double> j_list;  // empty: ceil(mu_N) + {0, 5, 10, 15}
  double beta_factor = 1.2;
  bool dry_run = false;
};

struct CertificateReport {
  Json json;
  std::optional<WitnessResult> witness;
  std::optional<BlowupTable> blowup;
  std::optional<MultistartResult> extremal;
  std::vector<std::string> failures;

  [[nodiscard]] bool ok() const { return failures.empty(); }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Json scheme_json(const PanelScheme& s) {
  return Json{{"panels", s.panels}, {"nodes_per_panel", s.order}, {"t_max", s.t_max}, {"growth", s.growth}};
}

/// Runs the bound constants, witness scan, blow-up table, solver and
/// admissibility check; component failures are recorded, not thrown.
inline CertificateReport build_report(const PerturbationSpec& f, const DimensionParams& params,
                                      const ReportOptions& opts = {}) {
  CertificateReport rep;
  const PanelScheme& scheme = opts.solver.scheme;
  Json checks = Json::array();
  Json failures = Json::array();
  auto fail = [&](const std::string& component, const std::string& what) {
    failures.push_back(Json{{"component", component}, {"error", what}});
    rep.failures.push_back(component + ": " + what);
  };
  auto check = [&](const std::string& name, bool passed, Json detail) {
    checks.push_back(Json{{"name", name}, {"passed", passed}, {"detail", std::move(detail)}});
  };

  const double upper = concentration_upper(params);
  std::vector<double> j_list = opts.j_list;
  if (j_list.empty()) {
    const double j0 = std::ceil(params.mu_N);
    j_list = {j0, j0 + 5, j0 + 10, j0 + 15};
  }
  const double beta = opts.beta_factor * params.mu_N;

  Json witness_json, blowup_json, extremal_json, admissibility_json;
  if (opts.dry_run) {
    const auto zero = tm_integral(zero_profile(), f, params.mu_N, params, scheme);
    witness_json = Json{{"mode", "dry_run"}, {"value", zero.value}};
  } else {
    auto w_job = std::async(std::launch::async, [&] { return witness_lower_bound(f, params, opts.eps_grid, scheme); });
    auto b_job = std::async(std::launch::async, [&] { return blowup_table(j_list, beta, f, params, scheme); });
    auto s_job = std::async(std::launch::async, [&] {
      return solve_multistart(f, params, opts.solver, multistart_inits(opts.solver.multistart));
    });
    try {
      rep.witness = w_job.get();
      witness_json = rep.witness->to_json();
    } catch (const std::exception& e) {
      fail("witness", e.what());
    }
    try {
      rep.blowup = b_job.get();
      blowup_json = rep.blowup->to_json();
      check("blowup_above_bound", rep.blowup->all_above_bound, Json{{"beta", beta}});
    } catch (const std::exception& e) {
      fail("blowup", e.what());
    }
    try {
      rep.extremal = s_job.get();
      const auto& best = rep.extremal->selected();
      extremal_json = best.to_json();
      extremal_json["multistart"] = Json::array();
      for (const auto& s : rep.extremal->starts)
        extremal_json["multistart"].push_back(Json{{"init", s.init},
                                                   {"status", to_string(s.status)},
                                                   {"functional_value", s.functional_value},
                                                   {"el_residual", s.el_residual},
                                                   {"iterations", s.iterations}});
      extremal_json["selected"] = best.init;
      extremal_json["disagreement"] = rep.extremal->disagreement;
      if (!best.converged()) fail("extremal", "solver status " + to_string(best.status));
      const auto st = stationarity_probe(best, f, params, scheme, opts.solver.seed);
      extremal_json["stationarity"] = Json{{"seed", st.seed}, {"step", st.step}, {"max_abs", st.max_abs},
                                           {"derivatives", st.derivatives}};
      const auto rb = radial_bound_check(best.profile, params, scheme, 1e-6);
      extremal_json["radial_estimate"] = rb.to_json();
      check("extremal_converged", best.converged(), Json{{"el_residual", best.el_residual}});
      check("stationarity", st.max_abs < 1e-4, Json{{"max_abs", st.max_abs}});
      check("radial_estimate", rb.holds, Json{{"min_slack", rb.min_slack}});
      const auto adm = admissibility_check(lift(best, f, params), scheme);
      admissibility_json = adm.to_json();
      check("admissibility", adm.pass, Json{{"min_bracket_derivative", adm.min_value}});
      if (!adm.pass) fail("admissibility", "bracket derivative below tolerance");
    } catch (const std::exception& e) {
      fail("extremal", e.what());
    }
  }

  if (rep.witness) {
    check("witness_exceeds_concentration_upper", rep.witness->value > upper,
          Json{{"witness", rep.witness->value}, {"concentration_upper", upper}});
    if (rep.extremal && rep.extremal->selected().converged()) {
      const double F = rep.extremal->selected().functional_value;
      const bool ok = rep.witness->value <= F + 1e-8;
      check("witness_below_extremal", ok, Json{{"witness", rep.witness->value}, {"extremal", F}});
      if (!ok) fail("consistency", "witness exceeds the extremal functional value");
    }
  }

  Json j;
  j["schema"] = "tmlab.certificate/1";
  j["generated_at"] = utc_timestamp();
  j["params"] = params.to_json();
  j["perturbation"] = f.to_json();
  j["quadrature"] = scheme_json(scheme);
  j["concentration_upper"] = upper;
  j["witness"] = witness_json;
  j["blowup"] = blowup_json;
  j["extremal"] = extremal_json;
  j["admissibility"] = admissibility_json;
  j["checks"] = checks;
  j["failures"] = failures;
  Json files = Json::object();
  if (rep.witness) files["witness"] = "witness.csv";
  if (rep.blowup) files["blowup"] = "blowup.csv";
  if (rep.extremal) {
    files["profile"] = "profile.csv";
    files["history"] = "history.csv";
  }
  j["files"] = files;
  rep.json = std::move(j);
  return rep;
}

}  // namespace tmlab
