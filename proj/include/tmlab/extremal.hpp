#pragma once

// Euler-Lagrange fixed point for maximisers of the functional on the unit
// sphere of X_1. In t = -ln r the equation reads
//   c_N S^k = mu_N lambda G,   G(t) = int_t^inf e^{-N tau} q V^{q-1} e^{mu V^q} dtau,
// with S = V' >= 0 and q = q0 + f.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tmlab/families.hpp"
#include "tmlab/functionals.hpp"
#include "tmlab/model.hpp"
#include "tmlab/profiles.hpp"
#include "tmlab/quadrature.hpp"

namespace tmlab {

enum class SolveStatus { converged, max_iterations, no_progress, numeric_failure };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::no_progress: return "no_progress";
    case SolveStatus::numeric_failure: return "numeric_failure";
  }
  return "?";
}

struct SolverOptions {
  std::string init = "conc:1e-3";  // conc:EPS | linear | quadratic | moser:J | path to a profile CSV
  double damping = 0.5;            // mixing parameter theta in [0, 1]
  double tol = 1e-10;              // sup-node change of V and S
  int maxiter = 500;
  int anderson_depth = 5;  // 0 gives the plain damped blend
  double residual_tol = 1e-6;
  PanelScheme scheme{};
  int multistart = 1;
  std::uint64_t seed = 12345;  // stationarity probe directions
};

struct HistoryEntry {
  int iteration = 0;
  double change = 0.0;
  double el_residual = 0.0;
  double functional = 0.0;
  double lambda = 0.0;
};

struct RegularityReport {
  double slope_at_origin = 0.0;         // v'(r) at the innermost node
  double slope_ratio_limit = 0.0;       // v'(r)/r at the innermost node
  double theta_limit_formula = 0.0;     // closed-form limit of v'(r)/r
  bool hessian_trace_ok = false;        // v'' finite at every node
  std::vector<double> decay_values;     // r |v|^{2/N} e^{mu |v|^{q0}}, 10 innermost nodes, innermost first
  double decay_check = 0.0;             // max of decay_values
  bool decay_monotone = false;          // innermost value below the 10th
  double f0_constant = 0.0;             // sup (q0 + f) |v|^f

  [[nodiscard]] Json to_json() const {
    Json j;
    j["slope_at_origin"] = slope_at_origin;
    j["slope_ratio_limit"] = slope_ratio_limit;
    j["theta_limit_formula"] = theta_limit_formula;
    j["hessian_trace_ok"] = hessian_trace_ok;
    j["decay_values"] = decay_values;
    j["decay_check"] = decay_check;
    j["decay_monotone"] = decay_monotone;
    j["f0_constant"] = f0_constant;
    return j;
  }
};

struct StationarityReport {
  std::vector<double> derivatives;  // central differences along each direction
  double max_abs = 0.0;
  double step = 1e-5;
  std::uint64_t seed = 0;
};

struct ExtremalSolution {
  SolveStatus status = SolveStatus::max_iterations;
  std::string init;
  RadialProfile profile = zero_profile();
  double lambda = 0.0;
  double functional_value = 0.0;
  double el_residual = 0.0;
  double norm = 0.0;
  int iterations = 0;
  std::vector<HistoryEntry> history;
  RegularityReport diagnostics;

  [[nodiscard]] bool converged() const { return status == SolveStatus::converged; }

  [[nodiscard]] Json to_json() const {
    Json j;
    j["status"] = to_string(status);
    j["init"] = init;
    j["lambda"] = lambda;
    j["functional_value"] = functional_value;
    j["el_residual"] = el_residual;
    j["norm"] = norm;
    j["iterations"] = iterations;
    j["diagnostics"] = diagnostics.to_json();
    return j;
  }

  [[nodiscard]] CsvTable history_csv() const {
    CsvTable t({"iteration", "change", "el_residual", "functional", "lambda"});
    for (const auto& h : history)
      t.add_row(std::vector<double>{static_cast<double>(h.iteration), h.change, h.el_residual, h.functional, h.lambda});
    return t;
  }
};

/// Discretised operator on a fixed grid: functional, multiplier and the
/// Euler-Lagrange map, all from node slopes S.
class ElOperator {
 public:
  struct Eval {
    std::vector<double> V;
    double V_end = 0.0;  // V at t_max, held beyond
    std::vector<double> g;  // e^{-N t} q V^{q-1} e^{mu V^q}
    std::vector<double> G;  // int_t^inf g
    double G_start = 0.0;   // G(0)
    double G_end = 0.0;     // G(t_max), the tail
    double functional = 0.0;
    double lambda = 0.0;  // (mu int e^{-N t} q V^q e^{mu V^q})^{-1}
  };

  ElOperator(const PerturbationSpec& f, const DimensionParams& params, const PanelScheme& scheme)
      : params_(params), grid_(PanelGrid::graded(scheme, 0.0, scheme.t_max)) {
    const auto nodes = grid_.nodes();
    q_ = exponents_on(grid_, f, params);
    decay_.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) decay_[i] = std::exp(-params.N * nodes[i]);
    q_end_ = params.q0() + f.eval_t(grid_.upper());
    decay_end_ = std::exp(-params.N * grid_.upper()) / params.N;
  }

  [[nodiscard]] const PanelGrid& grid() const { return grid_; }
  [[nodiscard]] const DimensionParams& params() const { return params_; }
  [[nodiscard]] const std::vector<double>& exponents() const { return q_; }

  [[nodiscard]] double norm(std::span<const double> S) const {
    const auto w = grid_.weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) sum += w[i] * std::pow(std::abs(S[i]), params_.k + 1);
    return std::pow(params_.c_N * sum, 1.0 / (params_.k + 1));
  }

  /// Functional of the profile with slopes S (node sum plus plateau tail).
  [[nodiscard]] double functional(std::span<const double> S) const {
    const auto V = grid_.cumulative(S);
    const double VT = grid_.integrate(S);
    const auto w = grid_.weights();
    const double mu = params_.mu_N;
    double F = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) F += w[i] * decay_[i] * std::exp(exponent(mu, V[i], q_[i]));
    return F + decay_end_ * std::exp(exponent(mu, VT, q_end_));
  }

  [[nodiscard]] Eval evaluate(std::span<const double> S) const {
    Eval e;
    e.V = grid_.cumulative(S);
    e.V_end = grid_.integrate(S);
    const auto w = grid_.weights();
    const double mu = params_.mu_N;
    const std::size_t n = S.size();
    e.g.resize(n);
    double lam_inv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double Vq = abs_pow(e.V[i], q_[i]);
      const double ex = exponent(mu, e.V[i], q_[i]);
      const double E = std::exp(ex);
      e.g[i] = decay_[i] * q_[i] * abs_pow(e.V[i], q_[i] - 1.0) * E;
      e.functional += w[i] * decay_[i] * E;
      lam_inv += w[i] * decay_[i] * q_[i] * Vq * E;
    }
    const double E_end = std::exp(exponent(mu, e.V_end, q_end_));
    e.functional += decay_end_ * E_end;
    e.G_end = decay_end_ * q_end_ * abs_pow(e.V_end, q_end_ - 1.0) * E_end;
    lam_inv += decay_end_ * q_end_ * abs_pow(e.V_end, q_end_) * E_end;
    e.G = grid_.cumulative_reverse(e.g);
    for (auto& x : e.G) x += e.G_end;
    e.G_start = grid_.integrate(e.g) + e.G_end;
    if (!(lam_inv > 0.0) || !std::isfinite(lam_inv))
      throw NumericError("lambda undefined: the multiplier integral vanishes (zero profile?)");
    e.lambda = 1.0 / (mu * lam_inv);
    return e;
  }

  /// Slopes solving c_N S^k = mu lambda G for the given evaluation.
  [[nodiscard]] double el_slope_from_G(double G, double lambda) const {
    return std::pow(std::max(params_.mu_N * lambda * G / params_.c_N, 0.0), 1.0 / params_.k);
  }

  [[nodiscard]] std::vector<double> el_map(const Eval& e) const {
    std::vector<double> out(e.G.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = el_slope_from_G(e.G[i], e.lambda);
    return out;
  }

  /// max over nodes of |c_N S^k - mu lambda G| / max(c_N S^k, mu lambda G).
  [[nodiscard]] double el_residual(std::span<const double> S, const Eval& e) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double lhs = params_.c_N * std::pow(std::max(S[i], 0.0), params_.k);
      const double rhs = params_.mu_N * e.lambda * e.G[i];
      const double scale = std::max(std::abs(lhs), std::abs(rhs));
      if (scale < 1e-300) continue;
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
  }

 private:
  static double exponent(double mu, double V, double q) {
    const double ex = mu * abs_pow(V, q);
    if (!(ex <= kBlowupExponent)) throw NumericError("exponent overflow: mu |v|^q = " + fmt17(ex) + " exceeds 700");
    return ex;
  }

  DimensionParams params_;
  PanelGrid grid_;
  std::vector<double> q_;
  std::vector<double> decay_;
  double q_end_ = 0.0;
  double decay_end_ = 0.0;
};

/// Profile named by an init string, or read from a CSV path.
inline RadialProfile initial_profile(const std::string& init, const DimensionParams& params) {
  auto arg = [&](std::size_t n) { return parse_double(init.substr(n), "init '" + init + "'"); };
  if (init.rfind("conc:", 0) == 0) {
    try {
      return conc_family(arg(5), params);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (init.rfind("moser:", 0) == 0) {
    try {
      return moser(arg(6), params);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (init == "linear") return linear_profile();
  if (init == "quadratic") return quadratic_profile();
  if (init.empty()) throw ConfigError("empty init");
  if (!std::filesystem::exists(init))
    throw ConfigError("init '" + init + "' is neither conc:EPS, moser:J, linear, quadratic nor an existing profile CSV");
  return read_profile_csv(init);
}

namespace detail {

// min ||r - dF gamma|| by modified Gram-Schmidt, dropping near-dependent columns.
inline std::vector<double> anderson_coefficients(const std::vector<std::vector<double>>& dF,
                                                 const std::vector<double>& r) {
  const std::size_t m = dF.size();
  const std::size_t n = r.size();
  std::vector<std::vector<double>> Q;
  std::vector<std::vector<double>> R(m, std::vector<double>(m, 0.0));
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> v = dF[j];
    double orig = 0.0;
    for (double x : v) orig += x * x;
    orig = std::sqrt(orig);
    for (std::size_t a = 0; a < kept.size(); ++a) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += Q[a][i] * v[i];
      R[a][j] = d;
      for (std::size_t i = 0; i < n; ++i) v[i] -= d * Q[a][i];
    }
    double nv = 0.0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    if (!(nv > 1e-12 * orig) || nv == 0.0) continue;
    for (auto& x : v) x /= nv;
    R[kept.size()][j] = nv;
    Q.push_back(std::move(v));
    kept.push_back(j);
  }
  std::vector<double> gamma(m, 0.0);
  const std::size_t p = kept.size();
  std::vector<double> qtr(p);
  for (std::size_t a = 0; a < p; ++a) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += Q[a][i] * r[i];
    qtr[a] = d;
  }
  for (std::size_t a = p; a-- > 0;) {
    double s = qtr[a];
    for (std::size_t b = a + 1; b < p; ++b) s -= R[a][kept[b]] * gamma[kept[b]];
    gamma[kept[a]] = s / R[a][kept[a]];
  }
  return gamma;
}

inline double sup_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace detail

/// theta-limit: lim v'(r)/r = -((mu lambda / (N c_N)) q0 v0^{2/N} e^{mu v0^{q0}})^{1/k}.
inline double theta_limit(double v0, double lambda, const DimensionParams& params) {
  const double h0 = params.q0() * abs_pow(v0, 2.0 / params.N) * std::exp(params.mu_N * abs_pow(v0, params.q0()));
  return -std::pow(params.mu_N * lambda / (params.N * params.c_N) * h0, 1.0 / params.k);
}

namespace detail {

inline RegularityReport regularity(const ElOperator& op, const ElOperator::Eval& e, std::span<const double> S,
                                   const PerturbationSpec& f) {
  const auto& P = op.params();
  const auto nodes = op.grid().nodes();
  const std::size_t n = nodes.size();
  RegularityReport rep;
  const double t_in = nodes[n - 1];
  rep.slope_at_origin = -S[n - 1] * std::exp(t_in);
  rep.slope_ratio_limit = -S[n - 1] * std::exp(2 * t_in);
  rep.theta_limit_formula = theta_limit(e.V_end, e.lambda, P);
  rep.hessian_trace_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    // v'' = e^{2t} (S - S g / (k G))
    const double vpp = std::exp(2 * nodes[i]) * (S[i] - S[i] * e.g[i] / (P.k * e.G[i]));
    if (!std::isfinite(vpp)) rep.hessian_trace_ok = false;
  }
  const std::size_t count = std::min<std::size_t>(10, n);
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t i = n - 1 - c;
    const double V = e.V[i];
    rep.decay_values.push_back(std::exp(-nodes[i]) * abs_pow(V, 2.0 / P.N) * std::exp(P.mu_N * abs_pow(V, P.q0())));
  }
  rep.decay_check = *std::max_element(rep.decay_values.begin(), rep.decay_values.end());
  rep.decay_monotone = rep.decay_values.front() < rep.decay_values.back();
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = f.eval_t(nodes[i]);
    rep.f0_constant = std::max(rep.f0_constant, (P.q0() + fi) * abs_pow(e.V[i], fi));
  }
  return rep;
}

inline RadialProfile solution_profile(const ElOperator& op, const ElOperator::Eval& e, std::span<const double> S,
                                      const std::string& label) {
  const auto nodes = op.grid().nodes();
  const std::size_t n = nodes.size();
  std::vector<double> t(n + 2), v(n + 2), s(n + 2);
  t[0] = 0.0;
  v[0] = 0.0;
  s[0] = std::max(op.el_slope_from_G(e.G_start, e.lambda), S[0]);
  for (std::size_t i = 0; i < n; ++i) {
    t[i + 1] = nodes[i];
    v[i + 1] = e.V[i];
    s[i + 1] = S[i];
  }
  t[n + 1] = op.grid().upper();
  v[n + 1] = e.V_end;
  s[n + 1] = std::min(op.el_slope_from_G(e.G_end, e.lambda), S[n - 1]);
  return RadialProfile::from_samples(std::move(t), std::move(v), std::move(s), label);
}

}  // namespace detail

/// Damped fixed point with Anderson mixing: S <- normalise(EL map(S)).
inline ExtremalSolution solve_extremal(const PerturbationSpec& f, const DimensionParams& params,
                                       const SolverOptions& opts = {}) {
  if (!(opts.damping >= 0.0 && opts.damping <= 1.0)) throw ConfigError("damping must lie in [0, 1]");
  if (!(opts.tol > 0.0)) throw ConfigError("tol must be positive");
  if (opts.maxiter < 1) throw ConfigError("maxiter must be at least 1");
  if (opts.anderson_depth < 0) throw ConfigError("anderson_depth must be nonnegative");
  const ElOperator op(f, params, opts.scheme);
  const auto& grid = op.grid();
  const std::size_t n = grid.size();

  const RadialProfile init = initial_profile(opts.init, params);
  std::vector<double> S = init.on(grid).S;
  for (auto& x : S) x = std::max(x, 0.0);
  {
    const double nrm = op.norm(S);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericError("initial profile has zero or non-finite norm");
    for (auto& x : S) x /= nrm;
  }

  ExtremalSolution sol;
  sol.init = opts.init;
  const double theta = opts.damping;
  std::vector<std::vector<double>> X, Rs;
  std::vector<double> best_S = S;
  double best_res = std::numeric_limits<double>::infinity();
  std::vector<double> prev_V;

  auto finish = [&](SolveStatus status, const std::vector<double>& Sfin) {
    const auto e = op.evaluate(Sfin);
    sol.status = status;
    sol.lambda = e.lambda;
    sol.functional_value = e.functional;
    sol.el_residual = op.el_residual(Sfin, e);
    sol.norm = op.norm(Sfin);
    sol.profile = detail::solution_profile(op, e, Sfin, "extremal:" + opts.init);
    sol.diagnostics = detail::regularity(op, e, Sfin, f);
  };

  for (int it = 1; it <= opts.maxiter; ++it) {
    ElOperator::Eval e;
    try {
      e = op.evaluate(S);
    } catch (const NumericError&) {
      finish(SolveStatus::numeric_failure, best_S);
      return sol;
    }
    const double res_now = op.el_residual(S, e);
    if (res_now < best_res) {
      best_res = res_now;
      best_S = S;
    }
    std::vector<double> mapped = op.el_map(e);
    const double mn = op.norm(mapped);
    if (!(mn > 0.0) || !std::isfinite(mn)) {
      finish(SolveStatus::numeric_failure, best_S);
      return sol;
    }
    for (auto& x : mapped) x /= mn;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = mapped[i] - S[i];

    X.push_back(S);
    Rs.push_back(r);
    if (X.size() > static_cast<std::size_t>(opts.anderson_depth) + 1) {
      X.erase(X.begin());
      Rs.erase(Rs.begin());
    }
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = S[i] + theta * r[i];
    if (X.size() > 1 && theta > 0.0) {
      std::vector<std::vector<double>> dF(X.size() - 1, std::vector<double>(n));
      for (std::size_t j = 0; j + 1 < X.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) dF[j][i] = Rs[j + 1][i] - Rs[j][i];
      const auto gam = detail::anderson_coefficients(dF, r);
      for (std::size_t j = 0; j + 1 < X.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) next[i] -= (X[j + 1][i] - X[j][i] + theta * dF[j][i]) * gam[j];
    }
    for (auto& x : next) x = std::max(x, 0.0);
    double nn = op.norm(next);
    if (!(nn > 0.0) || !std::isfinite(nn)) {
      // Mixed step unusable: plain damped step, history reset.
      for (std::size_t i = 0; i < n; ++i) next[i] = std::max(S[i] + theta * r[i], 0.0);
      nn = op.norm(next);
      X.clear();
      Rs.clear();
    }
    for (auto& x : next) x /= nn;

    const auto next_V = grid.cumulative(next);
    if (prev_V.empty()) prev_V = grid.cumulative(S);
    const double change = std::max(detail::sup_diff(next, S), detail::sup_diff(next_V, prev_V));
    sol.history.push_back({it, change, res_now, e.functional, e.lambda});
    sol.iterations = it;
    S = std::move(next);
    prev_V = next_V;
    if (change < opts.tol) {
      // Final plain map step.
      try {
        auto polished = op.el_map(op.evaluate(S));
        const double pn = op.norm(polished);
        if (pn > 0.0 && std::isfinite(pn)) {
          for (auto& x : polished) x /= pn;
          S = std::move(polished);
        }
      } catch (const NumericError&) {
      }
      finish(SolveStatus::converged, S);
      if (sol.el_residual > opts.residual_tol) {
        if (best_res < sol.el_residual) finish(SolveStatus::no_progress, best_S);
        sol.status = SolveStatus::no_progress;
      }
      return sol;
    }
  }
  finish(SolveStatus::max_iterations, best_S);
  return sol;
}

struct MultistartResult {
  std::vector<ExtremalSolution> starts;
  std::size_t best = 0;
  bool any_converged = false;
  bool disagreement = false;  // converged starts differ in functional value by more than 1e-6
  double spread = 0.0;

  [[nodiscard]] const ExtremalSolution& selected() const { return starts.at(best); }
};

inline std::vector<std::string> multistart_inits(int count) {
  static const std::vector<std::string> all{"conc:1e-3", "conc:1e-5", "linear", "conc:1e-4", "quadratic", "conc:1e-6"};
  if (count < 1 || count > static_cast<int>(all.size()))
    throw ConfigError("multistart count must lie in [1, " + std::to_string(all.size()) + "]");
  return {all.begin(), all.begin() + count};
}

/// Independent solves from several initial profiles, run concurrently; the
/// best converged functional value is selected.
inline MultistartResult solve_multistart(const PerturbationSpec& f, const DimensionParams& params,
                                         const SolverOptions& opts, const std::vector<std::string>& inits) {
  if (inits.empty()) throw ConfigError("multistart: no initial profiles");
  std::vector<std::future<ExtremalSolution>> jobs;
  for (const auto& init : inits) {
    SolverOptions o = opts;
    o.init = init;
    jobs.push_back(std::async(std::launch::async, [&f, &params, o] { return solve_extremal(f, params, o); }));
  }
  MultistartResult out;
  for (auto& j : jobs) out.starts.push_back(j.get());
  double best_val = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < out.starts.size(); ++i) {
    const auto& s = out.starts[i];
    if (!s.converged()) continue;
    out.any_converged = true;
    lo = std::min(lo, s.functional_value);
    hi = std::max(hi, s.functional_value);
    if (s.functional_value > best_val) {
      best_val = s.functional_value;
      out.best = i;
    }
  }
  if (!out.any_converged) {
    double best_res = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.starts.size(); ++i)
      if (out.starts[i].el_residual < best_res) {
        best_res = out.starts[i].el_residual;
        out.best = i;
      }
  } else {
    out.spread = hi - lo;
    out.disagreement = out.spread > 1e-6;
  }
  return out;
}

/// lambda = (mu_N int_0^1 r^{N-1} q |v|^q e^{mu_N |v|^q} dr)^{-1}.
inline double lambda_of(const RadialProfile& v, const PerturbationSpec& f, const DimensionParams& params,
                        const PanelScheme& scheme = {}) {
  const auto grid = profile_grid(v, scheme);
  const auto smp = v.on(grid);
  const auto q = exponents_on(grid, f, params);
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  const double mu = params.mu_N;
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double Vq = abs_pow(smp.V[i], q[i]);
    sum += w[i] * std::exp(-params.N * nodes[i]) * q[i] * Vq * std::exp(mu * Vq);
  }
  const double T = grid.upper();
  const double qT = params.q0() + f.eval_t(T);
  const double VqT = abs_pow(v.value_t(T), qT);
  sum += std::exp(-params.N * T) / params.N * qT * VqT * std::exp(mu * VqT);
  if (!(sum > 0.0) || !std::isfinite(sum)) throw NumericError("lambda_of: multiplier integral is zero (zero profile?)");
  return 1.0 / (mu * sum);
}

/// G(t) = int_0^r s^{N-1} q |v|^{q-1} e^{mu |v|^q} ds, r = e^{-t}.
inline double el_inner_integral(const RadialProfile& v, double t, const PerturbationSpec& f,
                                const DimensionParams& params, const PanelScheme& scheme = {}) {
  if (!(t >= 0.0)) throw DomainError("el_inner_integral: t must be nonnegative");
  const double T = scheme.t_max;
  const double mu = params.mu_N;
  auto h = [&](double tau, double V) {
    const double q = params.q0() + f.eval_t(tau);
    return q * abs_pow(V, q - 1.0) * std::exp(mu * abs_pow(V, q));
  };
  double sum = 0.0;
  if (t < T) {
    const auto bp = v.breakpoints();
    const auto grid = PanelGrid::graded(scheme, t, T, bp);
    const auto nodes = grid.nodes();
    const auto w = grid.weights();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      sum += w[i] * std::exp(-params.N * nodes[i]) * h(nodes[i], v.value_t(nodes[i]));
  }
  const double t_tail = std::max(t, T);
  sum += std::exp(-params.N * t_tail) / params.N * h(t_tail, v.value_t(t_tail));
  return sum;
}

/// v'(r) = -(mu_N lambda G / (c_N r^{N-k}))^{1/k}; 0 at r = 0.
inline double el_slope(const RadialProfile& v, double r, double lambda, const PerturbationSpec& f,
                       const DimensionParams& params, const PanelScheme& scheme = {}) {
  if (!(lambda > 0.0)) throw DomainError("el_slope: lambda must be positive");
  if (!(r >= 0.0) || !(r <= 1.0)) throw DomainError("el_slope: r outside [0, 1]");
  if (r == 0.0) return 0.0;
  const double t = -std::log(r);
  const double G = el_inner_integral(v, t, f, params, scheme);
  return -std::pow(params.mu_N * lambda * G / params.c_N, 1.0 / params.k) * std::exp(t);
}

/// v''(r) from the Euler-Lagrange equation; r = 0 gives the theta-limit.
inline double second_derivative(const ExtremalSolution& sol, double r, const PerturbationSpec& f,
                                const DimensionParams& params, const PanelScheme& scheme = {}) {
  if (!(r >= 0.0) || !(r <= 1.0)) throw DomainError("second_derivative: r outside [0, 1]");
  const auto& v = sol.profile;
  if (r == 0.0) return theta_limit(v.sampled().v.back(), sol.lambda, params);
  const double t = -std::log(r);
  const double G = el_inner_integral(v, t, f, params, scheme);
  const double q = params.q0() + f.eval_t(t);
  const double V = v.value_t(t);
  const double g = std::exp(-params.N * t) * q * abs_pow(V, q - 1.0) * std::exp(params.mu_N * abs_pow(V, q));
  const double S = std::pow(params.mu_N * sol.lambda * G / params.c_N, 1.0 / params.k);
  return std::exp(2 * t) * S * (1.0 - g / (params.k * G));
}

namespace detail {

// Uniform double in [0, 1) from the fully specified mt19937_64 stream.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// Central differences of the discretised functional along random unit-norm
/// directions tangent to the constraint at the solution.
inline StationarityReport stationarity_probe(const ExtremalSolution& sol, const PerturbationSpec& f,
                                             const DimensionParams& params, const PanelScheme& scheme = {},
                                             std::uint64_t seed = 12345, int directions = 5, double step = 1e-5) {
  const ElOperator op(f, params, scheme);
  const auto& grid = op.grid();
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  const std::size_t n = nodes.size();
  const std::vector<double> S = sol.profile.on(grid).S;
  std::vector<double> Sk(n);
  for (std::size_t i = 0; i < n; ++i) Sk[i] = std::pow(std::max(S[i], 0.0), params.k);
  double Sk_S = 0.0;
  for (std::size_t i = 0; i < n; ++i) Sk_S += w[i] * Sk[i] * S[i];
  if (!(Sk_S > 0.0)) throw NumericError("stationarity_probe: zero solution");

  std::mt19937_64 rng(seed);
  StationarityReport rep;
  rep.step = step;
  rep.seed = seed;
  for (int d = 0; d < directions; ++d) {
    std::array<double, 4> amp{}, rate{};
    for (int j = 0; j < 4; ++j) {
      amp[j] = 2.0 * detail::unit_uniform(rng) - 1.0;
      rate[j] = 0.5 + 3.5 * detail::unit_uniform(rng);
    }
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
      double x = 0.0;
      for (int j = 0; j < 4; ++j) x += amp[j] * std::exp(-rate[j] * nodes[i]);
      h[i] = x;
    }
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += w[i] * Sk[i] * h[i];
    for (std::size_t i = 0; i < n; ++i) h[i] -= proj / Sk_S * S[i];
    const double hn = op.norm(h);
    for (auto& x : h) x /= hn;
    std::vector<double> plus(n), minus(n);
    for (std::size_t i = 0; i < n; ++i) {
      plus[i] = S[i] + step * h[i];
      minus[i] = S[i] - step * h[i];
    }
    const double dF = (op.functional(plus) - op.functional(minus)) / (2 * step);
    rep.derivatives.push_back(dF);
    rep.max_abs = std::max(rep.max_abs, std::abs(dF));
  }
  return rep;
}

}  // namespace tmlab
