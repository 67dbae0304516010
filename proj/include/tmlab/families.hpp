#pragma once

// Moser functions w_j and the concentration family v_eps.

#include <cmath>
#include <string>
#include <vector>

#include "tmlab/functionals.hpp"
#include "tmlab/model.hpp"
#include "tmlab/profiles.hpp"
#include "tmlab/special_fn.hpp"

namespace tmlab {

/// Plateau height (j / mu_N)^{N/(N+2)} of w_j.
inline double moser_plateau(double j, const DimensionParams& params) {
  return std::pow(j / params.mu_N, params.N / (params.N + 2.0));
}

/// w_j: linear in t with slope N mu^{-N/(N+2)} j^{-2/(N+2)} up to t = j/N, then constant.
inline RadialProfile moser(double j, const DimensionParams& params) {
  if (!(j > 0.0) || !std::isfinite(j)) throw DomainError("moser: j must be positive");
  const double N = params.N;
  const double slope = N * std::pow(params.mu_N, -N / (N + 2)) * std::pow(j, -2.0 / (N + 2));
  const double kink = j / N;
  const double plateau = moser_plateau(j, params);
  ClosedForm cf;
  cf.value = [=](double t) { return t < kink ? slope * t : plateau; };
  cf.slope = [=](double t) { return t < kink ? slope : 0.0; };
  cf.curvature = [](double) { return 0.0; };
  cf.breakpoints = {kink};
  return RadialProfile(std::move(cf), "moser:j=" + fmt17(j));
}

struct ConcParams {
  double eps = 0.0;
  double L = 0.0;      // -ln eps
  double a_eps = 0.0;  // a_N L^2
  double c = 0.0;
  double b = 0.0;
  double kink_t = 0.0;  // -ln(eps L)
  double kink_r = 0.0;  // eps L
  double continuity_residual = 0.0;
  double mu_b = 0.0;
  double mu_b_limit = 0.0;  // -(N/2)[Psi(N/2+1) + gamma]

  [[nodiscard]] Json to_json() const {
    Json j;
    j["eps"] = eps;
    j["L"] = L;
    j["a_eps"] = a_eps;
    j["c"] = c;
    j["b"] = b;
    j["kink_r"] = kink_r;
    j["continuity_residual"] = continuity_residual;
    j["mu_b"] = mu_b;
    j["mu_b_limit"] = mu_b_limit;
    return j;
  }
};

namespace detail {

struct ConcBranches {
  double outer_slope;  // N / (mu c^{2/N})
  double c, b, c2n, mu, N, a_N, eps2;

  [[nodiscard]] double s_of(double t) const { return a_N * std::exp(-2 * t) / eps2; }
  [[nodiscard]] double inner_value(double t) const {
    return c - (N / (2 * mu) * std::log1p(s_of(t)) + b) / c2n;
  }
};

}  // namespace detail

/// Constants of v_eps: c from the normalisation with the exact finite-a_eps
/// remainder, b from continuity at r = eps L.
inline ConcParams conc_params(double eps, const DimensionParams& params) {
  if (!(eps > 0.0) || !(eps <= 0.1)) throw DomainError("conc_family: eps must lie in (0, 0.1], got " + fmt17(eps));
  ConcParams cp;
  cp.eps = eps;
  cp.L = -std::log(eps);
  cp.kink_r = eps * cp.L;
  if (!(cp.kink_r < std::exp(-1.0)))
    throw DomainError("conc_family: eps L_eps = " + fmt17(cp.kink_r) + " must be below 1/e");
  cp.kink_t = -std::log(cp.kink_r);
  cp.a_eps = params.a_N * cp.L * cp.L;
  const double N = params.N;
  const double mu = params.mu_N;
  const double p = params.k + 1.0;
  const double psi_gamma = digamma(p).value + kEulerGamma;
  const double I1 = std::log1p(cp.a_eps) - psi_gamma + lt1_remainder(cp.a_eps, p).value;
  const double A = N / 2 * (I1 - 2 * std::log(cp.kink_r));
  cp.c = std::pow(A / mu, N / (N + 2));
  cp.mu_b = A - N / 2 * std::log1p(cp.a_eps) + N * std::log(cp.kink_r);
  cp.b = cp.mu_b / mu;
  cp.mu_b_limit = -N / 2 * psi_gamma;
  const double c2n = std::pow(cp.c, 2 / N);
  const detail::ConcBranches br{N / (mu * c2n), cp.c, cp.b, c2n, mu, N, params.a_N, eps * eps};
  cp.continuity_residual = std::abs(br.outer_slope * cp.kink_t - br.inner_value(cp.kink_t));
  return cp;
}

inline RadialProfile conc_family(double eps, const DimensionParams& params) {
  const ConcParams cp = conc_params(eps, params);
  const double N = params.N;
  const double c2n = std::pow(cp.c, 2 / N);
  const detail::ConcBranches br{N / (params.mu_N * c2n), cp.c, cp.b, c2n, params.mu_N, N, params.a_N, eps * eps};
  const double tk = cp.kink_t;
  ClosedForm cf;
  cf.value = [br, tk](double t) { return t <= tk ? br.outer_slope * t : br.inner_value(t); };
  cf.slope = [br, tk](double t) {
    if (t <= tk) return br.outer_slope;
    const double s = br.s_of(t);
    return br.outer_slope * s / (1 + s);
  };
  cf.curvature = [br, tk](double t) {
    if (t <= tk) return 0.0;
    const double s = br.s_of(t);
    return br.outer_slope * (-2 * s) / ((1 + s) * (1 + s));
  };
  cf.breakpoints = {tk};
  return RadialProfile(std::move(cf), "conc:eps=" + fmt17(eps));
}

struct BlowupRow {
  double j = 0.0;
  double plateau = 0.0;
  FunctionalValue value;
  double lower_bound = 0.0;  // e^{j (beta/mu - 1)} / N
};

struct BlowupTable {
  double beta = 0.0;
  std::vector<BlowupRow> rows;
  bool all_above_bound = true;
  bool strictly_increasing = true;

  [[nodiscard]] CsvTable csv() const {
    CsvTable t({"j", "plateau", "value", "lower_bound", "refinement_delta", "blowup"});
    for (const auto& r : rows)
      t.add_row({fmt17(r.j), fmt17(r.plateau), fmt17(r.value.value), fmt17(r.lower_bound),
                 fmt17(r.value.refinement_delta), r.value.blowup ? "1" : "0"});
    return t;
  }

  [[nodiscard]] Json to_json() const {
    Json j;
    j["beta"] = beta;
    Json rs = Json::array();
    for (const auto& r : rows)
      rs.push_back({{"j", r.j}, {"value", r.value.blowup ? Json("inf") : Json(r.value.value)},
                    {"lower_bound", r.lower_bound}, {"blowup", r.value.blowup}});
    j["rows"] = rs;
    j["all_above_bound"] = all_above_bound;
    j["strictly_increasing"] = strictly_increasing;
    return j;
  }
};

/// tm_integral(w_j, f, beta) against e^{j(beta/mu_N - 1)}/N along j_list.
inline BlowupTable blowup_table(const std::vector<double>& j_list, double beta, const PerturbationSpec& f,
                                const DimensionParams& params, const PanelScheme& scheme = {}) {
  if (!(beta >= params.mu_N)) throw DomainError("blowup_table: beta must be at least mu_N");
  for (std::size_t i = 0; i + 1 < j_list.size(); ++i)
    if (!(j_list[i + 1] > j_list[i])) throw DomainError("blowup_table: j_list must be strictly increasing");
  BlowupTable tab;
  tab.beta = beta;
  for (double j : j_list) {
    if (!(j > 0.0)) throw DomainError("blowup_table: j must be positive");
    BlowupRow row;
    row.j = j;
    row.plateau = moser_plateau(j, params);
    if (!f.is_zero() && row.plateau < 1.0)
      throw DomainError("blowup_table: j = " + fmt17(j) + " gives plateau below 1 (need j >= mu_N for nonzero f)");
    row.value = tm_integral(moser(j, params), f, beta, params, scheme);
    row.lower_bound = std::exp(j * (beta / params.mu_N - 1.0)) / params.N;
    if (!row.value.blowup && row.value.value < row.lower_bound * (1.0 - 1e-12)) tab.all_above_bound = false;
    if (!tab.rows.empty() && !(row.value.value > tab.rows.back().value.value)) tab.strictly_increasing = false;
    tab.rows.push_back(row);
  }
  return tab;
}

inline const std::vector<double>& default_eps_grid() {
  static const std::vector<double> grid{1e-3, 1e-4, 1e-5, 1e-6, 1e-8};
  return grid;
}

struct WitnessRow {
  double eps = 0.0;
  double norm = 0.0;
  FunctionalValue value;
};

struct WitnessResult {
  double value = 0.0;
  double argmax_eps = 0.0;
  std::vector<WitnessRow> rows;

  [[nodiscard]] CsvTable csv() const {
    CsvTable t({"eps", "norm", "value", "refinement_delta"});
    for (const auto& r : rows) t.add_row(std::vector<double>{r.eps, r.norm, r.value.value, r.value.refinement_delta});
    return t;
  }

  [[nodiscard]] Json to_json() const {
    Json j;
    j["value"] = value;
    j["argmax_eps"] = argmax_eps;
    Json rs = Json::array();
    for (const auto& r : rows)
      rs.push_back({{"eps", r.eps}, {"norm", r.norm}, {"value", r.value.value},
                    {"refinement_delta", r.value.refinement_delta}});
    j["rows"] = rs;
    return j;
  }
};

/// max over eps of tm_integral(v_eps, f, mu_N).
inline WitnessResult witness_lower_bound(const PerturbationSpec& f, const DimensionParams& params,
                                         const std::vector<double>& eps_grid = default_eps_grid(),
                                         const PanelScheme& scheme = {}) {
  if (eps_grid.empty()) throw DomainError("witness_lower_bound: empty eps grid");
  WitnessResult out;
  out.value = -std::numeric_limits<double>::infinity();
  for (double eps : eps_grid) {
    const auto v = conc_family(eps, params);
    WitnessRow row;
    row.eps = eps;
    row.norm = x1_norm(v, params, scheme);
    row.value = tm_integral(v, f, params.mu_N, params, scheme);
    if (row.value.value > out.value) {
      out.value = row.value.value;
      out.argmax_eps = eps;
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace tmlab
