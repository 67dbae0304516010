#pragma once

// The (super)critical functional int_0^1 r^{N-1} exp(beta |v|^{q0 + f(r)}) dr,
// integrated in t as int e^{-N t} exp(beta |V|^{q0 + f}) dt.

#include <cmath>
#include <optional>
#include <vector>

#include "tmlab/model.hpp"
#include "tmlab/profiles.hpp"
#include "tmlab/quadrature.hpp"

namespace tmlab {

inline constexpr double kBlowupExponent = 700.0;
inline constexpr double kTinyValue = 1e-300;

/// |v|^q in log space; exact 0 for |v| < 1e-300.
inline double abs_pow(double v, double q) {
  const double a = std::abs(v);
  if (a < kTinyValue) return 0.0;
  return std::exp(q * std::log(a));
}

struct FunctionalSplit {
  double near_boundary = 0.0;  // panels with midpoint t <= 1 (r >= 1/e)
  double middle = 0.0;
  double near_origin = 0.0;  // panels with midpoint t > 8, plus the tail beyond t_max
};

struct FunctionalValue {
  double value = 0.0;
  FunctionalSplit split;
  double refinement_delta = 0.0;
  bool blowup = false;
  std::optional<double> blowup_radius;
  double max_exponent = 0.0;  // max of beta |v|^q over the nodes

  [[nodiscard]] Json to_json() const {
    Json j;
    j["value"] = blowup ? Json("inf") : Json(value);
    j["split"] = {{"near_boundary", split.near_boundary}, {"middle", split.middle}, {"near_origin", split.near_origin}};
    j["refinement_delta"] = refinement_delta;
    j["blowup"] = blowup;
    if (blowup_radius) j["blowup_radius"] = *blowup_radius;
    j["max_exponent"] = max_exponent;
    return j;
  }
};

/// Per-node exponents q0 + f(t_i).
inline std::vector<double> exponents_on(const PanelGrid& grid, const PerturbationSpec& f, const DimensionParams& params) {
  std::vector<double> q(grid.size());
  const auto nodes = grid.nodes();
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = params.q0() + f.eval_t(nodes[i]);
  return q;
}

/// Functional from node samples. tail_value is V at t = upper, held constant beyond.
inline FunctionalValue functional_on(const PanelGrid& grid, std::span<const double> V, std::span<const double> q,
                                     double tail_value, double q_tail, double beta, const DimensionParams& params) {
  FunctionalValue out;
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  const std::size_t m = grid.order();
  const int N = params.N;
  for (std::size_t p = 0; p < grid.panel_count(); ++p) {
    const double mid = 0.5 * (grid.edges()[p] + grid.edges()[p + 1]);
    double panel = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = p * m + j;
      const double ex = beta * abs_pow(V[i], q[i]);
      if (ex > out.max_exponent) out.max_exponent = ex;
      if (ex > kBlowupExponent) {
        if (!out.blowup) out.blowup_radius = std::exp(-nodes[i]);
        out.blowup = true;
        continue;
      }
      panel += w[i] * std::exp(ex - N * nodes[i]);
    }
    if (mid <= 1.0) out.split.near_boundary += panel;
    else if (mid > 8.0) out.split.near_origin += panel;
    else out.split.middle += panel;
  }
  const double ex_tail = beta * abs_pow(tail_value, q_tail);
  if (ex_tail > kBlowupExponent) {
    if (!out.blowup) out.blowup_radius = std::exp(-grid.upper());
    out.blowup = true;
  } else {
    out.split.near_origin += std::exp(ex_tail - N * grid.upper()) / N;
  }
  out.max_exponent = std::max(out.max_exponent, ex_tail);
  out.value = out.blowup ? std::numeric_limits<double>::infinity()
                         : out.split.near_boundary + out.split.middle + out.split.near_origin;
  return out;
}

namespace detail {

inline FunctionalValue functional_on_grid(const RadialProfile& v, const PerturbationSpec& f, double beta,
                                          const DimensionParams& params, const PanelGrid& grid) {
  const auto smp = v.on(grid);
  const auto q = exponents_on(grid, f, params);
  const double T = grid.upper();
  return functional_on(grid, smp.V, q, v.value_t(T), params.q0() + f.eval_t(T), beta, params);
}

inline void require_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("functional: beta must be positive and finite");
}

}  // namespace detail

/// int_0^1 r^{N-1} exp(beta |v|^{q0 + f}) dr with a panel-doubling error estimate.
inline FunctionalValue tm_integral(const RadialProfile& v, const PerturbationSpec& f, double beta,
                                   const DimensionParams& params, const PanelScheme& scheme = {}) {
  detail::require_beta(beta);
  const auto grid = profile_grid(v, scheme);
  auto out = detail::functional_on_grid(v, f, beta, params, grid);
  if (out.blowup) return out;
  const auto fine = detail::functional_on_grid(v, f, beta, params, grid.refined());
  if (fine.blowup) {
    out.blowup_radius = fine.blowup_radius;
    out.blowup = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.refinement_delta = std::abs(fine.value - out.value) / std::abs(fine.value);
  return out;
}

/// Same integrand restricted to t >= t_lo (r <= e^{-t_lo}), tail included.
inline FunctionalValue tm_integral_range(const RadialProfile& v, const PerturbationSpec& f, double beta,
                                         const DimensionParams& params, double t_lo, const PanelScheme& scheme = {}) {
  detail::require_beta(beta);
  if (!(t_lo >= 0.0) || !(t_lo < scheme.t_max)) throw DomainError("tm_integral_range: t_lo outside [0, t_max)");
  if (t_lo == 0.0) return tm_integral(v, f, beta, params, scheme);
  auto bp = v.breakpoints();
  const auto grid = PanelGrid::graded(scheme, t_lo, scheme.t_max, bp);
  auto out = detail::functional_on_grid(v, f, beta, params, grid);
  if (!out.blowup) {
    const auto fine = detail::functional_on_grid(v, f, beta, params, grid.refined());
    out.refinement_delta = std::abs(fine.value - out.value) / std::abs(fine.value);
  }
  return out;
}

/// omega * tm_integral(v, f, mu_N): the ball integral.
inline double ball_functional(const RadialProfile& v, const PerturbationSpec& f, const DimensionParams& params,
                              const PanelScheme& scheme = {}) {
  return params.omega * tm_integral(v, f, params.mu_N, params, scheme).value;
}

inline std::vector<FunctionalValue> monotonicity_probe(const RadialProfile& v, const PerturbationSpec& f,
                                                       const std::vector<double>& betas,
                                                       const DimensionParams& params, const PanelScheme& scheme = {}) {
  for (std::size_t i = 0; i + 1 < betas.size(); ++i)
    if (!(betas[i + 1] > betas[i])) throw DomainError("monotonicity_probe: betas must be strictly increasing");
  std::vector<FunctionalValue> out;
  out.reserve(betas.size());
  for (double b : betas) out.push_back(tm_integral(v, f, b, params, scheme));
  return out;
}

}  // namespace tmlab
