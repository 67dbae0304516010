#pragma once

// Lift u(x) = -v(|x|) to the unit ball and the radial k-Hessian operators
//   F_j[u] = (1/j) binom(N-1, j-1) r^{1-N} (r^{N-j} (u')^j)'.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tmlab/extremal.hpp"
#include "tmlab/model.hpp"
#include "tmlab/profiles.hpp"

namespace tmlab {

struct ElContext {
  double lambda = 0.0;
  PerturbationSpec f;
};

struct BallFunction {
  RadialProfile source;
  DimensionParams params;
  std::optional<ElContext> el;

  /// u(r) = -v(r).
  [[nodiscard]] double value(double r) const { return -source.value(r); }
  /// u'(r) = -v'(r).
  [[nodiscard]] double derivative(double r) const { return -source.derivative(r); }
};

inline BallFunction lift(const RadialProfile& v, const DimensionParams& params) {
  if (std::abs(v.value_t(0.0)) > 1e-12) throw DomainError("lift: v(1) must vanish");
  return BallFunction{v, params, std::nullopt};
}

/// Lift of a solver output; its curvature then comes from the Euler-Lagrange equation.
inline BallFunction lift(const ExtremalSolution& sol, const PerturbationSpec& f, const DimensionParams& params) {
  auto u = lift(sol.profile, params);
  u.el = ElContext{sol.lambda, f};
  return u;
}

namespace detail {

// dB/dt for B_j = e^{-(N-2j) t} S^j, given S and S' = dS/dt.
inline double bracket_dt(int N, int j, double t, double S, double St) {
  const double e = std::exp(-(N - 2.0 * j) * t);
  const double Sj1 = j == 1 ? 1.0 : std::pow(S, j - 1);
  return e * (-(N - 2.0 * j) * Sj1 * S + j * Sj1 * St);
}

inline double slope_derivative(const BallFunction& u, double t, const PanelScheme& scheme) {
  const auto& v = u.source;
  if (!v.is_sampled()) return v.curvature_t(t);
  if (u.el) {
    const auto& P = u.params;
    const auto& f = u.el->f;
    const double G = el_inner_integral(v, t, f, P, scheme);
    const double q = P.q0() + f.eval_t(t);
    const double V = v.value_t(t);
    const double g = std::exp(-P.N * t) * q * abs_pow(V, q - 1.0) * std::exp(P.mu_N * abs_pow(V, q));
    return -v.slope_t(t) * g / (P.k * G);
  }
  const double h = 1e-4 * std::max(1.0, t);
  const double lo = std::max(t - h, 0.0);
  return (v.slope_t(t + h) - v.slope_t(lo)) / (t + h - lo);
}

}  // namespace detail

/// (r^{N-j} (u')^j)' at r.
inline double bracket_derivative(const BallFunction& u, int j, double r, const PanelScheme& scheme = {}) {
  const int N = u.params.N;
  if (j < 1 || j > u.params.k) throw DomainError("hessian: j must lie in [1, k]");
  if (!(r > 0.0) || !(r <= 1.0)) throw DomainError("hessian: r must lie in (0, 1]");
  const double t = -std::log(r);
  const double S = u.source.slope_t(t);
  const double St = detail::slope_derivative(u, t, scheme);
  return -std::exp(t) * detail::bracket_dt(N, j, t, S, St);
}

inline double hessian_Fj(const BallFunction& u, int j, double r, const PanelScheme& scheme = {}) {
  const int N = u.params.N;
  const double dB = bracket_derivative(u, j, r, scheme);
  return binomial(N - 1, j - 1) / j * std::pow(r, 1.0 - N) * dB;
}

struct AdmissibilityVerdict {
  bool pass = true;
  double min_value = 0.0;  // min over nodes and j of the bracket derivative
  int worst_j = 1;
  double worst_r = 1.0;
  double tolerance = -1e-10;
  std::size_t nodes = 0;

  [[nodiscard]] Json to_json() const {
    Json j;
    j["verdict"] = pass ? "pass" : "fail";
    j["min_bracket_derivative"] = min_value;
    j["worst_j"] = worst_j;
    j["worst_r"] = worst_r;
    j["tolerance"] = tolerance;
    j["nodes"] = nodes;
    return j;
  }
};

/// (r^{N-j} (-v')^j)' >= -1e-10 at every quadrature node, j = 1..k.
inline AdmissibilityVerdict admissibility_check(const BallFunction& u, const PanelScheme& scheme = {}) {
  const auto& P = u.params;
  AdmissibilityVerdict out;
  out.min_value = std::numeric_limits<double>::infinity();
  auto consider = [&](int j, double t, double S, double St) {
    const double val = -std::exp(t) * detail::bracket_dt(P.N, j, t, S, St);
    if (val < out.min_value || std::isnan(val)) {
      out.min_value = val;
      out.worst_j = j;
      out.worst_r = std::exp(-t);
    }
  };
  if (u.source.is_sampled() && u.el) {
    const ElOperator op(u.el->f, P, scheme);
    const auto S = u.source.on(op.grid()).S;
    const auto e = op.evaluate(S);
    const auto nodes = op.grid().nodes();
    out.nodes = nodes.size();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double St = -S[i] * e.g[i] / (P.k * e.G[i]);
      for (int j = 1; j <= P.k; ++j) consider(j, nodes[i], S[i], St);
    }
  } else {
    const auto grid = profile_grid(u.source, scheme);
    const auto nodes = grid.nodes();
    out.nodes = nodes.size();
    for (double t : nodes) {
      const double S = u.source.slope_t(t);
      const double St = detail::slope_derivative(u, t, scheme);
      for (int j = 1; j <= P.k; ++j) consider(j, t, S, St);
    }
  }
  out.pass = out.min_value >= out.tolerance;
  return out;
}

/// Norm of u in the radial k-Hessian space; the same integral as x1_norm.
inline double phi_norm(const BallFunction& u, const PanelScheme& scheme = {}) {
  return x1_norm(u.source, u.params, scheme);
}

}  // namespace tmlab
