#pragma once

// Radial profiles v on (0, 1], stored in t = -ln r as V(t) = v(e^{-t}) with
// slope S = dV/dt = -r v'(r).

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tmlab/error.hpp"
#include "tmlab/format.hpp"
#include "tmlab/interp.hpp"
#include "tmlab/model.hpp"
#include "tmlab/quadrature.hpp"

namespace tmlab {

struct ClosedForm {
  std::function<double(double)> value;      // V(t)
  std::function<double(double)> slope;      // V'(t)
  std::function<double(double)> curvature;  // V''(t), away from breakpoints
  std::vector<double> breakpoints;          // kinks in t
};

struct Sampled {
  std::vector<double> t;  // strictly increasing, t[0] = 0
  std::vector<double> v;
  std::vector<double> s;
  MonotoneCubic value_interp;
  MonotoneCubic slope_interp;
};

/// Values and slopes of a profile at the nodes of a grid.
struct ProfileSamples {
  std::vector<double> V;
  std::vector<double> S;
};

class RadialProfile {
 public:
  RadialProfile(ClosedForm cf, std::string label)
      : impl_(std::make_shared<const Impl>(Impl{std::move(cf), std::move(label)})) {}
  RadialProfile(Sampled s, std::string label)
      : impl_(std::make_shared<const Impl>(Impl{std::move(s), std::move(label)})) {}

  [[nodiscard]] bool is_sampled() const { return std::holds_alternative<Sampled>(impl_->data); }
  [[nodiscard]] const Sampled& sampled() const { return std::get<Sampled>(impl_->data); }
  [[nodiscard]] const std::string& label() const { return impl_->label; }

  [[nodiscard]] std::vector<double> breakpoints() const {
    if (const auto* cf = std::get_if<ClosedForm>(&impl_->data)) return cf->breakpoints;
    return {};
  }

  [[nodiscard]] double value_t(double t) const {
    if (const auto* cf = std::get_if<ClosedForm>(&impl_->data)) return cf->value(t);
    return sampled().value_interp(t);
  }

  [[nodiscard]] double slope_t(double t) const {
    if (const auto* cf = std::get_if<ClosedForm>(&impl_->data)) return cf->slope(t);
    const auto& s = sampled();
    if (t > s.t.back()) return 0.0;
    return s.slope_interp(t);
  }

  [[nodiscard]] double curvature_t(double t) const {
    if (const auto* cf = std::get_if<ClosedForm>(&impl_->data)) {
      if (cf->curvature) return cf->curvature(t);
      const double h = 1e-5 * std::max(1.0, std::abs(t));
      return (cf->slope(t + h) - cf->slope(t - h)) / (2 * h);
    }
    return sampled().slope_interp.derivative(t);
  }

  /// v(r) for r in (0, 1].
  [[nodiscard]] double value(double r) const { return value_t(to_t(r)); }
  /// v'(r) for r in (0, 1].
  [[nodiscard]] double derivative(double r) const { return -slope_t(to_t(r)) / r; }

  /// Samples at the grid nodes. Sampled profiles whose interior nodes are the
  /// grid nodes are read off directly.
  [[nodiscard]] ProfileSamples on(const PanelGrid& grid) const {
    ProfileSamples out;
    const auto nodes = grid.nodes();
    const std::size_t n = nodes.size();
    if (is_sampled()) {
      const auto& s = sampled();
      if (s.t.size() == n + 2 && std::equal(nodes.begin(), nodes.end(), s.t.begin() + 1)) {
        out.V.assign(s.v.begin() + 1, s.v.end() - 1);
        out.S.assign(s.s.begin() + 1, s.s.end() - 1);
        return out;
      }
    }
    out.V.resize(n);
    out.S.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.V[i] = value_t(nodes[i]);
      out.S[i] = slope_t(nodes[i]);
    }
    return out;
  }

  [[nodiscard]] RadialProfile scaled(double c) const {
    if (const auto* cf = std::get_if<ClosedForm>(&impl_->data)) {
      ClosedForm out;
      out.value = [f = cf->value, c](double t) { return c * f(t); };
      out.slope = [f = cf->slope, c](double t) { return c * f(t); };
      if (cf->curvature) out.curvature = [f = cf->curvature, c](double t) { return c * f(t); };
      out.breakpoints = cf->breakpoints;
      return RadialProfile(std::move(out), fmt17(c) + "*" + label());
    }
    const auto& s = sampled();
    std::vector<double> v = s.v, sl = s.s;
    for (auto& x : v) x *= c;
    for (auto& x : sl) x *= c;
    return from_samples(s.t, std::move(v), std::move(sl), fmt17(c) + "*" + label());
  }

  /// Grid-sampled profile; t must start at 0 and be strictly increasing.
  static RadialProfile from_samples(std::vector<double> t, std::vector<double> v, std::vector<double> s,
                                    std::string label = "sampled") {
    if (t.size() < 2 || v.size() != t.size() || s.size() != t.size())
      throw DomainError("sampled profile: t, v, slope must have equal length >= 2");
    if (t.front() != 0.0) throw DomainError("sampled profile: first node must be t = 0 (r = 1)");
    if (std::abs(v.front()) > 1e-12) throw DomainError("sampled profile: v(1) must vanish");
    Sampled smp;
    smp.value_interp = MonotoneCubic(t, v, s);
    smp.slope_interp = MonotoneCubic(t, s);
    smp.t = std::move(t);
    smp.v = std::move(v);
    smp.s = std::move(s);
    return RadialProfile(std::move(smp), std::move(label));
  }

 private:
  static double to_t(double r) {
    if (!(r > 0.0) || !(r <= 1.0)) throw DomainError("profile: r = " + fmt17(r) + " outside (0, 1]");
    return -std::log(r);
  }

  struct Impl {
    std::variant<ClosedForm, Sampled> data;
    std::string label;
  };
  std::shared_ptr<const Impl> impl_;
};

inline RadialProfile zero_profile() {
  ClosedForm cf;
  cf.value = [](double) { return 0.0; };
  cf.slope = [](double) { return 0.0; };
  cf.curvature = [](double) { return 0.0; };
  return RadialProfile(std::move(cf), "zero");
}

/// v(r) = 1 - r.
inline RadialProfile linear_profile() {
  ClosedForm cf;
  cf.value = [](double t) { return -std::expm1(-t); };
  cf.slope = [](double t) { return std::exp(-t); };
  cf.curvature = [](double t) { return -std::exp(-t); };
  return RadialProfile(std::move(cf), "linear");
}

/// v(r) = (1 - r^2) / 2.
inline RadialProfile quadratic_profile() {
  ClosedForm cf;
  cf.value = [](double t) { return -0.5 * std::expm1(-2 * t); };
  cf.slope = [](double t) { return std::exp(-2 * t); };
  cf.curvature = [](double t) { return -2 * std::exp(-2 * t); };
  return RadialProfile(std::move(cf), "quadratic");
}

inline PanelGrid profile_grid(const RadialProfile& v, const PanelScheme& scheme) {
  const auto bp = v.breakpoints();
  return PanelGrid::graded(scheme, 0.0, scheme.t_max, bp);
}

/// (c_N int |S|^{k+1} dt)^{1/(k+1)} on a given grid.
inline double x1_norm_on(const ProfileSamples& smp, const PanelGrid& grid, const DimensionParams& params) {
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < smp.S.size(); ++i) {
    const double s = smp.S[i];
    if (!std::isfinite(s))
      throw NumericError("x1_norm: non-finite derivative sample at node " + std::to_string(i) + " (t = " +
                         fmt17(nodes[i]) + ", r = " + fmt17(std::exp(-nodes[i])) + ")");
    sum += w[i] * std::pow(std::abs(s), params.k + 1);
  }
  return std::pow(params.c_N * sum, 1.0 / (params.k + 1));
}

inline double x1_norm(const RadialProfile& v, const DimensionParams& params, const PanelScheme& scheme = {}) {
  const auto grid = profile_grid(v, scheme);
  return x1_norm_on(v.on(grid), grid, params);
}

inline RadialProfile scale(const RadialProfile& v, double c) {
  if (c == 0.0) return zero_profile();
  return v.scaled(c);
}

/// Right side of the pointwise radial estimate, norm * (N t / mu_N)^{N/(N+2)}.
inline double radial_bound(const DimensionParams& params, double norm, double t) {
  return norm * std::pow(params.N * t / params.mu_N, params.N / (params.N + 2.0));
}

struct RadialBoundReport {
  double norm = 0.0;
  double max_excess = 0.0;  // max over nodes of |v| - bound
  double min_slack = 0.0;   // -max_excess
  double worst_t = 0.0;
  double worst_r = 1.0;
  bool holds = true;

  [[nodiscard]] Json to_json() const {
    Json j;
    j["norm"] = norm;
    j["max_excess"] = max_excess;
    j["min_slack"] = min_slack;
    j["worst_r"] = worst_r;
    j["holds"] = holds;
    return j;
  }
};

inline RadialBoundReport radial_bound_check(const RadialProfile& v, const DimensionParams& params,
                                            const PanelScheme& scheme = {}, double tolerance = 1e-8) {
  const auto grid = profile_grid(v, scheme);
  const auto smp = v.on(grid);
  RadialBoundReport rep;
  rep.norm = x1_norm_on(smp, grid, params);
  const auto nodes = grid.nodes();
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double excess = std::abs(smp.V[i]) - radial_bound(params, rep.norm, nodes[i]);
    if (excess > rep.max_excess) {
      rep.max_excess = excess;
      rep.worst_t = nodes[i];
    }
  }
  rep.worst_r = std::exp(-rep.worst_t);
  rep.min_slack = -rep.max_excess;
  rep.holds = rep.max_excess <= tolerance;
  return rep;
}

/// CSV with columns r,t,v,slope (slope = dv/dt).
inline CsvTable profile_csv(const RadialProfile& v, const PanelGrid& grid) {
  CsvTable tab({"r", "t", "v", "slope"});
  auto row = [&](double t, double val, double s) { tab.add_row(std::vector<double>{std::exp(-t), t, val, s}); };
  if (v.is_sampled()) {
    const auto& s = v.sampled();
    for (std::size_t i = 0; i < s.t.size(); ++i) row(s.t[i], s.v[i], s.s[i]);
    return tab;
  }
  row(0.0, v.value_t(0.0), v.slope_t(0.0));
  const auto smp = v.on(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) row(grid.nodes()[i], smp.V[i], smp.S[i]);
  return tab;
}

inline void write_profile_csv(const RadialProfile& v, const std::string& path, const PanelScheme& scheme = {}) {
  profile_csv(v, profile_grid(v, scheme)).write(path);
}

inline RadialProfile read_profile_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw ConfigError("profile '" + path + "': empty file");
  const auto& h = rows.front();
  auto col = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < h.size(); ++i)
      if (h[i] == name) return i;
    throw ConfigError("profile '" + path + "': missing column '" + name + "'");
  };
  const std::size_t ct = col("t"), cv = col("v"), cs = col("slope");
  std::vector<double> t, v, s;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != h.size()) throw ConfigError("profile '" + path + "': row " + std::to_string(i) + " has wrong width");
    t.push_back(parse_double(r[ct], path));
    v.push_back(parse_double(r[cv], path));
    s.push_back(parse_double(r[cs], path));
  }
  try {
    return RadialProfile::from_samples(std::move(t), std::move(v), std::move(s), path);
  } catch (const DomainError& e) {
    throw ConfigError("profile '" + path + "': " + e.what());
  }
}

}  // namespace tmlab
