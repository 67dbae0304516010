#pragma once

// Composite Gauss-Legendre on graded panels in t = -ln r, plus adaptive
// Gauss-Kronrod for one-off integrals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "tmlab/error.hpp"

namespace tmlab {

struct GaussLegendreRule {
  std::vector<double> nodes;    // ascending, on [-1, 1]
  std::vector<double> weights;
};

namespace detail {

// P_n(x) and P_{n-1}(x) by the three-term recurrence.
inline std::pair<double, double> legendre_pair(std::size_t n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (std::size_t j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / static_cast<double>(j);
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

inline double legendre(std::size_t n, double x) { return legendre_pair(n, x).first; }

}  // namespace detail

inline GaussLegendreRule gauss_legendre(std::size_t m) {
  if (m == 0) throw DomainError("gauss_legendre: order must be positive");
  GaussLegendreRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (std::size_t i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto [p, pm1] = detail::legendre_pair(m, x);
      dp = m * (x * p - pm1) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, pm1] = detail::legendre_pair(m, x);
    dp = m * (x * p - pm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  return rule;
}

/// Spectral integration matrices on [-1, 1] for a Gauss-Legendre rule:
/// forward(i, j) = int_{-1}^{x_i} l_j, backward(i, j) = int_{x_i}^{1} l_j,
/// with l_j the Lagrange basis on the rule's nodes. Row-major m x m.
struct IntegrationMatrices {
  std::vector<double> forward;
  std::vector<double> backward;
};

inline IntegrationMatrices integration_matrices(const GaussLegendreRule& rule) {
  const std::size_t m = rule.nodes.size();
  IntegrationMatrices mats{std::vector<double>(m * m, 0.0), std::vector<double>(m * m, 0.0)};
  // coef_n(l_j) = (2n+1)/2 * w_j * P_n(x_j)
  std::vector<double> pn(m * m);
  for (std::size_t n = 0; n < m; ++n)
    for (std::size_t j = 0; j < m; ++j) pn[n * m + j] = detail::legendre(n, rule.nodes[j]);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = rule.nodes[i];
    for (std::size_t n = 0; n < m; ++n) {
      double fwd = 0.0;
      double bwd = 0.0;
      if (n == 0) {
        fwd = x + 1.0;
        bwd = 1.0 - x;
      } else {
        const double diff = (detail::legendre(n + 1, x) - detail::legendre(n - 1, x)) / (2.0 * n + 1.0);
        fwd = diff;
        bwd = -diff;
      }
      for (std::size_t j = 0; j < m; ++j) {
        const double coef = (2.0 * n + 1.0) / 2.0 * rule.weights[j] * pn[n * m + j];
        mats.forward[i * m + j] += fwd * coef;
        mats.backward[i * m + j] += bwd * coef;
      }
    }
  }
  return mats;
}

/// Panel layout for integrals in t = -ln r.
struct PanelScheme {
  std::size_t panels = 64;
  std::size_t order = 16;
  double t_max = 32.0;   // r_min = e^{-32} ~ 1.3e-14
  double growth = 1.08;  // width ratio of consecutive panels, finest at t = 0

  bool operator==(const PanelScheme&) const = default;
};

/// Composite Gauss-Legendre grid over [edges.front(), edges.back()].
class PanelGrid {
 public:
  PanelGrid(std::vector<double> edges, std::size_t order) : edges_(std::move(edges)), order_(order) {
    if (edges_.size() < 2) throw DomainError("PanelGrid: need at least one panel");
    for (std::size_t p = 0; p + 1 < edges_.size(); ++p)
      if (!(edges_[p + 1] > edges_[p])) throw DomainError("PanelGrid: edges must be strictly increasing");
    rule_ = gauss_legendre(order_);
    mats_ = integration_matrices(rule_);
    const std::size_t np = panel_count();
    nodes_.resize(np * order_);
    weights_.resize(np * order_);
    for (std::size_t p = 0; p < np; ++p) {
      const double mid = 0.5 * (edges_[p] + edges_[p + 1]);
      const double half = 0.5 * (edges_[p + 1] - edges_[p]);
      for (std::size_t j = 0; j < order_; ++j) {
        nodes_[p * order_ + j] = mid + half * rule_.nodes[j];
        weights_[p * order_ + j] = half * rule_.weights[j];
      }
    }
  }

  /// Geometrically graded panels on [t0, t1]; each breakpoint strictly inside
  /// the interval splits the panel containing it.
  static PanelGrid graded(const PanelScheme& scheme, double t0, double t1,
                          std::span<const double> breakpoints = {}) {
    if (scheme.panels == 0 || scheme.order == 0) throw DomainError("PanelScheme: panels and order must be positive");
    if (!(t1 > t0)) throw DomainError("PanelGrid::graded: empty interval");
    if (!(scheme.growth > 0.0)) throw DomainError("PanelScheme: growth must be positive");
    std::vector<double> widths(scheme.panels);
    double total = 0.0;
    for (std::size_t p = 0; p < scheme.panels; ++p) {
      widths[p] = std::pow(scheme.growth, static_cast<double>(p));
      total += widths[p];
    }
    std::vector<double> edges{t0};
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < scheme.panels; ++p) {
      acc += widths[p];
      edges.push_back(t0 + (t1 - t0) * acc / total);
    }
    edges.push_back(t1);
    const double min_gap = 1e-9 * (t1 - t0);
    for (double b : breakpoints) {
      if (!(b > t0 + min_gap && b < t1 - min_gap)) continue;
      auto it = std::lower_bound(edges.begin(), edges.end(), b);
      if (std::abs(*it - b) < min_gap || std::abs(*(it - 1) - b) < min_gap) continue;
      edges.insert(it, b);
    }
    return PanelGrid(std::move(edges), scheme.order);
  }

  /// Every panel split at its midpoint (twice the panel count).
  [[nodiscard]] PanelGrid refined() const {
    std::vector<double> e;
    e.reserve(2 * edges_.size());
    for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
      e.push_back(edges_[p]);
      e.push_back(0.5 * (edges_[p] + edges_[p + 1]));
    }
    e.push_back(edges_.back());
    return PanelGrid(std::move(e), order_);
  }

  [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  [[nodiscard]] const std::vector<double>& edges() const { return edges_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] std::size_t order() const { return order_; }
  [[nodiscard]] std::size_t panel_count() const { return edges_.size() - 1; }
  [[nodiscard]] double lower() const { return edges_.front(); }
  [[nodiscard]] double upper() const { return edges_.back(); }

  [[nodiscard]] double integrate(std::span<const double> values) const {
    check_size(values);
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += weights_[i] * values[i];
    return sum;
  }

  /// out[i] = int_{lower}^{t_i} y, spectrally accurate for smooth y.
  [[nodiscard]] std::vector<double> cumulative(std::span<const double> values) const {
    check_size(values);
    std::vector<double> out(values.size());
    double acc = 0.0;
    for (std::size_t p = 0; p < panel_count(); ++p) {
      const double half = 0.5 * (edges_[p + 1] - edges_[p]);
      const double* y = values.data() + p * order_;
      double panel_total = 0.0;
      for (std::size_t i = 0; i < order_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < order_; ++j) s += mats_.forward[i * order_ + j] * y[j];
        out[p * order_ + i] = acc + half * s;
        panel_total += rule_.weights[i] * y[i];
      }
      acc += half * panel_total;
    }
    return out;
  }

  /// out[i] = int_{t_i}^{upper} y, accumulated from the upper end.
  [[nodiscard]] std::vector<double> cumulative_reverse(std::span<const double> values) const {
    check_size(values);
    std::vector<double> out(values.size());
    double acc = 0.0;
    for (std::size_t pp = panel_count(); pp-- > 0;) {
      const double half = 0.5 * (edges_[pp + 1] - edges_[pp]);
      const double* y = values.data() + pp * order_;
      double panel_total = 0.0;
      for (std::size_t i = 0; i < order_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < order_; ++j) s += mats_.backward[i * order_ + j] * y[j];
        out[pp * order_ + i] = acc + half * s;
        panel_total += rule_.weights[i] * y[i];
      }
      acc += half * panel_total;
    }
    return out;
  }

  [[nodiscard]] bool same_nodes(const PanelGrid& other) const {
    return edges_ == other.edges_ && order_ == other.order_;
  }

 private:
  void check_size(std::span<const double> values) const {
    if (values.size() != nodes_.size()) throw DomainError("PanelGrid: value count does not match node count");
  }

  std::vector<double> edges_;
  std::size_t order_;
  GaussLegendreRule rule_;
  IntegrationMatrices mats_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = false;
};

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval.
inline QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     double abs_tol = 1e-14, double rel_tol = 1e-13,
                                     std::size_t max_intervals = 4000) {
  static constexpr std::array<double, 8> xgk{
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk{
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg{
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  struct Segment {
    double lo, hi, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
  };
  auto rule = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const double fc = f(c);
    double kron = wgk[7] * fc;
    double gauss = wg[3] * fc;
    for (std::size_t j = 0; j < 7; ++j) {
      const double f1 = f(c - h * xgk[j]);
      const double f2 = f(c + h * xgk[j]);
      kron += wgk[j] * (f1 + f2);
      if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
    }
    return Segment{lo, hi, kron * h, std::abs((kron - gauss) * h)};
  };

  if (a == b) return {0.0, 0.0, true};
  std::priority_queue<Segment> queue;
  auto first = rule(a, b);
  double total = first.value;
  double err = first.error;
  queue.push(first);
  std::size_t count = 1;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && count < max_intervals) {
    const Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      queue.push(worst);
      break;
    }
    const Segment left = rule(worst.lo, mid);
    const Segment right = rule(mid, worst.hi);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
  }
  double value = 0.0;
  double error = 0.0;
  while (!queue.empty()) {
    value += queue.top().value;
    error += queue.top().error;
    queue.pop();
  }
  if (!std::isfinite(value)) throw NumericError("integrate_adaptive: non-finite integral");
  return {value, error, error <= std::max(abs_tol, rel_tol * std::abs(value))};
}

/// Adaptive integration over several consecutive sub-intervals [pts[i], pts[i+1]].
inline QuadResult integrate_adaptive(const std::function<double(double)>& f, std::span<const double> pts,
                                     double abs_tol = 1e-14, double rel_tol = 1e-13) {
  QuadResult out{0.0, 0.0, true};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto part = integrate_adaptive(f, pts[i], pts[i + 1], abs_tol, rel_tol);
    out.value += part.value;
    out.abs_error += part.abs_error;
    out.converged = out.converged && part.converged;
  }
  return out;
}

}  // namespace tmlab
