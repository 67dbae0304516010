#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tmlab/error.hpp"

namespace tmlab {

/// Cubic Hermite value on [x0, x1] from end values and end slopes.
inline double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

inline double hermite_derivative(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  return (6 * s2 - 6 * s) / h * y0 + (3 * s2 - 4 * s + 1) * d0 + (-6 * s2 + 6 * s) / h * y1 + (3 * s2 - 2 * s) * d1;
}

/// Monotone piecewise-cubic interpolant (Fritsch-Carlson slopes). Constant
/// extrapolation outside the node range.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    check();
    const std::size_t n = x_.size();
    const auto delta = secants();
    d_.assign(n, 0.0);
    d_[0] = delta[0];
    d_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) continue;
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      const double w1 = 2 * h1 + h0;
      const double w2 = h1 + 2 * h0;
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
    limit(delta);
  }

  /// Given node derivatives, limited only where they would break monotonicity.
  MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> d)
      : x_(std::move(x)), y_(std::move(y)), d_(std::move(d)) {
    check();
    if (d_.size() != x_.size()) throw DomainError("MonotoneCubic: derivative count does not match nodes");
    limit(secants());
  }

  [[nodiscard]] double operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = segment(x);
    return hermite(x_[i], x_[i + 1], y_[i], y_[i + 1], d_[i], d_[i + 1], x);
  }

  [[nodiscard]] double derivative(double x) const {
    if (x < x_.front() || x > x_.back()) return 0.0;
    const std::size_t i = segment(std::min(x, x_.back()));
    return hermite_derivative(x_[i], x_[i + 1], y_[i], y_[i + 1], d_[i], d_[i + 1], x);
  }

  [[nodiscard]] const std::vector<double>& x() const { return x_; }
  [[nodiscard]] const std::vector<double>& y() const { return y_; }

 private:
  void check() const {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw DomainError("MonotoneCubic: need at least two (x, y) pairs");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(x_[i + 1] > x_[i])) throw DomainError("MonotoneCubic: abscissae must be strictly increasing");
  }

  [[nodiscard]] std::vector<double> secants() const {
    std::vector<double> delta(x_.size() - 1);
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    return delta;
  }

  void limit(const std::vector<double>& delta) {
    const std::size_t n = x_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (delta[i] == 0.0) {
        d_[i] = d_[i + 1] = 0.0;
        continue;
      }
      const double a = d_[i] / delta[i];
      const double b = d_[i + 1] / delta[i];
      if (a < 0) d_[i] = 0;
      if (b < 0) d_[i + 1] = 0;
      const double s = a * a + b * b;
      if (s > 9.0) {
        const double tau = 3.0 / std::sqrt(s);
        d_[i] = tau * a * delta[i];
        d_[i + 1] = tau * b * delta[i];
      }
    }
  }

  [[nodiscard]] std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    i = (i == 0) ? 0 : i - 1;
    return std::min(i, x_.size() - 2);
  }

  std::vector<double> x_, y_, d_;
};

}  // namespace tmlab
