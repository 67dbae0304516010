#pragma once

// Gamma, digamma and the integral identities built on them.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tmlab/error.hpp"
#include "tmlab/quadrature.hpp"

namespace tmlab {

struct SpecialValue {
  double value = 0.0;
  double abs_error_estimate = 0.0;
};

inline constexpr double kEulerGamma = 0.57721566490153286061;

namespace detail {

inline void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError(std::string(what) + ": argument must be positive and finite, got " + std::to_string(x));
}

// ln(1 + e^x) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// (1 - (1-u)^a) / u for u in (0, 1].
inline double one_minus_pow_over(double u, double a) { return -std::expm1(a * std::log1p(-u)) / u; }

}  // namespace detail

inline SpecialValue gamma(double x) {
  detail::require_positive(x, "gamma");
  const double v = std::tgamma(x);
  if (!std::isfinite(v)) throw NumericError("gamma: overflow at x = " + std::to_string(x));
  return {v, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(v) * (1.0 + std::abs(x))};
}

/// Psi(x) = Gamma'(x)/Gamma(x): upward recurrence to x >= 10, then the
/// asymptotic series.
inline SpecialValue digamma(double x) {
  detail::require_positive(x, "digamma");
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli terms B_2n / (2n x^{2n}), n = 1..7
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12.0))))));
  const double v = std::log(x) - 0.5 * inv - series + shift;
  return {v, 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(v) + std::abs(shift) + 1.0)};
}

inline double euler_gamma() { return kEulerGamma; }

/// Psi(x) from its Dirichlet integral int_0^inf (e^{-z} - (1+z)^{-x}) / z dz,
/// evaluated in tau = ln z.
inline SpecialValue digamma_dirichlet(double x) {
  detail::require_positive(x, "digamma_dirichlet");
  constexpr double tail = 1e-12;
  auto integrand = [x](double tau) {
    const double z = std::exp(tau);
    const double a = -z;
    const double b = -x * std::log1p(z);
    return std::exp(b) * std::expm1(a - b);
  };
  // |integrand| <= (|x-1| + 1) e^tau as tau -> -inf, and <= e^{-min(x,1) tau} as tau -> inf.
  const double lo = std::log(tail / (std::abs(x - 1.0) + 1.0));
  const double decay = std::min(x, 1.0);
  const double hi = std::log(1.0 / (decay * tail)) / decay;
  const std::array<double, 3> pts{lo, 0.0, hi};
  const auto r = integrate_adaptive(integrand, pts, 1e-15, 1e-14);
  return {r.value, r.abs_error + 2.0 * tail};
}

/// Psi(p) + gamma = int_0^1 (1 - s^{p-1}) / (1 - s) ds.
inline SpecialValue psi_plus_gamma(double p) {
  detail::require_positive(p, "psi_plus_gamma");
  const auto r = integrate_adaptive([p](double u) { return detail::one_minus_pow_over(u, p - 1.0); }, 0.0, 1.0,
                                    1e-15, 1e-14);
  return {r.value, r.abs_error};
}

struct BetaResult {
  SpecialValue quadrature;  // int_0^inf s^{x-1} / (1+s)^{x+y} ds
  double gamma_ratio = 0.0;  // Gamma(x) Gamma(y) / Gamma(x+y)
  double difference = 0.0;
};

inline BetaResult beta_integral(double x, double y) {
  detail::require_positive(x, "beta_integral");
  detail::require_positive(y, "beta_integral");
  constexpr double tail = 1e-12;
  // s = e^tau; tails bounded by e^{x tau}/x and e^{-y tau}/y.
  const double lo = -std::log(1.0 / (x * tail)) / x;
  const double hi = std::log(1.0 / (y * tail)) / y;
  auto integrand = [x, y](double tau) { return std::exp(x * tau - (x + y) * detail::softplus(tau)); };
  const std::array<double, 3> pts{std::min(lo, -1.0), 0.0, std::max(hi, 1.0)};
  const auto q = integrate_adaptive(integrand, pts, 1e-15, 1e-14);
  BetaResult out;
  out.quadrature = {q.value, q.abs_error + 2.0 * tail};
  out.gamma_ratio = std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
  out.difference = std::abs(out.quadrature.value - out.gamma_ratio);
  return out;
}

namespace detail {

// int_0^z s^{e} / (1+s)^{p} ds for finite z > 0, in s on [0,1] and ln s beyond.
inline QuadResult rational_power_integral(double z, double e, double p) {
  auto in_s = [e, p](double s) { return std::pow(s, e) / std::pow(1.0 + s, p); };
  QuadResult out = integrate_adaptive(in_s, 0.0, std::min(z, 1.0), 1e-15, 1e-14);
  if (z > 1.0) {
    auto in_tau = [e, p](double tau) { return std::exp((e + 1.0) * tau - p * softplus(tau)); };
    const auto upper = integrate_adaptive(in_tau, 0.0, std::log(z), 1e-15, 1e-14);
    out.value += upper.value;
    out.abs_error += upper.abs_error;
    out.converged = out.converged && upper.converged;
  }
  return out;
}

inline void require_lt_args(double z, double p, const char* what) {
  if (!(z > 0.0) || std::isnan(z)) throw DomainError(std::string(what) + ": z must be positive");
  if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError(std::string(what) + ": p must be >= 2");
}

}  // namespace detail

/// int_{z/(1+z)}^1 (1 - s^{p-1}) / (1 - s) ds, integrated in u = 1 - s.
inline SpecialValue lt1_remainder(double z, double p) {
  detail::require_lt_args(z, p, "lt1_remainder");
  const double upper = 1.0 / (1.0 + z);
  const auto r = integrate_adaptive([p](double u) { return detail::one_minus_pow_over(u, p - 1.0); }, 0.0, upper,
                                    1e-16, 1e-14);
  return {r.value, r.abs_error};
}

struct Lt1Result {
  SpecialValue direct;      // int_0^z s^{p-1} / (1+s)^p ds
  double identity_rhs = 0;  // ln(1+z) - [gamma + Psi(p)] + remainder
  double residual = 0;
};

inline Lt1Result lt1(double z, double p) {
  detail::require_lt_args(z, p, "lt1");
  if (std::isinf(z)) throw DomainError("lt1: z must be finite (the integral diverges)");
  const auto q = detail::rational_power_integral(z, p - 1.0, p);
  const auto rem = lt1_remainder(z, p);
  const auto psi = digamma(p);
  Lt1Result out;
  out.direct = {q.value, q.abs_error};
  out.identity_rhs = std::log1p(z) - (kEulerGamma + psi.value) + rem.value;
  out.residual = std::abs(out.direct.value - out.identity_rhs);
  return out;
}

struct Lt2Result {
  SpecialValue direct;  // int_0^z s^{p-2} / (1+s)^p ds, the source of truth
  double printed_rhs = 0.0;
  double printed_identity_residual = 0.0;
  bool printed_identity_finite = true;
};

/// z may be +infinity, in which case the direct value is the beta integral B(p-1, 1).
inline Lt2Result lt2(double z, double p) {
  detail::require_lt_args(z, p, "lt2");
  Lt2Result out;
  if (std::isinf(z)) {
    const auto b = beta_integral(p - 1.0, 1.0);
    out.direct = b.quadrature;
  } else {
    const auto q = detail::rational_power_integral(z, p - 2.0, p);
    out.direct = {q.value, q.abs_error};
  }
  // Printed right side: p - 1 - int_z^inf (1 - s^{p-2}) / (1 - s) ds. The
  // integrand vanishes at p = 2 and behaves like s^{p-3} otherwise.
  if (p == 2.0) {
    out.printed_rhs = 1.0;
    out.printed_identity_residual = std::abs(out.direct.value - out.printed_rhs);
  } else {
    out.printed_rhs = -std::numeric_limits<double>::infinity();
    out.printed_identity_residual = std::numeric_limits<double>::infinity();
    out.printed_identity_finite = false;
  }
  return out;
}

}  // namespace tmlab
