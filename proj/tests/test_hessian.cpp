#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "tmlab/families.hpp"
#include "tmlab/hessian.hpp"

using namespace tmlab;
using boost::math::quadrature::gauss_kronrod;

namespace {

// v(t) = sum a_i (1 - e^{-m_i t}), i.e. v(r) = sum a_i (1 - r^{m_i}).
RadialProfile random_profile(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(0.1, 1.0), rate(0.5, 4.0);
  std::vector<double> a(3), m(3);
  for (int i = 0; i < 3; ++i) {
    a[i] = amp(rng);
    m[i] = rate(rng);
  }
  ClosedForm cf;
  cf.value = [=](double t) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s -= a[i] * std::expm1(-m[i] * t);
    return s;
  };
  cf.slope = [=](double t) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s += a[i] * m[i] * std::exp(-m[i] * t);
    return s;
  };
  cf.curvature = [=](double t) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s -= a[i] * m[i] * m[i] * std::exp(-m[i] * t);
    return s;
  };
  return RadialProfile(std::move(cf), "random");
}

}  // namespace

TEST(Lift, SignConventionAndBoundary) {
  const auto P = make_params(2);
  const auto u = lift(quadratic_profile(), P);
  EXPECT_NEAR(u.value(0.5), -0.375, 1e-15);
  EXPECT_NEAR(u.derivative(0.5), 0.5, 1e-14);
  EXPECT_EQ(lift(moser(10, P), P).value(1.0), 0.0);
  EXPECT_EQ(lift(zero_profile(), P).value(0.3), 0.0);
  ClosedForm cf;
  cf.value = [](double) { return 1.0; };
  cf.slope = [](double) { return 0.0; };
  cf.curvature = [](double) { return 0.0; };
  EXPECT_THROW(lift(RadialProfile(std::move(cf), "one"), P), DomainError);
}

TEST(Hessian, IdentityQuadraticGivesBinomials) {
  for (int N : {2, 4, 6}) {
    const auto P = make_params(N);
    const auto u = lift(quadratic_profile(), P);
    for (int j = 1; j <= P.k; ++j)
      for (double r : {1.0, 0.7, 0.3, 0.05, 1e-3}) {
        const double F = hessian_Fj(u, j, r);
        EXPECT_NEAR(F / binomial(N, j), 1.0, 1e-10) << N << " " << j << " " << r;
      }
  }
  EXPECT_NEAR(hessian_Fj(lift(quadratic_profile(), make_params(4)), 2, 0.4), 6.0, 1e-12);
}

TEST(Hessian, LaplacianOfLinearProfile) {
  const auto P = make_params(2);
  const auto u = lift(linear_profile(), P);
  for (double r : {0.9, 0.5, 0.1}) EXPECT_NEAR(hessian_Fj(u, 1, r), 1.0 / r, 1e-10 / r);
}

TEST(Hessian, ZeroProfile) {
  const auto P = make_params(4);
  for (int j = 1; j <= 2; ++j) EXPECT_EQ(hessian_Fj(lift(zero_profile(), P), j, 0.5), 0.0);
}

TEST(Hessian, RejectsBadArguments) {
  const auto P = make_params(4);
  const auto u = lift(quadratic_profile(), P);
  EXPECT_THROW(hessian_Fj(u, 0, 0.5), DomainError);
  EXPECT_THROW(hessian_Fj(u, 3, 0.5), DomainError);
  EXPECT_THROW(hessian_Fj(u, 1, 0.0), DomainError);
}

TEST(Hessian, EnergyIdentityMatchesNorm) {
  std::mt19937_64 rng(7);
  for (int N : {2, 4, 6}) {
    const auto P = make_params(N);
    const auto v = random_profile(rng);
    const auto u = lift(v, P);
    // r = e^{-t}, dr = r dt.
    auto integrand = [&](double t) {
      if (t > 100) return 0.0;
      const double r = std::exp(-t);
      return std::pow(r, N) * (-u.value(r)) * hessian_Fj(u, P.k, r);
    };
    boost::math::quadrature::exp_sinh<double> es;
    const double energy = P.omega * es.integrate(integrand);
    const double norm = phi_norm(u);
    EXPECT_NEAR(energy / std::pow(norm, P.k + 1), 1.0, 1e-10) << N;
  }
}

TEST(Admissibility, ClosedForms) {
  for (int N : {2, 4, 6}) {
    const auto P = make_params(N);
    const auto q = admissibility_check(lift(quadratic_profile(), P));
    EXPECT_TRUE(q.pass);
    EXPECT_GT(q.min_value, 0.0);
    EXPECT_TRUE(admissibility_check(lift(linear_profile(), P)).pass);
    EXPECT_TRUE(admissibility_check(lift(moser(10, P), P)).pass);
  }
}

TEST(Admissibility, DetectsViolation) {
  const auto P = make_params(2);
  ClosedForm cf;
  cf.value = [](double t) { return t * std::exp(-t); };
  cf.slope = [](double t) { return (1 - t) * std::exp(-t); };
  cf.curvature = [](double t) { return (t - 2) * std::exp(-t); };
  const auto verdict = admissibility_check(lift(RadialProfile(std::move(cf), "bump"), P));
  EXPECT_FALSE(verdict.pass);
  EXPECT_LT(verdict.min_value, -1e-10);
  EXPECT_EQ(verdict.to_json()["verdict"], "fail");
}

TEST(Admissibility, ConvergedExtremalPasses) {
  const auto P = make_params(2);
  const auto f = PerturbationSpec::power(1, 1, 1);
  const auto sol = solve_extremal(f, P, SolverOptions{});
  ASSERT_TRUE(sol.converged());
  const auto verdict = admissibility_check(lift(sol, f, P));
  EXPECT_TRUE(verdict.pass) << verdict.min_value;
  const auto plain = admissibility_check(lift(sol.profile, P));
  EXPECT_TRUE(plain.pass) << plain.min_value;
}

TEST(PhiNorm, EqualsX1Norm) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 5; ++i) {
    const auto P = make_params(2 + 2 * (i % 3));
    const auto v = random_profile(rng);
    EXPECT_NEAR(phi_norm(lift(v, P)), x1_norm(v, P), 1e-14);
  }
  EXPECT_EQ(phi_norm(lift(zero_profile(), make_params(2))), 0.0);
  EXPECT_NEAR(phi_norm(lift(linear_profile(), make_params(2))), std::sqrt(M_PI), 1e-14);
  EXPECT_NEAR(phi_norm(lift(moser(5, make_params(4)), make_params(4))), 1.0, 1e-6);
}

TEST(BallIntegral, MatchesPlanarQuadrature) {
  const auto P = make_params(2);
  std::mt19937_64 rng(99);
  const auto f = PerturbationSpec::power(1, 1, 1);
  for (int i = 0; i < 3; ++i) {
    const auto raw = random_profile(rng);
    const auto v = scale(raw, 0.9 / x1_norm(raw, P));
    auto at = [&](double x, double y) {
      const double r = std::hypot(x, y);
      if (r >= 1) return 1.0;
      if (r == 0) return std::exp(P.mu_N * std::pow(std::abs(v.value_t(40.0)), P.q0()));
      const double q = P.q0() + f.eval_f(r);
      return std::exp(P.mu_N * std::pow(std::abs(v.value(r)), q));
    };
    auto inner = [&](double x) {
      const double h = std::sqrt(std::max(0.0, 1 - x * x));
      return gauss_kronrod<double, 31>::integrate([&](double y) { return at(x, y); }, -h, h, 12, 1e-12);
    };
    const double planar = gauss_kronrod<double, 31>::integrate(inner, -1.0, 1.0, 12, 1e-11);
    const double ball = ball_functional(v, f, P);
    EXPECT_NEAR(planar / ball, 1.0, 1e-7);
    EXPECT_NEAR(ball / (P.omega * tm_integral(v, f, P.mu_N, P).value), 1.0, 1e-12);
  }
}
