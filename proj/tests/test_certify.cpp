#include <cmath>

#include <gtest/gtest.h>

#include "oracle_values.hpp"
#include "tmlab/certify.hpp"

using namespace tmlab;

TEST(ConcentrationUpper, ClosedForms) {
  EXPECT_NEAR(concentration_upper(make_params(2)), (1 + std::exp(1.0)) / 2, 1e-12);
  EXPECT_NEAR(concentration_upper(make_params(4)), (1 + std::exp(1.5)) / 4, 1e-12);
  EXPECT_NEAR(concentration_upper(make_params(6)), (1 + std::exp(11.0 / 6)) / 6, 1e-12);
  EXPECT_NEAR(concentration_upper(make_params(8)), oracle::kConcUpper_8, 1e-12);
  for (int N : {2, 4, 6, 8}) {
    const double c = concentration_upper(make_params(N));
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_GT(c, 0.0);
  }
}

TEST(CcExponent, Values) {
  for (int N : {2, 4}) {
    const auto P = make_params(N);
    EXPECT_DOUBLE_EQ(cc_exponent(0.0, P), 1.0);
    EXPECT_TRUE(std::isinf(cc_exponent(1.0, P)));
    const double norm = std::pow(1 - std::pow(2.0, -N / 2.0), 1.0 / (P.k + 1));
    EXPECT_NEAR(cc_exponent(norm, P), 2.0, 1e-12);
    double prev = 0;
    for (double x = 0; x < 1; x += 0.05) {
      const double p = cc_exponent(x, P);
      EXPECT_GE(p, prev);
      prev = p;
    }
    EXPECT_THROW(cc_exponent(1.01, P), DomainError);
    EXPECT_THROW(cc_exponent(-0.1, P), DomainError);
  }
}

TEST(SharpEstimate, ZeroFunction) {
  const auto rep = sharp_estimate_check(HalfLineSample{{1.0}, {0.0}, {0.0}}, 1.0, 2.0);
  EXPECT_NEAR(rep.lhs, std::exp(-1.0), 1e-15);
  EXPECT_EQ(rep.delta, 0.0);
  EXPECT_EQ(rep.gamma_p, 0.0);
  EXPECT_GE(rep.rhs, std::exp(-1.0));
  EXPECT_TRUE(rep.holds);
}

TEST(SharpEstimate, ConstantFunction) {
  const double a = 2.0, w = 1.3;
  const auto rep = sharp_estimate_check(HalfLineSample{{a, 10.0}, {w, w}, {0.0, 0.0}}, a, 3.0);
  const double q = 1.5;
  EXPECT_NEAR(rep.lhs, std::exp(std::pow(w, q) - a), 1e-12);
  EXPECT_EQ(rep.delta, 0.0);
  EXPECT_NEAR(rep.rhs, std::exp(std::pow(w, q) - a) * std::exp(digamma(3.0).value + kEulerGamma), 1e-12);
  EXPECT_TRUE(rep.holds);
}

TEST(SharpEstimate, TransformedMoserBattery) {
  for (int N : {2, 4}) {
    const auto P = make_params(N);
    for (double j : {5.0, 10.0, 20.0})
      for (double a : {0.5, 2.0}) {
        const auto rep = sharp_estimate_check(transformed_moser(j, a, P), a, P.k + 1.0);
        EXPECT_TRUE(rep.holds) << N << " " << j << " " << a;
        EXPECT_LT(rep.delta, 1.0);
        EXPECT_NEAR(rep.delta, (j - a) / j, 1e-12);
      }
  }
}

TEST(SharpEstimate, RejectsVacuousAndMalformed) {
  EXPECT_THROW(sharp_estimate_check(HalfLineSample{{1.0, 3.0}, {0.0, 2.0}, {1.0, 1.0}}, 1.0, 2.0), DomainError);
  EXPECT_THROW(sharp_estimate_check(HalfLineSample{{1.0}, {0.0}, {0.0}}, 2.0, 2.0), DomainError);
  EXPECT_THROW(sharp_estimate_check(HalfLineSample{{1.0}, {0.0}, {0.0}}, 1.0, 1.5), DomainError);
}

namespace {

Json strip_time(Json j) {
  j.erase("generated_at");
  return j;
}

}  // namespace

TEST(Report, ZeroPerturbationWitnessBeatsUpperBound) {
  const auto P = make_params(2);
  const auto rep = build_report(PerturbationSpec::zero(), P);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_GT(rep.witness->value, rep.json["concentration_upper"].get<double>());
  bool found = false;
  for (const auto& c : rep.json["checks"])
    if (c["name"] == "witness_exceeds_concentration_upper") {
      found = true;
      EXPECT_TRUE(c["passed"].get<bool>());
    }
  EXPECT_TRUE(found);
}

TEST(Report, PerturbedFullReport) {
  const auto P = make_params(2);
  const auto f = PerturbationSpec::power(1, 1, 1);
  const auto rep = build_report(f, P);
  EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures.front());
  EXPECT_EQ(rep.json["admissibility"]["verdict"], "pass");
  EXPECT_GT(rep.json["witness"]["value"].get<double>(), 0.5);
  EXPECT_LE(rep.witness->value, rep.extremal->selected().functional_value + 1e-8);
  const std::vector<std::string> keys{"schema", "generated_at", "params", "perturbation", "quadrature",
                                      "concentration_upper", "witness", "blowup", "extremal", "admissibility",
                                      "checks", "failures", "files"};
  std::vector<std::string> got;
  for (auto it = rep.json.begin(); it != rep.json.end(); ++it) got.push_back(it.key());
  EXPECT_EQ(got, keys);
}

TEST(Report, DryRun) {
  ReportOptions o;
  o.dry_run = true;
  const auto rep = build_report(PerturbationSpec::power(1, 1, 1), make_params(2), o);
  EXPECT_NEAR(rep.json["witness"]["value"].get<double>(), 0.5, 1e-14);
  EXPECT_FALSE(rep.extremal.has_value());
}

TEST(Report, Deterministic) {
  const auto P = make_params(2);
  const auto f = PerturbationSpec::log(1, 2);
  const auto a = build_report(f, P), b = build_report(f, P);
  EXPECT_EQ(strip_time(a.json).dump(), strip_time(b.json).dump());
}

TEST(Report, ComponentFailureIsRecorded) {
  ReportOptions o;
  o.j_list = {1, 2};
  const auto rep = build_report(PerturbationSpec::power(1, 1, 1), make_params(2), o);
  EXPECT_FALSE(rep.ok());
  EXPECT_FALSE(rep.json["failures"].empty());
  EXPECT_TRUE(rep.json["blowup"].is_null());
}
