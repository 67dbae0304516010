#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "oracle_values.hpp"
#include "tmlab/model.hpp"

using namespace tmlab;

TEST(Params, MatchOracles) {
  struct Row {
    int N;
    double omega, cN, mu, aN;
  } rows[] = {{2, oracle::kOmega_2, oracle::kCN_2, oracle::kMu_2, oracle::kAN_2},
              {4, oracle::kOmega_4, oracle::kCN_4, oracle::kMu_4, oracle::kAN_4},
              {6, oracle::kOmega_6, oracle::kCN_6, oracle::kMu_6, oracle::kAN_6},
              {8, oracle::kOmega_8, oracle::kCN_8, oracle::kMu_8, oracle::kAN_8}};
  for (const auto& r : rows) {
    const auto P = make_params(r.N);
    EXPECT_EQ(P.k * 2, r.N);
    EXPECT_NEAR(P.omega / r.omega, 1.0, 1e-14);
    EXPECT_NEAR(P.c_N / r.cN, 1.0, 1e-14);
    EXPECT_NEAR(P.mu_N / r.mu, 1.0, 1e-14);
    EXPECT_NEAR(P.a_N / r.aN, 1.0, 1e-14);
    EXPECT_NEAR(P.mu_N, r.N * std::pow(P.c_N, 2.0 / r.N), 1e-12 * P.mu_N);
  }
}

TEST(Params, KnownClosedForms) {
  EXPECT_NEAR(make_params(2).mu_N, 4 * M_PI, 1e-14);
  EXPECT_NEAR(make_params(4).c_N, 3 * M_PI * M_PI, 1e-12);
  EXPECT_DOUBLE_EQ(make_params(2).q0(), 2.0);
}

TEST(Params, RejectsOddAndSmall) {
  EXPECT_THROW(make_params(3), DomainError);
  EXPECT_THROW(make_params(0), DomainError);
  try {
    make_params(5);
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("N = 2k"), std::string::npos);
  }
}

TEST(Binomial, Values) {
  EXPECT_DOUBLE_EQ(binomial(4, 2), 6.0);
  EXPECT_DOUBLE_EQ(binomial(7, 0), 1.0);
  EXPECT_DOUBLE_EQ(binomial(10, 3), 120.0);
}

TEST(Perturbation, ZeroFamily) {
  const auto f = PerturbationSpec::zero();
  EXPECT_TRUE(f.is_zero());
  EXPECT_EQ(f.eval_f(0.3), 0.0);
  EXPECT_EQ(f.eval_f(0.0), 0.0);
}

TEST(Perturbation, PowerMatchesFormula) {
  const auto f = PerturbationSpec::power(1, 1, 1);
  for (double r : {0.01, 0.2, 0.5, 0.9, 0.999}) EXPECT_NEAR(f.eval_f(r), r / (1 - r), 1e-13 * (1 + f.eval_f(r)));
  EXPECT_NEAR(PerturbationSpec::power(2, 1, 3).eval_f(0.5), 1.5, 1e-15);
  EXPECT_NEAR(PerturbationSpec::power(1, 0, 1).eval_f(0.5), 0.5, 1e-15);
  const auto g = PerturbationSpec::power(0.5, -2, 2);
  EXPECT_NEAR(g.eval_f(0.25), 2 * 0.5 * 0.75 * 0.75, 1e-14);
  EXPECT_FALSE(PerturbationSpec::power(1, 0, -1).is_positive());
  EXPECT_EQ(f.eval_f(0.0), 0.0);
  EXPECT_TRUE(f.is_positive());
}

TEST(Perturbation, PowerUnboundedNearOne) {
  const auto f = PerturbationSpec::power(1, 1, 1);
  EXPECT_GT(f.eval_f(1 - 1e-9), 1e8);
  EXPECT_THROW((void)f.eval_f(1.0), DomainError);
  EXPECT_THROW((void)f.eval_f(-0.1), DomainError);
}

TEST(Perturbation, PowerRejectsBadA) { EXPECT_THROW(PerturbationSpec::power(0, 1, 1), DomainError); }

TEST(Perturbation, LogFamily) {
  const auto f = PerturbationSpec::log(1.0, 2.0);
  EXPECT_NEAR(f.eval_f(0.01), 1.0 / std::pow(std::log(100.0), 2), 1e-14);
  EXPECT_EQ(f.eval_f(0.0), 0.0);
  EXPECT_GE(f.eval_f(0.6), 0.0);
  EXPECT_TRUE(f.sigma_class().has_value());
  EXPECT_DOUBLE_EQ(*f.sigma_class(), 2.0);
  EXPECT_THROW(PerturbationSpec::log(1.0, 1.0), DomainError);
  EXPECT_THROW(PerturbationSpec::log(0.0, 2.0), DomainError);
}

TEST(Perturbation, LogFamilyContinuousAtCut) {
  const auto f = PerturbationSpec::log(1.0, 3.0);
  const double rc = std::exp(-1.0);
  EXPECT_NEAR(f.eval_f(rc * (1 - 1e-9)), f.eval_f(rc * (1 + 1e-9)), 1e-7);
}

TEST(Perturbation, ContinuityUnderRefinement) {
  auto worst_jump = [](const PerturbationSpec& f, int n) {
    double worst = 0;
    for (int i = 0; i < n; ++i) {
      const double r0 = 0.95 * i / n, r1 = 0.95 * (i + 1) / n;
      worst = std::max(worst, std::abs(f.eval_f(r1) - f.eval_f(r0)));
    }
    return worst;
  };
  for (const auto& f : {PerturbationSpec::power(1, 1, 1), PerturbationSpec::log(2, 1.5)}) {
    double prev = worst_jump(f, 1000);
    for (int n : {10000, 100000}) {
      const double w = worst_jump(f, n);
      EXPECT_LT(w, prev) << f.to_string();
      prev = w;
    }
  }
}

TEST(Perturbation, TableFamily) {
  const auto f = PerturbationSpec::table({0, 0.5, 0.9}, {0, 0.2, 0.3});
  EXPECT_NEAR(f.eval_f(0.5), 0.2, 1e-15);
  EXPECT_GT(f.eval_f(0.7), 0.2);
  EXPECT_LT(f.eval_f(0.7), 0.3);
  EXPECT_FALSE(f.sigma_class().has_value());
  EXPECT_THROW(PerturbationSpec::table({0.1, 0.5}, {0, 0.2}), DomainError);
}

TEST(Perturbation, TableFromCsv) {
  const auto path = std::filesystem::temp_directory_path() / "tmlab_model_table.csv";
  std::ofstream(path) << "r,f\n0,0\n0.5,0.1\n0.8,0.4\n";
  const auto f = PerturbationSpec::table_from_csv(path.string());
  EXPECT_NEAR(f.eval_f(0.8), 0.4, 1e-15);
  std::filesystem::remove(path);
}

TEST(Perturbation, ParseGrammar) {
  const auto p = PerturbationSpec::parse("power:a=2,b=0.5,gamma=3");
  EXPECT_EQ(p.family(), PerturbationFamily::power);
  EXPECT_DOUBLE_EQ(p.a(), 2);
  EXPECT_DOUBLE_EQ(p.b(), 0.5);
  EXPECT_DOUBLE_EQ(p.gamma(), 3);
  EXPECT_TRUE(PerturbationSpec::parse("zero").is_zero());
  EXPECT_DOUBLE_EQ(PerturbationSpec::parse("log:sigma=3").sigma(), 3);
  EXPECT_THROW(PerturbationSpec::parse("cubic"), ConfigError);
  EXPECT_THROW(PerturbationSpec::parse("power:a=x"), ConfigError);
  EXPECT_THROW(PerturbationSpec::parse("power:q=1"), ConfigError);
}

TEST(Perturbation, JsonRoundTrip) {
  const auto p = PerturbationSpec::power(1, 2, 0.5);
  const auto q = PerturbationSpec::from_json(p.to_json());
  EXPECT_EQ(q.to_string(), p.to_string());
}

TEST(GrowthDiagnostic, PowerFamilyWithSigmaTwo) {
  const double g = growth_diagnostic(PerturbationSpec::power(1, 0, 1), 2.0);
  EXPECT_NEAR(g, std::pow(std::log(16.0), 2) / 16, 1e-14);
  EXPECT_LT(g, 4 * std::exp(-2.0));
}

TEST(GrowthDiagnostic, LogFamilyIsBoundedForItsSigma) {
  const double g = growth_diagnostic(PerturbationSpec::log(1, 2), 2.0);
  EXPECT_NEAR(g, 1.0, 1e-12);
}
