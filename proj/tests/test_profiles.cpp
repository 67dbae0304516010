#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "tmlab/families.hpp"
#include "tmlab/profiles.hpp"

using namespace tmlab;

TEST(Profiles, ClosedFormValues) {
  const auto v = linear_profile();
  EXPECT_NEAR(v.value(0.25), 0.75, 1e-15);
  EXPECT_NEAR(v.derivative(0.25), -1.0, 1e-14);
  const auto q = quadratic_profile();
  EXPECT_NEAR(q.value(0.5), 0.375, 1e-15);
  EXPECT_NEAR(q.derivative(0.5), -0.5, 1e-14);
  EXPECT_EQ(zero_profile().value(0.3), 0.0);
  EXPECT_THROW((void)v.value(1.5), DomainError);
}

TEST(X1Norm, LinearAndQuadraticClosedForms) {
  for (int N : {2, 4, 6}) {
    const auto P = make_params(N);
    const double lin = std::pow(P.c_N / (P.N - P.k + 1.0), 1.0 / (P.k + 1));
    const double quad = std::pow(P.c_N / (2.0 * (P.k + 1)), 1.0 / (P.k + 1));
    EXPECT_NEAR(x1_norm(linear_profile(), P), lin, 1e-13 * lin) << N;
    EXPECT_NEAR(x1_norm(quadratic_profile(), P), quad, 1e-13 * quad) << N;
  }
  EXPECT_NEAR(x1_norm(linear_profile(), make_params(2)), std::sqrt(M_PI), 1e-14);
}

TEST(X1Norm, HomogeneousUnderScaling) {
  const auto P = make_params(4);
  const double n = x1_norm(linear_profile(), P);
  EXPECT_NEAR(x1_norm(scale(linear_profile(), -2.5), P), 2.5 * n, 1e-13);
  EXPECT_EQ(x1_norm(scale(linear_profile(), 0.0), P), 0.0);
}

TEST(X1Norm, StableUnderRefinement) {
  const auto P = make_params(2);
  const auto v = conc_family(1e-5, P);
  const PanelScheme s;
  PanelScheme fine = s;
  fine.panels *= 2;
  EXPECT_NEAR(x1_norm(v, P, s), x1_norm(v, P, fine), 1e-12);
}

TEST(X1Norm, NonFiniteSlopeReportsLocation) {
  const auto P = make_params(2);
  const auto bad = RadialProfile::from_samples({0, 1, 2}, {0, 1, 2}, {1, NAN, 1}, "bad");
  try {
    (void)x1_norm(bad, P);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("t ="), std::string::npos);
  }
}

TEST(RadialBound, HoldsOnUnitNormProfiles) {
  for (int N : {2, 4}) {
    const auto P = make_params(N);
    for (const auto& v : {linear_profile(), quadratic_profile(), conc_family(1e-4, P), moser(10, P)}) {
      const auto u = scale(v, 1.0 / x1_norm(v, P));
      const auto rep = radial_bound_check(u, P);
      EXPECT_TRUE(rep.holds) << v.label() << " N=" << N << " excess " << rep.max_excess;
      EXPECT_NEAR(rep.norm, 1.0, 1e-12);
    }
  }
}

TEST(RadialBound, MoserIsSharpAtItsKink) {
  const auto P = make_params(2);
  const double j = 10;
  const double t = j / P.N;
  EXPECT_NEAR(moser(j, P).value_t(t), radial_bound(P, 1.0, t), 1e-12);
}

TEST(Sampled, InterpolatesAndRoundTripsThroughCsv) {
  const auto P = make_params(2);
  const auto v = conc_family(1e-3, P);
  const auto grid = profile_grid(v, {});
  const auto smp = v.on(grid);
  const auto nodes = grid.nodes();
  std::vector<double> t{0.0}, val{0.0}, s{v.slope_t(0.0)};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    t.push_back(nodes[i]);
    val.push_back(smp.V[i]);
    s.push_back(smp.S[i]);
  }
  const auto sampled = RadialProfile::from_samples(t, val, s, "sampled");
  EXPECT_NEAR(x1_norm(sampled, P), x1_norm(v, P), 1e-5);
  EXPECT_NEAR(sampled.value_t(nodes[5]), v.value_t(nodes[5]), 1e-15);

  const auto path = (std::filesystem::temp_directory_path() / "tmlab_profile_rt.csv").string();
  write_profile_csv(sampled, path);
  const auto back = read_profile_csv(path);
  EXPECT_NEAR(x1_norm(back, P), x1_norm(sampled, P), 1e-13);
  std::filesystem::remove(path);
}

TEST(Sampled, RejectsNonzeroBoundaryValue) {
  EXPECT_THROW(RadialProfile::from_samples({0, 1}, {0.5, 1}, {1, 1}, "x"), DomainError);
  EXPECT_THROW(RadialProfile::from_samples({0.1, 1}, {0, 1}, {1, 1}, "x"), DomainError);
}

TEST(Sampled, BadCsvIsConfigError) {
  const auto path = (std::filesystem::temp_directory_path() / "tmlab_bad_profile.csv").string();
  std::ofstream(path) << "r,t,v\n1,0,0\n";
  EXPECT_THROW(read_profile_csv(path), ConfigError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_profile_csv("/nonexistent/profile.csv"), IoError);
}
