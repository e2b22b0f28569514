#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include <lorentz_fick/analysis.hpp>

using namespace lorentz_fick;

TEST(GreenKubo, ClosedFormsForBothConventions) {
  // (-Laplacian)^{-1} cos = cos, so <cos^2> = 1/2 gives 1/mu; arclength and both components give 4 pi/mu.
  for (double mu : {0.5, 1.0, 3.0}) {
    EXPECT_NEAR(green_kubo_D(mu, DConvention::component_normalized), 1.0 / mu, 1e-13);
    EXPECT_NEAR(green_kubo_D(mu, DConvention::paper_literal), 4.0 * std::numbers::pi / mu, 1e-12);
  }
  EXPECT_THROW(green_kubo_D(0.0, DConvention::component_normalized), DomainError);
  EXPECT_EQ(d_convention_from_string(to_string(DConvention::paper_literal)), DConvention::paper_literal);
  EXPECT_THROW(d_convention_from_string("literal"), DomainError);
}

TEST(LinearProfile, EndpointsAndMidpoint) {
  EXPECT_EQ(linear_profile(1.0, 2.0, 2.0, 0.0), 1.0);
  EXPECT_EQ(linear_profile(1.0, 2.0, 2.0, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(linear_profile(1.0, 2.0, 2.0, 1.0), 1.5);
  EXPECT_THROW(linear_profile(1.0, 2.0, 1.0, 1.5), DomainError);
  EXPECT_THROW(linear_profile(1.0, 2.0, 0.0, 0.0), DomainError);
}

TEST(FickCheck, ExactLinearProfilePasses) {
  const auto p = linear_stationary_profile(1.0, 2.0, 1.0, 0.7, 200);
  const auto r = fick_check(p, 0.7);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.J_mean, -0.7, 1e-12);
  EXPECT_NEAR(r.D_effective, 0.7, 1e-10);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_TRUE(p.within_bounds());
}

TEST(FickCheck, WrongDiffusivityAndCurvedProfileFail) {
  const auto p = linear_stationary_profile(1.0, 2.0, 1.0, 0.7, 200);
  EXPECT_FALSE(fick_check(p, 0.8).flux_pass);

  auto q = p;
  for (std::size_t i = 0; i < q.J.size(); ++i) q.J[i] *= 1.0 + 0.1 * std::sin(std::numbers::pi * q.x1[i]);
  const auto r = fick_check(q, 0.7);
  EXPECT_FALSE(r.spread_pass);
  EXPECT_FALSE(r.residual_pass);
  EXPECT_FALSE(r.pass);
}

TEST(FickCheck, EquilibriumUsesAbsoluteTolerance) {
  const auto p = linear_stationary_profile(1.5, 1.5, 1.0, 1.0, 50);
  const auto r = fick_check(p, 1.0);
  EXPECT_EQ(r.J_expected, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(FickCheck, LandauSlabHasEffectiveDiffusivityNearGreenKubo) {
  // coef mu/2 with mu = 1 gives D = 1; the interior gradient carries this D to well under 3 %.
  const auto f = solve_landau(Grid{400, 128, 1.0, 0.05}, 1.0, 2.0, 0.5);
  const auto r = fick_check(profile_from_field(f), green_kubo_D(1.0, DConvention::component_normalized));
  EXPECT_NEAR(r.D_effective, 1.0, 0.03);
  EXPECT_LE(r.flux_spread, 0.01);
}

TEST(StationaryProfile, BoundsAndCsv) {
  auto p = linear_stationary_profile(1.0, 2.0, 1.0, 1.0, 10);
  p.rho[3] = 2.2;
  EXPECT_FALSE(p.within_bounds());
  p.rho_err[3] = 0.1;
  EXPECT_TRUE(p.within_bounds());
  std::ostringstream os;
  p.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "x1,rho,J,rho_err,J_err");
  p.J.pop_back();
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(PowerLaw, RecoversExponentAndPrefactor) {
  const std::vector<double> x{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.4));
  const auto f = fit_power_law(x, y);
  EXPECT_TRUE(f.valid);
  EXPECT_NEAR(f.exponent, 0.4, 1e-12);
  EXPECT_NEAR(f.prefactor, 3.0, 1e-10);
  EXPECT_NEAR(f.stderr_, 0.0, 1e-10);
}

TEST(PowerLaw, SlopeOfLine) {
  EXPECT_NEAR(fitted_slope({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0}), 2.0, 1e-14);
}

TEST(FieldDistance, SymmetricAndZeroOnSelf) {
  const auto a = solve_landau(Grid{40, 16, 1.0, 0.3}, 1.0, 2.0, 0.5);
  const auto b = solve_landau(Grid{40, 16, 1.0, 0.3}, 1.0, 2.0, 0.9);
  EXPECT_EQ(field_distance(a, a), 0.0);
  EXPECT_EQ(field_distance(a, b), field_distance(b, a));
  EXPECT_GT(field_distance(a, b), 0.0);
  EXPECT_THROW(field_distance(a, solve_landau(Grid{20, 16, 1.0, 0.3}, 1.0, 2.0, 0.5)), DomainError);
}

TEST(ConvergenceStudy, NeedsThreeRegimes) {
  KineticParams p;
  EXPECT_THROW(convergence_study({p, p}, LevelPair::landau_linear), DomainError);
}

TEST(ConvergenceStudy, LandauLinearDecreasesWithDelta) {
  std::vector<KineticParams> regimes;
  for (double d : {0.4, 0.2, 0.1}) regimes.push_back(KineticParams{}.with_delta(d));
  StudyOptions o;
  o.n_x = 200;
  o.n_theta = 64;
  o.landau_coefficient = 0.5;
  const auto t = convergence_study(regimes, LevelPair::landau_linear, o);
  EXPECT_EQ(t.swept, "delta");
  EXPECT_TRUE(t.strictly_decreasing);
  EXPECT_GT(t.fit.exponent, 0.0);
  std::ostringstream os;
  t.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "epsilon,delta,distance,err");
}

TEST(LevelPair, StringRoundTrip) {
  for (auto p : {LevelPair::micro_boltzmann, LevelPair::boltzmann_landau, LevelPair::landau_linear})
    EXPECT_EQ(level_pair_from_string(to_string(p)), p);
  EXPECT_THROW(level_pair_from_string("micro"), DomainError);
}
