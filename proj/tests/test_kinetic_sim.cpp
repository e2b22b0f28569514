#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <lorentz_fick/grid_solver.hpp>
#include <lorentz_fick/kinetic_sim.hpp>

using namespace lorentz_fick;

namespace {

constexpr double kPi = std::numbers::pi;

ScatteringTable bump_table(const KineticParams& p, std::size_t n = 513) {
  return ScatteringTable::build(RadialPotential::quartic_bump(), p.epsilon, p.alpha, n);
}

}  // namespace

TEST(KineticSim, GeneratorRates) {
  KineticParams p;
  const auto g = GeneratorSpec::boltzmann(p);
  EXPECT_NEAR(g.rate, 2.0 * p.mu * std::pow(p.epsilon, -2.0 * p.alpha - p.lambda), 1e-12);
  EXPECT_NEAR(g.time_scale, std::pow(p.epsilon, -p.lambda), 1e-15);
  const auto l = GeneratorSpec::landau(p, 0.5);
  EXPECT_EQ(l.diffusion, 0.5);
  EXPECT_THROW((GeneratorSpec{GeneratorKind::landau, 0.0, -1.0, 1.0}.validate()), DomainError);
}

TEST(KineticSim, LandauCoefficientSources) {
  KineticParams p;
  const auto pot = RadialPotential::quartic_bump();
  EXPECT_EQ(landau_diffusion(p, pot, LandauCoefficient::half_mu), 0.5);
  EXPECT_NEAR(landau_diffusion(p, pot, LandauCoefficient::table_B, 513), landau_coefficient_B(bump_table(p), p.mu), 1e-12);
  EXPECT_NEAR(landau_diffusion(p, pot, LandauCoefficient::grazing_limit_B), grazing_limit_B(pot, 1.0), 1e-15);
  for (auto c : {LandauCoefficient::table_B, LandauCoefficient::grazing_limit_B, LandauCoefficient::half_mu})
    EXPECT_EQ(landau_coefficient_from_string(to_string(c)), c);
  EXPECT_THROW(landau_coefficient_from_string("B"), DomainError);
}

TEST(KineticSim, BoltzmannFreeTransportIsExact) {
  KineticParams p;
  const auto zero = ScatteringTable::build(RadialPotential::zero(), p.epsilon, p.alpha, 33);
  const auto m = KineticModel::boltzmann(p, zero);
  KineticRunConfig c{200, 0.0, 5, 1, 10, 0};
  EXPECT_EQ(stationary_estimate_kinetic(m, {0.3, 0.0}, 0.2, c).mean, p.rho1);
  EXPECT_EQ(stationary_estimate_kinetic(m, {0.3, 0.0}, 3.0, c).mean, p.rho2);
}

TEST(KineticSim, LandauWithoutDiffusionIsFreeTransport) {
  KineticParams p;
  const auto m = KineticModel::landau(p, 0.0);
  KineticRunConfig c{100, 0.0, 5, 1, 10, 0};
  EXPECT_EQ(stationary_estimate_kinetic(m, {0.7, 0.0}, -0.4, c).mean, p.rho1);
  EXPECT_EQ(stationary_estimate_kinetic(m, {0.7, 0.0}, kPi - 0.4, c).mean, p.rho2);
}

TEST(KineticSim, ExitTimeAndPositionForStraightPath) {
  KineticParams p;
  const auto zero = ScatteringTable::build(RadialPotential::zero(), p.epsilon, p.alpha, 33);
  SplitMix64 rng(1);
  const auto rec = boltzmann_exit_sample({0.4, 0.0}, kPi / 3, p, zero, 10.0, rng);
  EXPECT_EQ(rec.kind, ExitKind::exited_left);
  EXPECT_NEAR(rec.hitting_time, 0.4 / std::cos(kPi / 3), 1e-12);
  EXPECT_EQ(rec.exit_state.x.x, 0.0);
  EXPECT_NEAR(rec.exit_state.x.y, -0.4 * std::tan(kPi / 3), 1e-12);
}

TEST(KineticSim, EquilibriumEstimatesAreConstant) {
  KineticParams p;
  p.rho1 = p.rho2 = 1.7;
  KineticRunConfig c{300, 0.0, 5, 1, 10, 0};
  EXPECT_NEAR(stationary_estimate_kinetic(KineticModel::boltzmann(p, bump_table(p, 129)), {0.5, 0.0}, 1.0, c).mean, 1.7, 1e-13);
  EXPECT_NEAR(stationary_density_kinetic(KineticModel::landau(p, 3.0), {0.5, 0.0}, c).mean, 1.7, 1e-13);
}

TEST(KineticSim, LandauFreeAngleIsBrownian) {
  // Without transport the angle diffuses with variance 2 D time_scale t.
  KineticParams p;
  const double D = 2.0, t = 0.01;
  const auto gen = GeneratorSpec::landau(p, D);
  const LandauSampler s(p, gen, LandauSampler::dt_for(gen));
  const std::size_t n = 40000;
  double m = 0.0, v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(3, 0, i));
    const double d = s.free_angle(0.0, t, rng);
    m += d / n;
    v += d * d / n;
  }
  const double var = 2.0 * D * gen.time_scale * t;
  EXPECT_NEAR(m, 0.0, 4.0 * std::sqrt(var / n));
  EXPECT_NEAR(v / var, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(KineticSim, LandauStepGuard) {
  KineticParams p;
  const auto gen = GeneratorSpec::landau(p, 3.5);
  EXPECT_THROW(LandauSampler(p, gen, 1.0), DomainError);
  EXPECT_NO_THROW(LandauSampler(p, gen, LandauSampler::dt_for(gen)));
}

TEST(KineticSim, BoltzmannMonteCarloMatchesGrid) {
  KineticParams p;
  const auto table = bump_table(p);
  const auto field = solve_boltzmann(p, 400, 128, table);
  const auto m = KineticModel::boltzmann(p, table);
  KineticRunConfig c{40000, 0.0, 9, 1, 10, 0};
  for (auto [x1, th] : {std::pair{0.5, 0.0}, std::pair{0.3, 3 * kPi / 4}}) {
    const auto e = stationary_estimate_kinetic(m, {x1, 0.0}, th, c);
    EXPECT_NEAR(e.mean, field.value_at(x1, th), 4.0 * e.stderr() + 2e-3) << x1 << ' ' << th;
  }
}

TEST(KineticSim, LandauMonteCarloMatchesGrid) {
  KineticParams p;
  const double B = 1.5;
  const auto field = solve_landau(Grid{400, 128, p.L, p.delta()}, p.rho1, p.rho2, B);
  const auto m = KineticModel::landau(p, B);
  KineticRunConfig c{20000, 0.0, 9, 1, 10, 0};
  const auto e = stationary_estimate_kinetic(m, {0.5, 0.0}, kPi / 4, c);
  EXPECT_NEAR(e.mean, field.value_at(0.5, kPi / 4), 4.0 * e.stderr() + 2e-3);
}

TEST(KineticSim, EstimatesIndependentOfWorkerCount) {
  KineticParams p;
  const auto m = KineticModel::boltzmann(p, bump_table(p, 129));
  KineticRunConfig c1{3000, 0.0, 77, 1, 10, 0}, c4{3000, 0.0, 77, 4, 10, 0};
  const auto a = stationary_estimate_kinetic(m, {0.5, 0.0}, 1.0, c1);
  const auto b = stationary_estimate_kinetic(m, {0.5, 0.0}, 1.0, c4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.stderr(), b.stderr());
}

TEST(KineticSim, CensoredPathsContinueAndAreCounted) {
  KineticParams p;
  const auto m = KineticModel::landau(p, 2.0);
  KineticRunConfig c{2000, 0.05, 3, 1, 1000, 0};
  const auto e = stationary_estimate_kinetic(m, {0.5, 0.0}, 1.2, c);
  EXPECT_GT(e.censored_fraction, 0.5);
  EXPECT_EQ(e.n_dropped, 0u);
  KineticRunConfig none{2000, 0.05, 3, 1, 0, 0};
  const auto d = stationary_estimate_kinetic(m, {0.5, 0.0}, 1.2, none);
  EXPECT_EQ(d.n_dropped, d.n_censored_first);
  EXPECT_EQ(d.n_used + d.n_dropped, d.n);
}

TEST(KineticSim, SurvivalDecreasesWithHorizon) {
  KineticParams p;
  const auto m = KineticModel::boltzmann(p, bump_table(p, 129));
  const auto start = StartDistribution::mid_slab(p.L);
  EXPECT_EQ(survival_fraction(m, 0.0, 1000, start, 1), 1.0);
  // at unit speed nothing started at L/2 can leave before t = L/2
  EXPECT_EQ(survival_fraction(m, 0.49, 1000, start, 1), 1.0);
  const double s1 = survival_fraction(m, 1.0, 4000, start, 1);
  const double s2 = survival_fraction(m, 2.0, 4000, start, 1);
  const double s3 = survival_fraction(m, 5.0, 4000, start, 1);
  EXPECT_LT(s1, 1.0);
  EXPECT_LT(s2, s1);
  EXPECT_LT(s3, s2);
  EXPECT_THROW(survival_fraction(m, 1.0, 10, start, 1), DomainError);
}

TEST(KineticSim, InvalidStartRejected) {
  KineticParams p;
  const auto m = KineticModel::landau(p, 1.0);
  SplitMix64 rng(1);
  EXPECT_THROW(m.exit_sample({1.5, 0.0}, 0.0, 1.0, rng), DomainError);
}
