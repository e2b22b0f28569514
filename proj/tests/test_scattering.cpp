#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include <lorentz_fick/scattering.hpp>

using namespace lorentz_fick;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent oracle: integrate the planar orbit y'' = -c grad phi(|y|) with
// an adaptive Cash-Karp 5(4) stepper from x = -1.5 to well past the support.
// The step cap keeps the controller from stepping over the support.
double ode_deflection(const RadialPotential& pot, double c, double b) {
  using State = std::array<double, 4>;
  namespace odeint = boost::numeric::odeint;
  State s{-1.5, b, 1.0, 0.0};
  auto rhs = [&](const State& u, State& du, double) {
    const double r = std::hypot(u[0], u[1]);
    const double f = r < 1.0 ? -c * pot.derivative_over_r(r) : 0.0;
    du = {u[2], u[3], f * u[0], f * u[1]};
  };
  odeint::integrate_adaptive(odeint::make_controlled(1e-12, 1e-12, 0.01, odeint::runge_kutta_cash_karp54<State>()), rhs, s,
                             0.0, 4.0, 1e-3);
  return std::atan2(s[3], s[2]);
}

// First-order (Born) deflection: theta = -c d/db int phi(sqrt(b^2 + s^2)) ds.
double born_deflection(const RadialPotential& pot, double c, double b) {
  const double smax = std::sqrt(std::max(0.0, 1.0 - b * b));
  auto f = [&](double s) {
    const double r = std::hypot(b, s);
    return r > 0.0 ? pot.derivative(r) * b / r : 0.0;
  };
  return -c * 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, smax, 15, 1e-14);
}

}  // namespace

TEST(RadialPotential, QuarticBumpValues) {
  const auto pot = RadialPotential::quartic_bump();
  EXPECT_DOUBLE_EQ(pot.value(0.0), 1.0);
  EXPECT_DOUBLE_EQ(pot.value(0.5), 0.5625);
  EXPECT_EQ(pot.value(1.0), 0.0);
  EXPECT_EQ(pot.value(1.5), 0.0);
  EXPECT_NEAR(pot.derivative(0.5), -4.0 * 0.5 * 0.75, 1e-14);
}

TEST(RadialPotential, SupRDerivativeMatchesCalculus) {
  // |r phi'| = 4 r^2 (1 - r^2) peaks at r^2 = 1/2 with value 1.
  EXPECT_NEAR(RadialPotential::quartic_bump().sup_r_derivative(), 1.0, 1e-10);
  EXPECT_NEAR(RadialPotential::quartic_bump(2.0).sup_r_derivative(), 2.0, 1e-10);
}

TEST(RadialPotential, UnknownProfileRejected) {
  EXPECT_THROW(RadialPotential::by_name("lennard_jones", 1.0), Error);
}

TEST(Deflection, FrozenQuadratureValue) {
  // Frozen from the scattering integral, confirmed by the orbit integration below.
  EXPECT_NEAR(deflection_angle(RadialPotential::quartic_bump(), 0.1, 0.3), 0.158303853510, 1e-11);
}

TEST(Deflection, QuadratureAgreesWithOrbitIntegration) {
  const auto pot = RadialPotential::quartic_bump();
  for (double c : {0.1, 0.4, 0.7411}) {
    for (double b : {-0.9, -0.45, 0.05, 0.3, 0.62, 0.97}) {
      EXPECT_NEAR(deflection_angle(pot, c, b), ode_deflection(pot, c, b), 1e-8) << "c=" << c << " b=" << b;
    }
  }
}

TEST(Deflection, WendlandAgreesWithOrbitIntegration) {
  const auto pot = RadialPotential::wendland();
  for (double b : {0.1, 0.5, 0.8}) EXPECT_NEAR(deflection_angle(pot, 0.2, b), ode_deflection(pot, 0.2, b), 1e-8);
}

TEST(Deflection, WeakCouplingApproachesBornApproximation) {
  const auto pot = RadialPotential::quartic_bump();
  const double c = 1e-4;
  for (double b : {0.1, 0.4, 0.75}) {
    const double born = born_deflection(pot, c, b);
    EXPECT_NEAR(deflection_angle(pot, c, b) / born, 1.0, 1e-3) << b;
  }
}

TEST(Deflection, OddAndGrazing) {
  const auto pot = RadialPotential::quartic_bump();
  for (double b : {0.2, 0.5, 0.9}) EXPECT_DOUBLE_EQ(deflection_angle(pot, 0.3, -b), -deflection_angle(pot, 0.3, b));
  EXPECT_EQ(deflection_angle(pot, 0.3, 1.0), 0.0);
  EXPECT_EQ(deflection_angle(pot, 0.3, -1.0), 0.0);
  EXPECT_EQ(deflection_angle(RadialPotential::zero(), 0.3, 0.4), 0.0);
  EXPECT_THROW(deflection_angle(pot, 0.3, 1.2), DomainError);
}

TEST(Deflection, HeadOnReflection) {
  const auto pot = RadialPotential::quartic_bump();
  EXPECT_TRUE(reflects_head_on(pot, 0.5));
  EXPECT_FALSE(reflects_head_on(pot, 0.49));
  EXPECT_DOUBLE_EQ(deflection_angle(pot, 0.7, 0.0), kPi);
  EXPECT_EQ(deflection_angle(pot, 0.3, 0.0), 0.0);
}

TEST(HardDisk, MatchesGeometricReflection) {
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double b = -1.0 + 2.0 * (k + 0.5) / 1000.0;
    const Vec2 out = reflect({1.0, 0.0}, {-std::sqrt(1.0 - b * b), b});
    worst = std::max(worst, std::abs(hard_disk_deflection(b) - std::atan2(out.y, out.x)));
  }
  EXPECT_LE(worst, 1e-12);
  EXPECT_DOUBLE_EQ(hard_disk_deflection(0.0), kPi);
  EXPECT_EQ(hard_disk_deflection(1.0), 0.0);
}

TEST(Reflect, PreservesSpeedAndIsInvolution) {
  const Vec2 v = unit_from_angle(0.7), w = unit_from_angle(2.1);
  const Vec2 r = reflect(v, w);
  EXPECT_NEAR(norm(r), 1.0, 1e-15);
  const Vec2 rr = reflect(r, w);
  EXPECT_NEAR(rr.x, v.x, 1e-15);
  EXPECT_NEAR(rr.y, v.y, 1e-15);
  EXPECT_THROW(reflect({2.0, 0.0}, w), DomainError);
}

TEST(ScatteringTable, SymmetricGridAndOddAngles) {
  const auto t = ScatteringTable::build(RadialPotential::quartic_bump(), 0.05, 0.1, 129);
  const auto& g = t.impact_grid();
  const auto& a = t.angles();
  ASSERT_EQ(g.size(), 129u);
  EXPECT_EQ(g.front(), -1.0);
  EXPECT_EQ(g.back(), 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_EQ(g[k], -g[g.size() - 1 - k]);
    if (k != g.size() / 2) EXPECT_EQ(a[k], -a[a.size() - 1 - k]);
  }
  // coupling 0.05^0.1 > 1/2 reflects head-on, and pi is its own negative mod 2 pi
  EXPECT_EQ(a[g.size() / 2], kPi);
  EXPECT_EQ(a.front(), 0.0);
  EXPECT_EQ(a.back(), 0.0);
  EXPECT_NEAR(t.coupling(), std::pow(0.05, 0.1), 1e-15);
}

TEST(ScatteringTable, InterpolationReproducesNodesAndIsOdd) {
  const auto pot = RadialPotential::quartic_bump();
  const auto t = ScatteringTable::build_with_coupling(pot, 0.2, 257);
  for (std::size_t k = 0; k < t.impact_grid().size(); k += 17) EXPECT_NEAR(t.angle(t.impact_grid()[k]), t.angles()[k], 1e-14);
  for (double b : {0.123, 0.456, 0.789}) {
    EXPECT_DOUBLE_EQ(t.angle(-b), -t.angle(b));
    EXPECT_NEAR(t.angle(b), deflection_angle(pot, 0.2, b), 1e-5);
  }
}

TEST(ScatteringTable, CsvHeader) {
  const auto t = ScatteringTable::build(RadialPotential::quartic_bump(), 0.1, 0.1, 17);
  std::ostringstream os;
  t.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "b,theta");
}

TEST(LandauCoefficient, LinearInMuAndZeroForZeroPotential) {
  const auto t = ScatteringTable::build(RadialPotential::quartic_bump(), 0.05, 0.1, 513);
  EXPECT_NEAR(landau_coefficient_B(t, 2.0), 2.0 * landau_coefficient_B(t, 1.0), 1e-12);
  EXPECT_GT(landau_coefficient_B(t, 1.0), 0.0);
  const auto z = ScatteringTable::build(RadialPotential::zero(), 0.05, 0.1, 33);
  EXPECT_EQ(landau_coefficient_B(z, 1.0), 0.0);
}

TEST(LandauCoefficient, GrazingLimitMatchesBornIntegral) {
  // B = (mu/2) c^-2 int theta^2 db as c -> 0, with theta from the Born approximation.
  const auto pot = RadialPotential::quartic_bump();
  const double born = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double b) {
        const double th = born_deflection(pot, 1.0, b);
        return th * th;
      },
      -1.0, 1.0, 15, 1e-12);
  EXPECT_NEAR(grazing_limit_B(pot, 1.0), 0.5 * born, 1e-6);
  EXPECT_NEAR(grazing_limit_B(pot, 1.0), 1.4448, 5e-4);
}

TEST(LandauCoefficient, ScalesAsSquareOfHeight) {
  const double b1 = grazing_limit_B(RadialPotential::quartic_bump(1.0), 1.0);
  const double b2 = grazing_limit_B(RadialPotential::quartic_bump(2.0), 1.0);
  EXPECT_NEAR(b2 / b1, 4.0, 1e-6);
}

TEST(AngleBound, HoldsOverSweepWithFittedConstant) {
  const auto pot = RadialPotential::quartic_bump();
  const auto s = angle_bound_study(pot, 0.1, {0.1, 0.05, 0.025}, 513);
  EXPECT_TRUE(s.all_pass);
  for (const auto& r : s.reports) EXPECT_GE(r.margin, 0.0);
}

TEST(AngleBound, WeakCouplingNeedsNoCorrection) {
  const auto pot = RadialPotential::quartic_bump();
  // at alpha = 0.4 the coupling is small and the first-order bound already holds
  const auto t = ScatteringTable::build(pot, 0.05, 0.4, 513);
  EXPECT_TRUE(verify_angle_bound(t, pot, 0.0).pass);
  EXPECT_LE(t.max_abs_angle(), kPi * t.coupling() * pot.sup_r_derivative());
}
