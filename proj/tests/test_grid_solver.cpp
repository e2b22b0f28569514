#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include <lorentz_fick/analysis.hpp>
#include <lorentz_fick/grid_solver.hpp>

using namespace lorentz_fick;

namespace {

ScatteringTable bump_table(const KineticParams& p, std::size_t n = 513) {
  return ScatteringTable::build(RadialPotential::quartic_bump(), p.epsilon, p.alpha, n);
}

}  // namespace

TEST(Grid, GeometryAndVerticalRays) {
  const Grid g{10, 8, 2.0, 0.5};
  EXPECT_DOUBLE_EQ(g.dx(), 0.2);
  EXPECT_DOUBLE_EQ(g.x(0), 0.1);
  EXPECT_EQ(g.cos_theta(2), 0.0);
  EXPECT_EQ(g.cos_theta(6), 0.0);
  EXPECT_EQ(g.mirror(0), 4u);
  EXPECT_EQ(g.mirror(1), 3u);
  EXPECT_THROW((Grid{4, 8, 1.0, 0.5}.validate()), DomainError);
  EXPECT_THROW((Grid{10, 7, 1.0, 0.5}.validate()), DomainError);
}

TEST(Stencils, RowsSumToZeroAndKernelIsAProbability) {
  KineticParams p;
  const Grid g{16, 64, 1.0, p.delta()};
  const auto l = landau_stencil(g, 0.7);
  EXPECT_NEAR(std::accumulate(l.weights.begin(), l.weights.end(), 0.0), 0.0, 1e-9);
  const auto table = bump_table(p);
  for (auto interp : {AngularInterpolation::linear, AngularInterpolation::cubic}) {
    const auto K = rotation_kernel(table, 64, interp, 4000);
    EXPECT_NEAR(std::accumulate(K.begin(), K.end(), 0.0), 1.0, 1e-12);
    for (std::size_t m = 1; m < 32; ++m) EXPECT_NEAR(K[m], K[64 - m], 1e-12);  // odd table, symmetric kernel
  }
  const auto b = boltzmann_stencil(g, table, 2.0, AngularInterpolation::linear, 4000);
  EXPECT_NEAR(std::accumulate(b.weights.begin(), b.weights.end(), 0.0), 0.0, 1e-9);
}

TEST(SolveLandau, EquilibriumIsConstant) {
  const auto f = solve_landau(Grid{50, 32, 1.0, 0.3}, 1.5, 1.5, 0.5);
  EXPECT_NEAR(f.min_value(), 1.5, 1e-12);
  EXPECT_NEAR(f.max_value(), 1.5, 1e-12);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_NEAR(f.flux(i), 0.0, 1e-12);
}

TEST(SolveLandau, MaximumPrinciple) {
  for (double delta : {1.0, 0.2, 0.05}) {
    const auto f = solve_landau(Grid{200, 64, 1.0, delta}, 1.0, 2.0, 0.5);
    EXPECT_GE(f.min_value(), 1.0 - 1e-12);
    EXPECT_LE(f.max_value(), 2.0 + 1e-12);
  }
}

TEST(SolveLandau, ReflectionSymmetry) {
  // (rho1 <-> rho2, x -> L - x, theta -> pi - theta) maps solutions to solutions.
  const Grid g{60, 32, 1.0, 0.3};
  const auto a = solve_landau(g, 1.0, 2.0, 0.5);
  const auto b = solve_landau(g, 2.0, 1.0, 0.5);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.n_x; ++i)
    for (std::size_t j = 0; j < g.n_theta; ++j)
      worst = std::max(worst, std::abs(a.at(i, j) - b.at(g.n_x - 1 - i, g.mirror(j))));
  EXPECT_LE(worst, 1e-11);
}

TEST(SolveLandau, ProfileApproachesLinearAsDeltaShrinks) {
  double prev = 1.0;
  for (double delta : {0.4, 0.2, 0.1}) {
    const double d = linear_profile_distance(solve_landau(Grid{200, 64, 1.0, delta}, 1.0, 2.0, 0.5));
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(SolveLandau, FaceFluxIsConserved) {
  // the upwind scheme conserves mass exactly: every face carries the same flux
  const auto f = solve_landau(Grid{100, 32, 1.0, 0.2}, 1.0, 2.0, 0.5);
  for (std::size_t k = 1; k <= 100; ++k) EXPECT_NEAR(f.face_flux(k), f.face_flux(0), 1e-9);
}

TEST(SolveLandau, GridConvergenceIsFirstOrder) {
  const auto c = solve_landau(Grid{100, 64, 1.0, 0.2}, 1.0, 2.0, 0.5);
  const auto m = solve_landau(Grid{200, 64, 1.0, 0.2}, 1.0, 2.0, 0.5);
  const auto f = solve_landau(Grid{400, 64, 1.0, 0.2}, 1.0, 2.0, 0.5);
  const double d1 = profile_change(m, c), d2 = profile_change(f, m);
  EXPECT_LT(d2, 0.7 * d1);
}

TEST(SolveLandau, SourceIterationAgreesWithDirect) {
  const Grid g{40, 16, 1.0, 0.5};
  SolverOptions si;
  si.backend = SolverBackend::source_iteration;
  const auto a = solve_landau(g, 1.0, 2.0, 0.5);
  const auto b = solve_landau(g, 1.0, 2.0, 0.5, si);
  EXPECT_LE(field_distance(a, b), 1e-9);
  EXPECT_EQ(b.diagnostics.backend, "source_iteration");
}

TEST(SolveLandau, SourceIterationReportsNonConvergence) {
  SolverOptions si;
  si.backend = SolverBackend::source_iteration;
  si.max_iterations = 3;
  try {
    (void)solve_landau(Grid{40, 16, 1.0, 0.1}, 1.0, 2.0, 0.5, si);
    FAIL() << "expected a ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.history().size(), 3u);
  }
}

TEST(SolveLandau, RejectsNonPositiveCoefficient) {
  EXPECT_THROW(solve_landau(Grid{20, 16, 1.0, 0.5}, 1.0, 2.0, 0.0), DomainError);
}

TEST(SolveBoltzmann, ZeroPotentialIsFreeTransport) {
  KineticParams p;
  const Grid g{40, 34, 1.0, p.delta()};  // no exactly vertical ray
  const auto zero = ScatteringTable::build(RadialPotential::zero(), p.epsilon, p.alpha, 33);
  const auto f = solve_boltzmann(g, 1.0, 2.0, zero, p.mu);
  for (std::size_t i = 0; i < g.n_x; ++i)
    for (std::size_t j = 0; j < g.n_theta; ++j) EXPECT_NEAR(f.at(i, j), g.cos_theta(j) > 0.0 ? 1.0 : 2.0, 1e-10);
}

TEST(SolveBoltzmann, EquilibriumAndMaximumPrinciple) {
  KineticParams p;
  const auto table = bump_table(p);
  const auto e = solve_boltzmann(Grid{50, 64, 1.0, p.delta()}, 1.2, 1.2, table, p.mu);
  EXPECT_NEAR(e.min_value(), 1.2, 1e-12);
  EXPECT_NEAR(e.max_value(), 1.2, 1e-12);
  const auto f = solve_boltzmann(p, 100, 64, table);
  EXPECT_GE(f.min_value(), p.rho1 - 1e-12);
  EXPECT_LE(f.max_value(), p.rho2 + 1e-12);
}

TEST(SolveBoltzmann, TableMustResolveTheGrid) {
  KineticParams p;
  const auto coarse = bump_table(p, 17);
  EXPECT_THROW(solve_boltzmann(p, 20, 64, coarse), DomainError);
}

TEST(SolveBoltzmann, ApproachesLandauAsEpsilonShrinks) {
  double prev = 1.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    KineticParams p;
    p.epsilon = eps;
    p = p.with_delta(0.2);
    const auto table = bump_table(p);
    const auto fb = solve_boltzmann(p, 100, 64, table);
    const auto fl = solve_landau(Grid{100, 64, p.L, p.delta()}, p.rho1, p.rho2, landau_coefficient_B(table, p.mu));
    const double d = field_distance(fb, fl);
    EXPECT_LT(d, prev) << eps;
    prev = d;
  }
}

TEST(Neumann, AgreesWithDirectSolve) {
  const Grid g{60, 32, 1.0, 0.8};
  const auto st = landau_stencil(g, 1.0);
  const auto nr = neumann_iterate(g, 1.0, 2.0, st, 1.0 / 0.8, 500);
  EXPECT_TRUE(nr.converged);
  for (double r : nr.contraction_estimates) EXPECT_LT(r, 1.0);
  EXPECT_LE(field_distance(nr.field, solve_landau(g, 1.0, 2.0, 1.0)), 1e-6);
}

TEST(Neumann, ZeroDataGivesZeroTerms) {
  const Grid g{20, 16, 1.0, 0.8};
  const auto nr = neumann_iterate(g, 0.0, 0.0, landau_stencil(g, 1.0), 1.0, 10);
  EXPECT_EQ(nr.field.max_value(), 0.0);
  EXPECT_EQ(nr.field.min_value(), 0.0);
  EXPECT_EQ(nr.term_norms.front(), 0.0);
}

TEST(Hilbert, EquilibriumHasNoHarmonicOrRemainder) {
  const auto h = hilbert_residual(solve_landau(Grid{50, 32, 1.0, 0.2}, 1.3, 1.3, 0.5));
  for (double a : h.g1_amplitude) EXPECT_NEAR(a, 0.0, 1e-10);
  EXPECT_NEAR(h.remainder_norm, 0.0, 1e-10);
}

TEST(Hilbert, AmplitudeMatchesInverseLaplacianOfBulkGradient) {
  // g1 = L^{-1}(cos theta d rho/dx) = -(d rho/dx / coef) cos theta in the bulk.
  const double coef = 0.5;
  const auto f = solve_landau(Grid{400, 128, 1.0, 0.05}, 1.0, 2.0, coef);
  const auto h = hilbert_residual(f);
  std::vector<double> xb, rb;
  double amin = 1e300, amax = -1e300;
  for (std::size_t i = 0; i < h.x1.size(); ++i) {
    if (h.x1[i] < 0.2 || h.x1[i] > 0.8) continue;
    xb.push_back(h.x1[i]);
    rb.push_back(h.rho[i]);
    amin = std::min(amin, h.g1_amplitude[i]);
    amax = std::max(amax, h.g1_amplitude[i]);
  }
  const double expected = -fitted_slope(xb, rb) / coef;
  EXPECT_NEAR(amin / expected, 1.0, 0.02);
  EXPECT_NEAR(amax / expected, 1.0, 0.02);
  EXPECT_DOUBLE_EQ(h.expected_amplitude, -1.0 / coef);
}

TEST(DiscreteField, InterpolationAndCsv) {
  const auto f = solve_landau(Grid{20, 16, 1.0, 0.5}, 1.0, 2.0, 0.5);
  EXPECT_NEAR(f.value_at(f.grid.x(3), f.grid.theta(5)), f.at(3, 5), 1e-14);
  EXPECT_NEAR(f.rho_at(f.grid.x(7)), f.rho(7), 1e-14);
  std::ostringstream a, b;
  f.write_csv(a);
  f.write_profile_csv(b);
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "x1,theta,g");
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "x1,rho,J");
}
