#pragma once

// Stationary kinetic equations in the slab reduced to (x1, theta):
//
//     cos(theta) d/dx1 g = (C g)(theta),   g = rho1 on inflow at x1 = 0,
//                                          g = rho2 on inflow at x1 = L,
//
// where C is a circulant operator on the uniform angle grid: the periodic
// second difference (Landau) or the rotation-jump kernel built from a
// scattering table (Boltzmann), both already divided by delta.
//
// Transport is first-order upwind finite volume on cell-centred x1. The
// discrete system is block tridiagonal in x1 with dense angular blocks; the
// default backend eliminates it exactly. Damped source iteration is available
// as the alternative backend.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "params.hpp"
#include "scattering.hpp"

namespace lorentz_fick {

struct Grid {
  std::size_t n_x = 200;
  std::size_t n_theta = 64;
  double L = 1.0;
  double delta = 1.0;

  void validate() const {
    if (n_x < 8) throw DomainError("grid needs n_x >= 8");
    if (n_theta < 4 || n_theta % 2 != 0) throw DomainError("grid needs an even n_theta >= 4");
    if (!(L > 0.0)) throw DomainError("grid width L must be > 0");
    if (!(delta > 0.0)) throw DomainError("grid delta must be > 0");
  }

  double dx() const { return L / static_cast<double>(n_x); }
  double dtheta() const { return 2.0 * std::numbers::pi / static_cast<double>(n_theta); }
  double x(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }
  double theta(std::size_t j) const { return dtheta() * static_cast<double>(j); }

  /// cos(theta_j), exactly zero on the vertical rays.
  double cos_theta(std::size_t j) const {
    if (n_theta % 4 == 0 && (4 * j == n_theta || 4 * j == 3 * n_theta)) return 0.0;
    return std::cos(theta(j));
  }

  /// Index of pi - theta_j.
  std::size_t mirror(std::size_t j) const { return (n_theta / 2 + n_theta - j) % n_theta; }
};

enum class AngularInterpolation { linear, cubic };
enum class SolverBackend { direct, source_iteration };

inline const char* to_string(SolverBackend b) { return b == SolverBackend::direct ? "direct" : "source_iteration"; }

struct SolverOptions {
  SolverBackend backend = SolverBackend::direct;
  double residual_tolerance = 1e-10;
  double increment_tolerance = 1e-12;
  std::size_t max_iterations = 200000;  // source iteration only
  double damping = 1.0;                 // source iteration relaxation
  AngularInterpolation interpolation = AngularInterpolation::linear;
  std::size_t kernel_samples = 20000;   // impact parameters per Boltzmann kernel
};

struct SolverDiagnostics {
  std::string backend;
  std::size_t iterations = 0;
  double residual_max = 0.0;
  std::vector<double> history;  // residual or increment per iteration
};

/// Circulant angular operator: (C g)_j = sum_m stencil[m] g_{j+m}, rows sum to zero.
struct CollisionStencil {
  std::vector<double> weights;
  std::string kind;
  double coefficient = 0.0;  // Landau coefficient or Boltzmann rate times delta
};

/// Landau stencil coef / (delta dtheta^2) (1, -2, 1).
inline CollisionStencil landau_stencil(const Grid& g, double coef) {
  if (!(coef >= 0.0)) throw DomainError("Landau coefficient must be >= 0");
  CollisionStencil s{std::vector<double>(g.n_theta, 0.0), "landau", coef};
  const double k = coef / (g.delta * g.dtheta() * g.dtheta());
  s.weights[0] = -2.0 * k;
  s.weights[1] += k;
  s.weights[g.n_theta - 1] += k;
  return s;
}

/// Probabilities K_m that a jump by theta_eps(b), b uniform on [-1, 1],
/// lands on angle offset m, distributed by the chosen interpolation.
inline std::vector<double> rotation_kernel(const ScatteringTable& table, std::size_t n_theta,
                                           AngularInterpolation interp, std::size_t n_samples) {
  if (n_samples < 2) throw DomainError("rotation kernel needs at least 2 samples");
  std::vector<double> K(n_theta, 0.0);
  const double dth = 2.0 * std::numbers::pi / static_cast<double>(n_theta);
  const auto n = static_cast<long>(n_theta);
  auto add = [&](long m, double w) { K[static_cast<std::size_t>(((m % n) + n) % n)] += w; };
  const double w = 1.0 / static_cast<double>(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double b = -1.0 + (static_cast<double>(k) + 0.5) * 2.0 / static_cast<double>(n_samples);
    const double s = table.angle(b) / dth;
    const double m0 = std::floor(s);
    const double f = s - m0;
    const auto m = static_cast<long>(m0);
    if (interp == AngularInterpolation::linear) {
      add(m, w * (1.0 - f));
      add(m + 1, w * f);
    } else {
      // cubic Lagrange through m-1 .. m+2
      add(m - 1, w * (-f * (f - 1.0) * (f - 2.0) / 6.0));
      add(m, w * ((f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0));
      add(m + 1, w * (-(f + 1.0) * f * (f - 2.0) / 2.0));
      add(m + 2, w * ((f + 1.0) * f * (f - 1.0) / 6.0));
    }
  }
  return K;
}

/// Boltzmann stencil rate * (K - I), with rate the total jump rate in kinetic
/// time (2 mu eps^{-2 alpha - lambda} = rate_times_delta / delta).
inline CollisionStencil boltzmann_stencil(const Grid& g, const ScatteringTable& table, double rate_times_delta,
                                          AngularInterpolation interp, std::size_t n_samples) {
  if (!(rate_times_delta >= 0.0)) throw DomainError("jump rate must be >= 0");
  CollisionStencil s{rotation_kernel(table, g.n_theta, interp, n_samples), "boltzmann", rate_times_delta};
  const double rate = rate_times_delta / g.delta;
  for (double& k : s.weights) k *= rate;
  s.weights[0] -= rate;
  return s;
}

struct DiscreteField {
  Grid grid;
  double rho1 = 0.0;
  double rho2 = 0.0;
  std::vector<double> values;  // row-major: values[i * n_theta + j]
  std::string kind;
  double coefficient = 0.0;
  SolverDiagnostics diagnostics;

  double at(std::size_t i, std::size_t j) const { return values[i * grid.n_theta + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * grid.n_theta + j]; }

  /// Angle-averaged density in cell i (normalized measure).
  double rho(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < grid.n_theta; ++j) s += at(i, j);
    return s / static_cast<double>(grid.n_theta);
  }

  /// Cell-centred flux delta^{-1} <cos(theta) g>.
  double flux(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < grid.n_theta; ++j) s += grid.cos_theta(j) * at(i, j);
    return s / static_cast<double>(grid.n_theta) / grid.delta;
  }

  /// Upwind flux through face k (between cells k-1 and k), inflow data at the walls.
  double face_flux(std::size_t k) const {
    double s = 0.0;
    for (std::size_t j = 0; j < grid.n_theta; ++j) {
      const double c = grid.cos_theta(j);
      if (c > 0.0) s += c * (k == 0 ? rho1 : at(k - 1, j));
      if (c < 0.0) s += c * (k == grid.n_x ? rho2 : at(k, j));
    }
    return s / static_cast<double>(grid.n_theta) / grid.delta;
  }

  std::vector<double> x_grid() const {
    std::vector<double> x(grid.n_x);
    for (std::size_t i = 0; i < grid.n_x; ++i) x[i] = grid.x(i);
    return x;
  }
  std::vector<double> density_profile() const {
    std::vector<double> r(grid.n_x);
    for (std::size_t i = 0; i < grid.n_x; ++i) r[i] = rho(i);
    return r;
  }
  std::vector<double> flux_profile() const {
    std::vector<double> r(grid.n_x);
    for (std::size_t i = 0; i < grid.n_x; ++i) r[i] = flux(i);
    return r;
  }

  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  double max_value() const { return *std::max_element(values.begin(), values.end()); }

  /// Density at x1, linear between cell centres (clamped to the outer centres).
  double rho_at(double x1) const {
    const double s = std::clamp(x1 / grid.dx() - 0.5, 0.0, static_cast<double>(grid.n_x - 1));
    const auto i = std::min(static_cast<std::size_t>(s), grid.n_x - 2);
    const double f = s - static_cast<double>(i);
    return (1.0 - f) * rho(i) + f * rho(i + 1);
  }

  /// g at (x1, theta): linear in x1 between cell centres, periodic linear in theta.
  double value_at(double x1, double theta) const {
    const double s = std::clamp(x1 / grid.dx() - 0.5, 0.0, static_cast<double>(grid.n_x - 1));
    const auto i = std::min(static_cast<std::size_t>(s), grid.n_x - 2);
    const double f = s - static_cast<double>(i);
    const double tw = 2.0 * std::numbers::pi;
    const double u = std::fmod(std::fmod(theta, tw) + tw, tw) / grid.dtheta();
    const auto j = static_cast<std::size_t>(std::floor(u)) % grid.n_theta;
    const double e = u - std::floor(u);
    const std::size_t j1 = (j + 1) % grid.n_theta;
    auto row = [&](std::size_t ii) { return (1.0 - e) * at(ii, j) + e * at(ii, j1); };
    return (1.0 - f) * row(i) + f * row(i + 1);
  }

  /// CSV rows "x1,theta,g".
  void write_csv(std::ostream& os) const {
    const auto old = os.precision(17);
    os << "x1,theta,g\n";
    for (std::size_t i = 0; i < grid.n_x; ++i)
      for (std::size_t j = 0; j < grid.n_theta; ++j) os << grid.x(i) << ',' << grid.theta(j) << ',' << at(i, j) << '\n';
    os.precision(old);
  }

  /// CSV rows "x1,rho,J".
  void write_profile_csv(std::ostream& os) const {
    const auto old = os.precision(17);
    os << "x1,rho,J\n";
    for (std::size_t i = 0; i < grid.n_x; ++i) os << grid.x(i) << ',' << rho(i) << ',' << flux(i) << '\n';
    os.precision(old);
  }
};

namespace detail {

// Rows:  lower(j) g_{i-1,j} + (D g_i)_j + upper(j) g_{i+1,j} = r_{i,j},
// with the same D, lower and upper in every cell. Factorized once by block
// Gaussian elimination; solve() can then be called for many right-hand sides.
class BlockTridiagonal {
 public:
  BlockTridiagonal(const Eigen::VectorXd& lower, const Eigen::MatrixXd& D, const Eigen::VectorXd& upper,
                   std::size_t n_blocks)
      : lower_(lower), upper_(upper), n_(n_blocks) {
    const auto m = D.rows();
    std::vector<Eigen::Index> up_cols, low_rows;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (upper(j) != 0.0) up_cols.push_back(j);
      if (lower(j) != 0.0) low_rows.push_back(j);
    }
    lu_.reserve(n_);
    Eigen::MatrixXd Dt = D;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(up_cols.size()));
    for (std::size_t i = 0; i < n_; ++i) {
      lu_.emplace_back(Dt);
      if (i + 1 == n_) break;
      // W = Dt^{-1} diag(upper), restricted to the nonzero columns.
      rhs.setZero();
      for (std::size_t k = 0; k < up_cols.size(); ++k) rhs(up_cols[k], static_cast<Eigen::Index>(k)) = upper(up_cols[k]);
      const Eigen::MatrixXd W = lu_.back().solve(rhs);
      Dt = D;
      for (Eigen::Index r : low_rows)
        for (std::size_t k = 0; k < up_cols.size(); ++k)
          Dt(r, up_cols[k]) -= lower(r) * W(r, static_cast<Eigen::Index>(k));
    }
  }

  /// r holds n_blocks consecutive blocks; overwritten by the solution.
  void solve(Eigen::VectorXd& r) const {
    const auto m = lower_.size();
    Eigen::VectorXd prev;
    for (std::size_t i = 0; i < n_; ++i) {
      auto ri = r.segment(static_cast<Eigen::Index>(i) * m, m);
      if (i > 0) ri -= lower_.cwiseProduct(prev);
      prev = lu_[i].solve(Eigen::VectorXd(ri));
      ri = prev;
    }
    for (std::size_t i = n_ - 1; i-- > 0;) {
      auto ri = r.segment(static_cast<Eigen::Index>(i) * m, m);
      const Eigen::VectorXd next = r.segment(static_cast<Eigen::Index>(i + 1) * m, m);
      ri -= lu_[i].solve(Eigen::VectorXd(upper_.cwiseProduct(next)));
    }
  }

 private:
  Eigen::VectorXd lower_, upper_;
  std::size_t n_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

// The discrete operator: transport coefficients per angle and the stencil.
struct KineticOperator {
  Grid grid;
  CollisionStencil stencil;
  Eigen::VectorXd lower, upper, diag_transport;  // per angle

  KineticOperator(const Grid& g, CollisionStencil s) : grid(g), stencil(std::move(s)) {
    const auto m = static_cast<Eigen::Index>(g.n_theta);
    lower = Eigen::VectorXd::Zero(m);
    upper = Eigen::VectorXd::Zero(m);
    diag_transport = Eigen::VectorXd::Zero(m);
    const double inv_dx = 1.0 / g.dx();
    for (std::size_t j = 0; j < g.n_theta; ++j) {
      const double c = g.cos_theta(j);
      const auto jj = static_cast<Eigen::Index>(j);
      diag_transport(jj) = std::abs(c) * inv_dx;
      if (c > 0.0) lower(jj) = -c * inv_dx;
      if (c < 0.0) upper(jj) = c * inv_dx;
    }
  }

  Eigen::MatrixXd block(double shift = 0.0) const {
    const auto m = static_cast<Eigen::Index>(grid.n_theta);
    Eigen::MatrixXd D(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index k = 0; k < m; ++k) D(j, k) = -stencil.weights[static_cast<std::size_t>((k - j + m) % m)];
    for (Eigen::Index j = 0; j < m; ++j) D(j, j) += diag_transport(j) + shift;
    return D;
  }

  // Boundary contribution to the right-hand side.
  Eigen::VectorXd boundary_rhs(double rho1, double rho2) const {
    const auto m = static_cast<Eigen::Index>(grid.n_theta);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m * static_cast<Eigen::Index>(grid.n_x));
    for (Eigen::Index j = 0; j < m; ++j) {
      b(j) -= lower(j) * rho1;
      b((static_cast<Eigen::Index>(grid.n_x) - 1) * m + j) -= upper(j) * rho2;
    }
    return b;
  }

  // max_ij |(A g - b)_ij|
  double residual(const std::vector<double>& g, double rho1, double rho2) const {
    const std::size_t nt = grid.n_theta;
    const auto n = static_cast<long>(nt);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n_x; ++i) {
      for (std::size_t j = 0; j < nt; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double left = i == 0 ? rho1 : g[(i - 1) * nt + j];
        const double right = i + 1 == grid.n_x ? rho2 : g[(i + 1) * nt + j];
        double r = diag_transport(jj) * g[i * nt + j] + lower(jj) * left + upper(jj) * right;
        for (std::size_t m = 0; m < nt; ++m) {
          const double w = stencil.weights[m];
          if (w != 0.0) r -= w * g[i * nt + static_cast<std::size_t>((static_cast<long>(j + m)) % n)];
        }
        worst = std::max(worst, std::abs(r));
      }
    }
    return worst;
  }
};

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline DiscreteField solve_direct(const KineticOperator& op, double rho1, double rho2) {
  const BlockTridiagonal bt(op.lower, op.block(), op.upper, op.grid.n_x);
  Eigen::VectorXd r = op.boundary_rhs(rho1, rho2);
  bt.solve(r);
  DiscreteField f;
  f.values = to_std(r);
  f.diagnostics.backend = "direct";
  f.diagnostics.iterations = 1;
  f.diagnostics.residual_max = op.residual(f.values, rho1, rho2);
  f.diagnostics.history.push_back(f.diagnostics.residual_max);
  return f;
}

// Source iteration: sweep each angle with the out-scattering on the left and
// the in-scattering from the previous iterate as the source.
inline DiscreteField solve_source_iteration(const KineticOperator& op, double rho1, double rho2,
                                            const SolverOptions& opt) {
  const Grid& g = op.grid;
  const std::size_t nt = g.n_theta;
  const double sigma = -op.stencil.weights[0];
  std::vector<double> cur(g.n_x * nt, 0.5 * (rho1 + rho2)), next(cur.size()), src(nt);
  DiscreteField f;
  f.diagnostics.backend = "source_iteration";
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    for (std::size_t i = 0; i < g.n_x; ++i) {
      // gain for every angle of cell i, stored temporarily in next
      for (std::size_t j = 0; j < nt; ++j) {
        double s = 0.0;
        for (std::size_t m = 1; m < nt; ++m) {
          const double w = op.stencil.weights[m];
          if (w != 0.0) s += w * cur[i * nt + (j + m) % nt];
        }
        next[i * nt + j] = s;
      }
    }
    for (std::size_t j = 0; j < nt; ++j) {
      const double a = op.diag_transport(static_cast<Eigen::Index>(j));
      const double c = g.cos_theta(j);
      if (c > 0.0) {
        double up = rho1;
        for (std::size_t i = 0; i < g.n_x; ++i) {
          up = (a * up + next[i * nt + j]) / (a + sigma);
          next[i * nt + j] = up;
        }
      } else if (c < 0.0) {
        double up = rho2;
        for (std::size_t i = g.n_x; i-- > 0;) {
          up = (a * up + next[i * nt + j]) / (a + sigma);
          next[i * nt + j] = up;
        }
      } else {
        for (std::size_t i = 0; i < g.n_x; ++i) next[i * nt + j] = sigma > 0.0 ? next[i * nt + j] / sigma : cur[i * nt + j];
      }
    }
    double inc = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) {
      const double v = (1.0 - opt.damping) * cur[k] + opt.damping * next[k];
      inc = std::max(inc, std::abs(v - cur[k]));
      cur[k] = v;
    }
    f.diagnostics.history.push_back(inc);
    f.diagnostics.iterations = it;
    if (inc < opt.increment_tolerance || (it % 50 == 0 && op.residual(cur, rho1, rho2) < opt.residual_tolerance)) {
      f.values = cur;
      f.diagnostics.residual_max = op.residual(cur, rho1, rho2);
      return f;
    }
  }
  throw ConvergenceError("source iteration did not converge within the iteration cap", f.diagnostics.history);
}

inline DiscreteField solve_kinetic(const Grid& grid, double rho1, double rho2, CollisionStencil stencil,
                                   const SolverOptions& opt) {
  grid.validate();
  if (!(rho1 >= 0.0 && rho2 >= 0.0)) throw DomainError("reservoir densities must be >= 0");
  const KineticOperator op(grid, std::move(stencil));
  DiscreteField f = opt.backend == SolverBackend::direct ? solve_direct(op, rho1, rho2)
                                                         : solve_source_iteration(op, rho1, rho2, opt);
  f.grid = grid;
  f.rho1 = rho1;
  f.rho2 = rho2;
  f.kind = op.stencil.kind;
  f.coefficient = op.stencil.coefficient;
  if (opt.backend == SolverBackend::direct && !(f.diagnostics.residual_max < opt.residual_tolerance * std::max(1.0, std::max(rho1, rho2))))
    throw ConvergenceError("direct solve residual above tolerance", f.diagnostics.history);
  return f;
}

}  // namespace detail

/// Landau problem cos(theta) g_x = delta^{-1} coef g_thetatheta.
inline DiscreteField solve_landau(const Grid& grid, double rho1, double rho2, double coef,
                                  const SolverOptions& opt = {}) {
  grid.validate();
  if (!(coef > 0.0)) throw DomainError("Landau coefficient must be > 0");
  return detail::solve_kinetic(grid, rho1, rho2, landau_stencil(grid, coef), opt);
}

inline DiscreteField solve_landau(const SlabProblem& prob, std::size_t n_x, std::size_t n_theta, double coef,
                                  const SolverOptions& opt = {}) {
  prob.validate();
  return solve_landau(Grid{n_x, n_theta, prob.L, prob.delta}, prob.rho1, prob.rho2, coef, opt);
}

/// Boltzmann problem with jump rate 2 mu eps^{-2 alpha} / delta and the
/// rotation kernel of `table`.
inline DiscreteField solve_boltzmann(const Grid& grid, double rho1, double rho2, const ScatteringTable& table,
                                     double mu, const SolverOptions& opt = {}) {
  grid.validate();
  if (table.impact_grid().size() < grid.n_theta / 2)
    throw DomainError("scattering table is coarser than the angular grid");
  const double c = table.coupling();
  const double rate_times_delta = c > 0.0 ? 2.0 * mu / (c * c) : 0.0;
  return detail::solve_kinetic(
      grid, rho1, rho2, boltzmann_stencil(grid, table, rate_times_delta, opt.interpolation, opt.kernel_samples), opt);
}

inline DiscreteField solve_boltzmann(const KineticParams& p, std::size_t n_x, std::size_t n_theta,
                                     const ScatteringTable& table, const SolverOptions& opt = {}) {
  p.validate();
  return solve_boltzmann(Grid{n_x, n_theta, p.L, p.delta()}, p.rho1, p.rho2, table, p.mu, opt);
}

struct NeumannResult {
  DiscreteField field;
  std::vector<double> contraction_estimates;  // sup-norm ratios of successive terms
  std::vector<double> term_norms;
  bool converged = false;
};

/// Stationary solution as the series sum_n G(t0)^n g_out(t0), with both
/// evolutions computed by implicit Euler on the stationary discretization.
/// g_out starts from zero with the boundary sources on; G propagates the
/// previous term with the sources off.
inline NeumannResult neumann_iterate(const Grid& grid, double rho1, double rho2, const CollisionStencil& stencil,
                                     double t0, std::size_t n_terms, std::size_t steps_per_horizon = 40,
                                     double tolerance = 1e-12) {
  grid.validate();
  if (!(t0 > 0.0)) throw DomainError("t0 must be > 0");
  if (steps_per_horizon < 1) throw DomainError("steps_per_horizon must be >= 1");
  const detail::KineticOperator op(grid, stencil);
  const double dt = t0 / static_cast<double>(steps_per_horizon);
  const detail::BlockTridiagonal bt(op.lower, op.block(1.0 / dt), op.upper, grid.n_x);
  const Eigen::VectorXd b = op.boundary_rhs(rho1, rho2);

  auto evolve = [&](Eigen::VectorXd g, bool sources) {
    for (std::size_t k = 0; k < steps_per_horizon; ++k) {
      g /= dt;
      if (sources) g += b;
      bt.solve(g);
    }
    return g;
  };

  NeumannResult res;
  Eigen::VectorXd term = evolve(Eigen::VectorXd::Zero(b.size()), true);
  Eigen::VectorXd sum = term;
  double prev = term.lpNorm<Eigen::Infinity>();
  res.term_norms.push_back(prev);
  std::size_t rising = 0;
  for (std::size_t n = 1; n < n_terms && prev > 0.0; ++n) {
    term = evolve(term, false);
    const double cur = term.lpNorm<Eigen::Infinity>();
    const double ratio = cur / prev;
    res.contraction_estimates.push_back(ratio);
    res.term_norms.push_back(cur);
    sum += term;
    rising = ratio >= 1.0 ? rising + 1 : 0;
    if (rising >= 3) throw ConvergenceError("Neumann series terms are not contracting", res.contraction_estimates);
    prev = cur;
    if (cur <= tolerance * std::max(1.0, sum.lpNorm<Eigen::Infinity>())) break;
  }
  res.converged = prev <= tolerance * std::max(1.0, sum.lpNorm<Eigen::Infinity>());
  res.field.grid = grid;
  res.field.rho1 = rho1;
  res.field.rho2 = rho2;
  res.field.values = detail::to_std(sum);
  res.field.kind = stencil.kind;
  res.field.coefficient = stencil.coefficient;
  res.field.diagnostics.backend = "neumann";
  res.field.diagnostics.iterations = res.term_norms.size();
  res.field.diagnostics.history = res.term_norms;
  res.field.diagnostics.residual_max = op.residual(res.field.values, rho1, rho2);
  return res;
}

/// Decomposition g = rho(x1) + delta a(x1) cos(theta) + delta R.
struct HilbertReport {
  std::vector<double> x1;
  std::vector<double> rho;
  std::vector<double> g1_amplitude;  // a(x1)
  double remainder_norm = 0.0;       // L2 over (0, L) x S1, normalized angle measure
  double expected_amplitude = 0.0;   // -(rho2 - rho1) / (L coef)
};

inline HilbertReport hilbert_residual(const DiscreteField& f) {
  const Grid& g = f.grid;
  HilbertReport h;
  h.x1 = f.x_grid();
  h.rho.resize(g.n_x);
  h.g1_amplitude.resize(g.n_x);
  double sq = 0.0;
  for (std::size_t i = 0; i < g.n_x; ++i) {
    const double rho = f.rho(i);
    double cm = 0.0;
    for (std::size_t j = 0; j < g.n_theta; ++j) cm += g.cos_theta(j) * f.at(i, j);
    // <cos^2> = 1/2 on the grid, so the cos coefficient is 2 <g cos>
    const double a = 2.0 * cm / static_cast<double>(g.n_theta) / g.delta;
    h.rho[i] = rho;
    h.g1_amplitude[i] = a;
    double row = 0.0;
    for (std::size_t j = 0; j < g.n_theta; ++j) {
      const double r = (f.at(i, j) - rho - g.delta * a * g.cos_theta(j)) / g.delta;
      row += r * r;
    }
    sq += row / static_cast<double>(g.n_theta) * g.dx();
  }
  h.remainder_norm = std::sqrt(sq);
  h.expected_amplitude = f.coefficient > 0.0 ? -(f.rho2 - f.rho1) / (g.L * f.coefficient) : 0.0;
  return h;
}

/// Largest change of the density profile between a field and one on a grid
/// twice as coarse, sampled at the coarse cell centres. For a first-order
/// scheme this bounds the error of the finer field.
inline double profile_change(const DiscreteField& fine, const DiscreteField& coarse) {
  double d = 0.0;
  for (std::size_t i = 0; i < coarse.grid.n_x; ++i)
    d = std::max(d, std::abs(fine.rho_at(coarse.grid.x(i)) - coarse.rho(i)));
  return d;
}

}  // namespace lorentz_fick
