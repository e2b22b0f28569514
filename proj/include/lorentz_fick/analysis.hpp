#pragma once

// Macroscopic observables: density and flux profiles, the Green-Kubo
// coefficient, the weak-form Fick residual, and eps-sweep distance tables.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid_solver.hpp"
#include "kinetic_sim.hpp"
#include "micro_sim.hpp"
#include "params.hpp"
#include "scattering.hpp"

namespace lorentz_fick {

/// (rho1 (L - x1) + rho2 x1) / L.
inline double linear_profile(double rho1, double rho2, double L, double x1) {
  if (!(L > 0.0)) throw DomainError("L must be > 0");
  if (!(x1 >= 0.0 && x1 <= L)) throw DomainError("x1 must lie in [0, L]");
  return (rho1 * (L - x1) + rho2 * x1) / L;
}

enum class DConvention { component_normalized, paper_literal };

inline const char* to_string(DConvention c) {
  return c == DConvention::component_normalized ? "component_normalized" : "paper_literal";
}

inline DConvention d_convention_from_string(const std::string& s) {
  if (s == "component_normalized") return DConvention::component_normalized;
  if (s == "paper_literal") return DConvention::paper_literal;
  throw DomainError("unknown D convention '" + s + "'");
}

/// D = (2/mu) int v . (-Laplacian)^{-1} v over the velocity circle, with the
/// inverse Laplacian applied mode by mode on a sampled Fourier series.
/// component_normalized keeps v1 only and uses the probability measure on
/// the circle; paper_literal uses both components and arclength.
inline double green_kubo_D(double mu, DConvention convention) {
  if (!(mu > 0.0)) throw DomainError("mu must be > 0");
  constexpr std::size_t n = 64;
  const double tw = 2.0 * std::numbers::pi;
  auto inverse_laplacian = [&](const std::vector<double>& f) {
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 1; k < n / 2; ++k) {
      std::complex<double> c = 0.0;
      for (std::size_t j = 0; j < n; ++j) c += f[j] * std::polar(1.0, -tw * k * j / n);
      c /= static_cast<double>(n);
      const double kk = static_cast<double>(k * k);
      for (std::size_t j = 0; j < n; ++j) out[j] += 2.0 * (c * std::polar(1.0, tw * k * j / n)).real() / kk;
    }
    return out;
  };
  std::vector<double> v1(n), v2(n);
  for (std::size_t j = 0; j < n; ++j) {
    v1[j] = std::cos(tw * j / n);
    v2[j] = std::sin(tw * j / n);
  }
  const auto u1 = inverse_laplacian(v1);
  double mean11 = 0.0;
  for (std::size_t j = 0; j < n; ++j) mean11 += v1[j] * u1[j] / n;
  if (convention == DConvention::component_normalized) return 2.0 / mu * mean11;
  const auto u2 = inverse_laplacian(v2);
  double mean22 = 0.0;
  for (std::size_t j = 0; j < n; ++j) mean22 += v2[j] * u2[j] / n;
  return 2.0 / mu * tw * (mean11 + mean22);
}

struct StationaryProfile {
  std::vector<double> x1;
  std::vector<double> rho;
  std::vector<double> J;
  std::vector<double> rho_err;
  std::vector<double> J_err;
  std::string source;  // micro | boltzmann | landau | grid
  double rho1 = 0.0;
  double rho2 = 0.0;
  double L = 1.0;

  void validate() const {
    const std::size_t n = x1.size();
    if (rho.size() != n || J.size() != n || rho_err.size() != n || J_err.size() != n)
      throw DomainError("profile arrays have inconsistent lengths");
  }

  /// Every density lies in [min rho, max rho] up to 3 standard errors.
  bool within_bounds() const {
    const double lo = std::min(rho1, rho2), hi = std::max(rho1, rho2);
    for (std::size_t i = 0; i < rho.size(); ++i)
      if (rho[i] < lo - 3.0 * rho_err[i] - 1e-12 || rho[i] > hi + 3.0 * rho_err[i] + 1e-12) return false;
    return true;
  }

  void write_csv(std::ostream& os) const {
    const auto old = os.precision(17);
    os << "x1,rho,J,rho_err,J_err\n";
    for (std::size_t i = 0; i < x1.size(); ++i)
      os << x1[i] << ',' << rho[i] << ',' << J[i] << ',' << rho_err[i] << ',' << J_err[i] << '\n';
    os.precision(old);
  }
};

inline StationaryProfile profile_from_field(const DiscreteField& f) {
  StationaryProfile p;
  p.x1 = f.x_grid();
  p.rho = f.density_profile();
  p.J = f.flux_profile();
  p.rho_err.assign(p.x1.size(), 0.0);
  p.J_err.assign(p.x1.size(), 0.0);
  p.source = "grid";
  p.rho1 = f.rho1;
  p.rho2 = f.rho2;
  p.L = f.grid.L;
  return p;
}

/// Exact linear profile carrying the Fick flux -D (rho2 - rho1) / L.
inline StationaryProfile linear_stationary_profile(double rho1, double rho2, double L, double D, std::size_t n) {
  StationaryProfile p;
  p.source = "grid";
  p.rho1 = rho1;
  p.rho2 = rho2;
  p.L = L;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * L / static_cast<double>(n);
    p.x1.push_back(x);
    p.rho.push_back(linear_profile(rho1, rho2, L, x));
    p.J.push_back(-D * (rho2 - rho1) / L);
  }
  p.rho_err.assign(n, 0.0);
  p.J_err.assign(n, 0.0);
  return p;
}

struct FickTolerances {
  double flux_relative = 0.03;      // |J_mean - J_fick| / |J_fick|
  double flux_spread = 0.01;        // (max J - min J) / |J_mean|
  double residual_relative = 0.03;  // weak residual / (|J_fick| L)
  double absolute = 1e-9;           // used when the expected flux vanishes
  std::size_t test_functions = 5;
};

struct FickReport {
  double D_used = 0.0;
  double J_mean = 0.0;
  double J_expected = 0.0;  // -D (rho2 - rho1) / L
  double flux_error = 0.0;  // relative, or absolute when J_expected = 0
  double flux_spread = 0.0;
  double gradient = 0.0;    // least-squares slope of rho
  double D_effective = 0.0; // -J_mean / gradient
  double residual = 0.0;    // weak residual of J + D grad rho, same normalization as flux_error
  std::vector<double> residual_modes;
  bool flux_pass = false;
  bool spread_pass = false;
  bool residual_pass = false;
  bool pass = false;
};

/// Least-squares slope of y against x.
inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

/// Fick's law in weak form: the residual of J + D d rho/dx against
/// sin(k pi x / L), k = 1..K, with d rho/dx the least-squares slope.
inline FickReport fick_check(const StationaryProfile& p, double D, const FickTolerances& tol = {}) {
  p.validate();
  if (p.x1.size() < 8) throw DomainError("fick_check needs at least 8 profile points");
  FickReport r;
  r.D_used = D;
  const std::size_t n = p.x1.size();
  double jmin = std::numeric_limits<double>::infinity(), jmax = -jmin;
  for (double j : p.J) {
    r.J_mean += j / static_cast<double>(n);
    jmin = std::min(jmin, j);
    jmax = std::max(jmax, j);
  }
  r.J_expected = -D * (p.rho2 - p.rho1) / p.L;
  r.gradient = fitted_slope(p.x1, p.rho);
  r.D_effective = r.gradient != 0.0 ? -r.J_mean / r.gradient : 0.0;
  const double scale = std::abs(r.J_expected);
  const bool equilibrium = scale == 0.0;
  r.flux_error = equilibrium ? std::abs(r.J_mean) : std::abs(r.J_mean - r.J_expected) / scale;
  r.flux_spread = r.J_mean != 0.0 ? (jmax - jmin) / std::abs(r.J_mean) : jmax - jmin;
  const double dx = p.L / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t k = 1; k <= tol.test_functions; ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      m += (p.J[i] + D * r.gradient) * std::sin(static_cast<double>(k) * std::numbers::pi * p.x1[i] / p.L) * dx;
    r.residual_modes.push_back(m);
    sq += m * m;
  }
  r.residual = equilibrium ? std::sqrt(sq) : std::sqrt(sq) / (scale * p.L);
  if (equilibrium) {
    r.flux_pass = r.flux_error <= tol.absolute;
    r.spread_pass = jmax - jmin <= tol.absolute;
    r.residual_pass = r.residual <= tol.absolute;
  } else {
    r.flux_pass = r.flux_error <= tol.flux_relative;
    r.spread_pass = r.flux_spread <= tol.flux_spread;
    r.residual_pass = r.residual <= tol.residual_relative;
  }
  r.pass = r.flux_pass && r.spread_pass && r.residual_pass;
  return r;
}

/// Least-squares power law y = C x^p in log-log coordinates.
struct PowerFit {
  double exponent = 0.0;
  double stderr_ = 0.0;  // standard error of the exponent; 0 with two points
  double prefactor = 0.0;
  bool valid = false;
};

inline PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  PowerFit f;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return f;
  f.exponent = fitted_slope(lx, ly);
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  f.prefactor = std::exp(my - f.exponent * mx);
  if (lx.size() > 2) {
    double ss = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double e = ly[i] - (my + f.exponent * (lx[i] - mx));
      ss += e * e;
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    f.stderr_ = std::sqrt(ss / (n - 2.0) / sxx);
  }
  f.valid = true;
  return f;
}

/// Sup-norm distance between two fields on the same grid; symmetric.
inline double field_distance(const DiscreteField& a, const DiscreteField& b) {
  if (a.values.size() != b.values.size()) throw DomainError("fields live on different grids");
  double d = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) d = std::max(d, std::abs(a.values[k] - b.values[k]));
  return d;
}

/// sup over cells of |rho - linear profile|.
inline double linear_profile_distance(const DiscreteField& f) {
  double d = 0.0;
  for (std::size_t i = 0; i < f.grid.n_x; ++i)
    d = std::max(d, std::abs(f.rho(i) - linear_profile(f.rho1, f.rho2, f.grid.L, f.grid.x(i))));
  return d;
}

enum class LevelPair { micro_boltzmann, boltzmann_landau, landau_linear };

inline const char* to_string(LevelPair p) {
  switch (p) {
    case LevelPair::micro_boltzmann: return "micro-boltzmann";
    case LevelPair::boltzmann_landau: return "boltzmann-landau";
    case LevelPair::landau_linear: return "landau-linear";
  }
  return "?";
}

inline LevelPair level_pair_from_string(const std::string& s) {
  if (s == "micro-boltzmann" || s == "boltzmann-micro") return LevelPair::micro_boltzmann;
  if (s == "boltzmann-landau" || s == "landau-boltzmann") return LevelPair::boltzmann_landau;
  if (s == "landau-linear" || s == "linear-landau") return LevelPair::landau_linear;
  throw DomainError("unknown level pair '" + s + "'");
}

struct StudyOptions {
  RadialPotential potential = RadialPotential::quartic_bump();
  std::size_t n_x = 400;
  std::size_t n_theta = 128;
  std::size_t table_points = 1025;
  LandauCoefficient landau_source = LandauCoefficient::table_B;
  double landau_coefficient = 0.0;  // > 0 overrides landau_source
  SolverOptions solver{};
  // Monte Carlo pairs: x1 = L/2 and the angles below, n_samples each.
  std::size_t n_samples = 2000;
  std::size_t n_angles = 8;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  MicroOptions micro{};
};

struct ConvergenceRow {
  double epsilon = 0.0;
  double delta = 0.0;
  double distance = 0.0;
  double error = 0.0;  // standard error of the distance (0 for deterministic pairs)
};

struct ConvergenceTable {
  LevelPair pair = LevelPair::boltzmann_landau;
  std::vector<ConvergenceRow> rows;
  PowerFit fit;                         // distance against the swept parameter
  std::string swept = "epsilon";        // epsilon, or delta for landau-linear
  double reference_exponent = 0.0;      // predicted exponent for this pair
  double reference_exponent_alt = 0.0;  // the other gamma candidate, when relevant
  bool strictly_decreasing = false;
  bool resolved = false;  // the rate's 2-sigma interval excludes 0
  bool separated = true;  // every distance exceeds 2 of its standard errors

  void write_csv(std::ostream& os) const {
    const auto old = os.precision(17);
    os << "epsilon,delta,distance,err\n";
    for (const auto& r : rows) os << r.epsilon << ',' << r.delta << ',' << r.distance << ',' << r.error << '\n';
    os.precision(old);
  }
};

namespace detail {

inline double landau_coef_for(const KineticParams& p, const StudyOptions& o) {
  if (o.landau_coefficient > 0.0) return o.landau_coefficient;
  return landau_diffusion(p, o.potential, o.landau_source, o.table_points);
}

inline void finish_table(ConvergenceTable& t) {
  std::vector<double> x, y;
  for (const auto& r : t.rows) {
    x.push_back(t.swept == "delta" ? r.delta : r.epsilon);
    y.push_back(r.distance);
    if (r.error > 0.0 && r.distance <= 2.0 * r.error) t.separated = false;
  }
  t.fit = fit_power_law(x, y);
  t.strictly_decreasing = t.rows.size() >= 2;
  // sweeps are reported in the given order; "decreasing" follows the parameter toward 0
  std::vector<std::size_t> order(t.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (!(y[order[k]] < y[order[k - 1]])) t.strictly_decreasing = false;
  t.resolved = t.fit.valid && t.separated && t.fit.stderr_ > 0.0 && std::abs(t.fit.exponent) > 2.0 * t.fit.stderr_;
}

}  // namespace detail

/// Distances between two description levels over a list of regimes. For
/// landau-linear the regimes are read through their delta.
inline ConvergenceTable convergence_study(const std::vector<KineticParams>& regimes, LevelPair pair,
                                          const StudyOptions& o = {}) {
  if (regimes.size() < 3) throw DomainError("convergence_study needs at least 3 regimes");
  ConvergenceTable t;
  t.pair = pair;
  for (const KineticParams& p : regimes) {
    p.validate();
    ConvergenceRow row{p.epsilon, p.delta(), 0.0, 0.0};
    switch (pair) {
      case LevelPair::landau_linear: {
        t.swept = "delta";
        const auto f = solve_landau(Grid{o.n_x, o.n_theta, p.L, p.delta()}, p.rho1, p.rho2, detail::landau_coef_for(p, o), o.solver);
        row.distance = linear_profile_distance(f);
        break;
      }
      case LevelPair::boltzmann_landau: {
        const auto table = ScatteringTable::build(o.potential, p.epsilon, p.alpha, o.table_points);
        const auto fb = solve_boltzmann(p, o.n_x, o.n_theta, table, o.solver);
        const auto fl = solve_landau(Grid{o.n_x, o.n_theta, p.L, p.delta()}, p.rho1, p.rho2, detail::landau_coef_for(p, o), o.solver);
        row.distance = field_distance(fb, fl);
        break;
      }
      case LevelPair::micro_boltzmann: {
        const auto table = ScatteringTable::build(o.potential, p.epsilon, p.alpha, o.table_points);
        const auto model = KineticModel::boltzmann(p, table);
        MicroRunConfig mc{o.potential, o.n_samples, 0.0, o.seed, o.workers, o.micro};
        KineticRunConfig kc{o.n_samples, 0.0, o.seed, o.workers, 10, 0};
        for (std::size_t a = 0; a < o.n_angles; ++a) {
          const double theta = 2.0 * std::numbers::pi * (static_cast<double>(a) + 0.5) / static_cast<double>(o.n_angles);
          const Vec2 x{0.5 * p.L, 0.0};
          mc.seed = derive_seed(o.seed, 0x6d62ULL, a);
          kc.seed = derive_seed(o.seed, 0x6b62ULL, a);
          const auto em = stationary_estimate_micro(x, unit_from_angle(theta), p, mc);
          const auto eb = stationary_estimate_kinetic(model, x, theta, kc);
          const double d = std::abs(em.mean - eb.mean);
          if (d > row.distance) {
            row.distance = d;
            row.error = std::hypot(em.stderr(), eb.stderr());
          }
        }
        break;
      }
    }
    t.rows.push_back(row);
  }
  const KineticParams& p0 = regimes.front();
  const RegimeFlags flags = p0.regime();
  switch (pair) {
    case LevelPair::boltzmann_landau: t.reference_exponent = 2.0 * (p0.alpha - p0.lambda); break;
    case LevelPair::micro_boltzmann:
      t.reference_exponent = flags.gamma_propositions - 3.0 * p0.lambda;
      t.reference_exponent_alt = flags.gamma_assumption - 3.0 * p0.lambda;
      break;
    case LevelPair::landau_linear: t.reference_exponent = 0.0; break;
  }
  detail::finish_table(t);
  return t;
}

}  // namespace lorentz_fick
