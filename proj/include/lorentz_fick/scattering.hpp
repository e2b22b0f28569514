#pragma once

// Classical scattering of a unit-speed particle by one rescaled radial
// potential coupling * phi(|x - c| / eps), the hard-disk reflection law, and
// the grazing-collision diffusion constant built from tabulated deflections.
//
// Sign convention: the impact parameter of a particle at x moving along the
// unit vector v past a centre c is b = cross(v, x - c) / eps. A repulsive
// scatterer deflects positive b counterclockwise, so the signed deflection
// has the sign of b.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

// fpclassify must precede pchip.hpp on Boost 1.74 (unqualified isnan).
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "error.hpp"
#include "vec2.hpp"

namespace lorentz_fick {

/// Radial scatterer profile phi on [0, 1], extended by zero for r >= 1.
class RadialPotential {
 public:
  enum class Profile { zero, quartic_bump, wendland, custom };

  /// h (1 - r^2)^2.
  static RadialPotential quartic_bump(double height = 1.0) {
    RadialPotential p(Profile::quartic_bump, "quartic_bump", height);
    p.validate();
    return p;
  }

  /// h (1 - r)^4 (1 + 4 r), the Wendland C^2 bump.
  static RadialPotential wendland(double height = 1.0) {
    RadialPotential p(Profile::wendland, "wendland", height);
    p.validate();
    return p;
  }

  /// phi == 0. Only useful as the trivial case of the table functionals.
  static RadialPotential zero() { return RadialPotential(Profile::zero, "zero", 0.0); }

  /// Any other analytic profile. `value` and `derivative` are evaluated on [0, 1].
  static RadialPotential custom(std::string name, std::function<double(double)> value,
                                std::function<double(double)> derivative) {
    RadialPotential p(Profile::custom, std::move(name), 1.0);
    p.value_fn_ = std::move(value);
    p.derivative_fn_ = std::move(derivative);
    p.validate();
    return p;
  }

  static RadialPotential by_name(const std::string& name, double height) {
    if (name == "quartic_bump") return quartic_bump(height);
    if (name == "wendland") return wendland(height);
    if (name == "zero") return zero();
    throw DomainError("unknown potential profile '" + name + "'");
  }

  Profile profile() const { return profile_; }
  const std::string& name() const { return name_; }
  double height() const { return height_; }
  bool is_zero() const { return profile_ == Profile::zero; }

  double value(double r) const {
    if (r >= 1.0) return 0.0;
    switch (profile_) {
      case Profile::zero: return 0.0;
      case Profile::quartic_bump: {
        const double s = 1.0 - r * r;
        return height_ * s * s;
      }
      case Profile::wendland: {
        const double s = 1.0 - r;
        return height_ * s * s * s * s * (1.0 + 4.0 * r);
      }
      case Profile::custom: return value_fn_(r);
    }
    return 0.0;
  }

  double derivative(double r) const {
    if (r >= 1.0) return 0.0;
    if (profile_ == Profile::custom) return derivative_fn_(r);
    return r * derivative_over_r(r);
  }

  /// phi'(r) / r, finite at r = 0 for the built-in profiles.
  double derivative_over_r(double r) const {
    if (r >= 1.0) return 0.0;
    switch (profile_) {
      case Profile::zero: return 0.0;
      case Profile::quartic_bump: return -4.0 * height_ * (1.0 - r * r);
      case Profile::wendland: {
        const double s = 1.0 - r;
        return -20.0 * height_ * s * s * s;
      }
      case Profile::custom: {
        const double rr = std::max(r, 1e-7);
        return derivative_fn_(rr) / rr;
      }
    }
    return 0.0;
  }

  /// (phi(r) - phi(m)) / (r - m) without cancellation for the built-in
  /// profiles; both arguments in [0, 1].
  double divided_difference(double r, double m) const {
    switch (profile_) {
      case Profile::zero: return 0.0;
      case Profile::quartic_bump:
        // (1-r^2)^2 - (1-m^2)^2 = -(r-m)(r+m)(2-r^2-m^2)
        return -height_ * (r + m) * (2.0 - r * r - m * m);
      case Profile::wendland: {
        // phi = h s^4 (5 - 4 s) with s = 1 - r
        const double s = 1.0 - r;
        const double t = 1.0 - m;
        const double p3 = s * s * s + s * s * t + s * t * t + t * t * t;
        const double p4 = s * p3 + t * t * t * t;
        return -height_ * (5.0 * p3 - 4.0 * p4);
      }
      case Profile::custom: {
        if (std::abs(r - m) > 1e-6) return (value_fn_(r) - value_fn_(m)) / (r - m);
        return derivative_fn_(0.5 * (r + m));
      }
    }
    return 0.0;
  }

  /// sup_{r in [0,1]} |r phi'(r)|.
  double sup_r_derivative() const {
    double best = 0.0;
    double best_r = 0.0;
    constexpr int n = 4000;
    for (int i = 0; i <= n; ++i) {
      const double r = static_cast<double>(i) / n;
      const double v = std::abs(r * derivative(r));
      if (v > best) {
        best = v;
        best_r = r;
      }
    }
    // golden-section polish around the sampled maximum
    double lo = std::max(0.0, best_r - 1.0 / n);
    double hi = std::min(1.0, best_r + 1.0 / n);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
      const double m1 = hi - g * (hi - lo);
      const double m2 = lo + g * (hi - lo);
      if (std::abs(m1 * derivative(m1)) > std::abs(m2 * derivative(m2)))
        hi = m2;
      else
        lo = m1;
    }
    const double r = 0.5 * (lo + hi);
    return std::max(best, std::abs(r * derivative(r)));
  }

  /// Upper bound on the Hessian norm of phi(|y|) over the support; sets the
  /// natural step size of the in-support integrator.
  double curvature_bound() const {
    double best = 0.0;
    constexpr int n = 400;
    for (int i = 0; i <= n; ++i) {
      const double r = static_cast<double>(i) / n;
      const double h = 1e-5;
      const double d2 = (derivative(std::min(r + h, 1.0)) - derivative(std::max(r - h, 0.0))) /
                        (std::min(r + h, 1.0) - std::max(r - h, 0.0));
      best = std::max({best, std::abs(d2), std::abs(derivative_over_r(r))});
    }
    return best;
  }

  void validate() const {
    if (profile_ == Profile::zero) return;
    if (!(value(0.0) > 0.0)) throw InvalidPotential(name_ + ": phi(0) must be > 0");
    const double at_one = profile_ == Profile::custom ? value_fn_(1.0) : 0.0;
    const double slope_one = profile_ == Profile::custom ? derivative_fn_(1.0) : 0.0;
    if (std::abs(at_one) > 1e-12 || std::abs(slope_one) > 1e-12)
      throw InvalidPotential(name_ + ": phi(1) and phi'(1) must vanish");
    constexpr int n = 512;
    for (int i = 1; i < n; ++i) {
      const double r = static_cast<double>(i) / n;
      if (!(derivative(r) < 0.0)) throw InvalidPotential(name_ + ": phi must be strictly decreasing");
    }
  }

 private:
  RadialPotential(Profile profile, std::string name, double height)
      : profile_(profile), name_(std::move(name)), height_(height) {
    if (profile != Profile::zero && profile != Profile::custom && !(height > 0.0))
      throw InvalidPotential(name_ + ": height must be > 0");
  }

  Profile profile_;
  std::string name_;
  double height_;
  std::function<double(double)> value_fn_;
  std::function<double(double)> derivative_fn_;
};

namespace detail {

// Adaptive composite Gauss-Legendre: a panel is accepted when the 15-point
// rule on it agrees with the sum over its two halves to `tol` per unit length,
// or to rounding level.
template <class F>
double adaptive_gauss(const F& f, double a, double b, double tol, int depth = 0) {
  using rule = boost::math::quadrature::gauss<double, 15>;
  const double whole = rule::integrate(f, a, b);
  const double mid = 0.5 * (a + b);
  const double left = rule::integrate(f, a, mid);
  const double right = rule::integrate(f, mid, b);
  const double split = left + right;
  const double err = std::abs(split - whole);
  if (err <= tol * (b - a) || err <= 1e-15 * std::abs(split) || depth >= 24) return split;
  return adaptive_gauss(f, a, mid, tol, depth + 1) + adaptive_gauss(f, mid, b, tol, depth + 1);
}

}  // namespace detail

/// True when coupling * phi(0) >= 1/2, i.e. a unit-speed head-on orbit is
/// turned back before reaching the centre.
inline bool reflects_head_on(const RadialPotential& pot, double coupling) {
  return 2.0 * coupling * pot.value(0.0) >= 1.0;
}

/// Signed deflection of a unit-speed particle with impact parameter b by the
/// potential coupling * phi, from the classical scattering integral
///   theta = pi - 2 asin|b| - 2 int_{r_min}^1 |b| dr / (r^2 sqrt(F(r))),
///   F(r) = 1 - b^2 / r^2 - 2 coupling phi(r).
/// F is increasing in r for a repulsive profile, so the turning point r_min is
/// unique; the substitution r = r_min + (1 - r_min) w^2 removes the inverse
/// square-root singularity there.
inline double deflection_angle(const RadialPotential& pot, double coupling, double b) {
  if (!(std::abs(b) <= 1.0)) throw DomainError("impact parameter must satisfy |b| <= 1");
  if (!(coupling >= 0.0)) throw DomainError("coupling must be >= 0");
  const double a = std::abs(b);
  if (coupling == 0.0 || pot.is_zero() || a == 1.0) return 0.0;
  const bool reflecting = reflects_head_on(pot, coupling);
  if (a == 0.0) return reflecting ? std::numbers::pi : 0.0;

  const auto F = [&](double r) { return 1.0 - a * a / (r * r) - 2.0 * coupling * pot.value(r); };

  // F(a) = -2 coupling phi(a) < 0 and F(1) = 1 - a^2 > 0.
  double lo = a;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (F(mid) < 0.0 ? lo : hi) = mid;
  }
  const double r_min = hi;
  const double span = 1.0 - r_min;
  if (span <= 0.0) return 0.0;
  // With r = r_min + span w^2, F(r) = span w^2 P(r) where
  // P(r) = a^2 (r + r_min) / (r^2 r_min^2) - 2 coupling [phi(r) - phi(r_min)] / (r - r_min),
  // so the w from dr cancels the square-root zero exactly.
  const auto integrand = [&](double w) {
    const double r = r_min + span * w * w;
    const double p = a * a * (r + r_min) / (r * r * r_min * r_min) -
                     2.0 * coupling * pot.divided_difference(r, r_min);
    return 2.0 * a * std::sqrt(span) / (r * r * std::sqrt(p));
  };
  const double inner = detail::adaptive_gauss(integrand, 0.0, 1.0, 1e-15);
  const double theta = std::numbers::pi - 2.0 * std::asin(a) - 2.0 * inner;
  return b > 0.0 ? theta : -theta;
}

/// Signed deflection of specular reflection off a unit disk.
inline double hard_disk_deflection(double b) {
  if (!(std::abs(b) <= 1.0)) throw DomainError("impact parameter must satisfy |b| <= 1");
  const double magnitude = std::numbers::pi - 2.0 * std::asin(std::abs(b));
  return b < 0.0 ? -magnitude : magnitude;
}

/// v' = v - 2 (omega . v) omega.
inline Vec2 reflect(Vec2 v, Vec2 omega) {
  constexpr double tol = 1e-12;
  if (std::abs(norm(v) - 1.0) > tol || std::abs(norm(omega) - 1.0) > tol)
    throw DomainError("reflect expects unit vectors");
  return v - 2.0 * dot(omega, v) * omega;
}

/// Tabulated deflection theta_eps(b) at coupling eps^alpha on a symmetric
/// uniform impact grid. Interpolation is monotone-safe PCHIP on |b|, with the
/// sign restored afterwards so the table is odd by construction.
class ScatteringTable {
 public:
  static ScatteringTable build(const RadialPotential& pot, double epsilon, double alpha,
                               std::size_t n_points) {
    if (n_points < 16) throw DomainError("scattering table needs at least 16 points");
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
    const double coupling = std::pow(epsilon, alpha);
    return build_with_coupling(pot, coupling, n_points, epsilon, alpha);
  }

  /// Table for an explicit coupling; used for the grazing-limit evaluations.
  static ScatteringTable build_with_coupling(const RadialPotential& pot, double coupling,
                                             std::size_t n_points, double epsilon = 0.0,
                                             double alpha = 0.0) {
    if (n_points < 16) throw DomainError("scattering table needs at least 16 points");
    ScatteringTable t;
    t.epsilon_ = epsilon;
    t.alpha_ = alpha;
    t.coupling_ = coupling;
    t.grid_.resize(n_points);
    t.angles_.resize(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
      const double b = k + 1 == n_points ? 1.0 : -1.0 + 2.0 * static_cast<double>(k) / (n_points - 1);
      t.grid_[k] = b;
    }
    // exact antisymmetry of the grid
    for (std::size_t k = 0; k < n_points / 2; ++k) t.grid_[n_points - 1 - k] = -t.grid_[k];
    if (n_points % 2 == 1) t.grid_[n_points / 2] = 0.0;
    for (std::size_t k = n_points / 2; k < n_points; ++k) {
      t.angles_[k] = deflection_angle(pot, coupling, t.grid_[k]);
      t.angles_[n_points - 1 - k] = -t.angles_[k];
    }
    if (n_points % 2 == 1) t.angles_[n_points / 2] = deflection_angle(pot, coupling, 0.0);
    t.zero_limit_ = deflection_angle(pot, coupling, 0.0);
    t.finalize();
    return t;
  }

  double epsilon() const { return epsilon_; }
  double alpha() const { return alpha_; }
  double coupling() const { return coupling_; }
  const std::vector<double>& impact_grid() const { return grid_; }
  const std::vector<double>& angles() const { return angles_; }
  /// theta(0+): pi when head-on orbits reflect, 0 otherwise.
  double zero_limit() const { return zero_limit_; }

  double angle(double b) const {
    if (!(std::abs(b) <= 1.0)) throw DomainError("impact parameter must satisfy |b| <= 1");
    if (b == 0.0) return zero_limit_;
    const double v = (*interp_)(std::abs(b));
    return b > 0.0 ? v : -v;
  }

  double max_abs_angle() const {
    double m = std::abs(zero_limit_);
    for (double a : angles_) m = std::max(m, std::abs(a));
    return m;
  }

  /// int_{-1}^{1} theta(b)^2 db of the interpolant (exact Gauss rule per cell).
  double integral_theta_squared() const {
    using rule = boost::math::quadrature::gauss<double, 7>;
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < half_b_.size(); ++k) {
      sum += rule::integrate(
          [this](double b) {
            const double v = (*interp_)(b);
            return v * v;
          },
          half_b_[k], half_b_[k + 1]);
    }
    return 2.0 * sum;
  }

  /// Same grid with every angle multiplied by `factor`.
  ScatteringTable scaled(double factor) const {
    ScatteringTable t = *this;
    for (double& a : t.angles_) a *= factor;
    t.zero_limit_ *= factor;
    t.finalize();
    return t;
  }

  void write_csv(std::ostream& os) const {
    const auto old = os.precision(17);
    os << "b,theta\n";
    for (std::size_t k = 0; k < grid_.size(); ++k) os << grid_[k] << ',' << angles_[k] << '\n';
    os.precision(old);
  }

 private:
  ScatteringTable() = default;

  void finalize() {
    half_b_.clear();
    std::vector<double> half_theta;
    half_b_.push_back(0.0);
    half_theta.push_back(zero_limit_);
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      if (grid_[k] > 0.0) {
        half_b_.push_back(grid_[k]);
        half_theta.push_back(angles_[k]);
      }
    }
    auto xs = half_b_;
    interp_ = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
        std::move(xs), std::move(half_theta));
  }

  double epsilon_ = 0.0;
  double alpha_ = 0.0;
  double coupling_ = 0.0;
  double zero_limit_ = 0.0;
  std::vector<double> grid_;
  std::vector<double> angles_;
  std::vector<double> half_b_;
  std::shared_ptr<const boost::math::interpolators::pchip<std::vector<double>>> interp_;
};

/// B_eps = (mu/2) eps^{-2 alpha} int theta_eps(b)^2 db, the angular diffusion
/// constant the jump process would carry in the grazing limit.
inline double landau_coefficient_B(const ScatteringTable& table, double mu) {
  if (table.coupling() == 0.0) return 0.0;
  return 0.5 * mu * table.integral_theta_squared() / (table.coupling() * table.coupling());
}

/// The eps -> 0 limit of landau_coefficient_B: the same functional evaluated
/// at a vanishing coupling, where theta / coupling has converged to its
/// first-order profile.
inline double grazing_limit_B(const RadialPotential& pot, double mu, double coupling = 1e-8) {
  if (pot.is_zero()) return 0.0;
  using rule = boost::math::quadrature::gauss<double, 20>;
  constexpr int panels = 64;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = static_cast<double>(k) / panels;
    const double b = static_cast<double>(k + 1) / panels;
    sum += rule::integrate(
        [&](double x) {
          const double t = deflection_angle(pot, coupling, x) / coupling;
          return t * t;
        },
        a, b);
  }
  return 0.5 * mu * 2.0 * sum;
}

struct AngleBoundReport {
  double lhs_max = 0.0;      // max |theta_eps| over the table
  double first_order = 0.0;  // pi eps^alpha sup |r phi'|
  double c_tilde = 0.0;
  double rhs = 0.0;  // first_order + c_tilde eps^{2 alpha}
  double margin = 0.0;
  bool pass = false;
};

/// Checks max |theta_eps| <= pi eps^alpha sup|r phi'| + c_tilde eps^{2 alpha}.
inline AngleBoundReport verify_angle_bound(const ScatteringTable& table, const RadialPotential& pot,
                                           double c_tilde) {
  AngleBoundReport r;
  r.lhs_max = table.max_abs_angle();
  const double c = table.coupling();
  r.first_order = std::numbers::pi * c * pot.sup_r_derivative();
  r.c_tilde = c_tilde;
  r.rhs = r.first_order + c_tilde * c * c;
  r.margin = r.rhs - r.lhs_max;
  r.pass = r.lhs_max <= r.rhs * (1.0 + 1e-12) + 1e-15;
  return r;
}

struct AngleBoundStudy {
  std::vector<double> epsilons;
  std::vector<AngleBoundReport> reports;
  double c_tilde = 0.0;
  /// Least-squares slope of log max|theta| against log eps.
  double fitted_exponent = 0.0;
  bool all_pass = false;
};

/// Fits the second-order constant over an eps sweep (smallest c_tilde that
/// makes the bound hold at every swept eps) and reports each eps against it.
inline AngleBoundStudy angle_bound_study(const RadialPotential& pot, double alpha,
                                         const std::vector<double>& epsilons,
                                         std::size_t n_points) {
  AngleBoundStudy s;
  s.epsilons = epsilons;
  std::vector<ScatteringTable> tables;
  const double sup = pot.sup_r_derivative();
  for (double eps : epsilons) {
    tables.push_back(ScatteringTable::build(pot, eps, alpha, n_points));
    const double c = tables.back().coupling();
    const double excess = tables.back().max_abs_angle() - std::numbers::pi * c * sup;
    if (c > 0.0) s.c_tilde = std::max(s.c_tilde, excess / (c * c));
  }
  s.all_pass = true;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& t : tables) {
    s.reports.push_back(verify_angle_bound(t, pot, s.c_tilde));
    s.all_pass = s.all_pass && s.reports.back().pass;
    if (s.reports.back().lhs_max > 0.0) {
      const double x = std::log(t.epsilon());
      const double y = std::log(s.reports.back().lhs_max);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
  }
  if (n >= 2) s.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return s;
}

}  // namespace lorentz_fick
