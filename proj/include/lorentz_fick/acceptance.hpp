#pragma once

// The ten acceptance experiments. Each one runs at the sizes fixed below,
// returns its metrics, and says whether the pinned tolerance was met. The CLI
// `all` command and the acceptance test binary share these functions.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <json.hpp>

#include "analysis.hpp"
#include "grid_solver.hpp"
#include "io.hpp"
#include "kinetic_sim.hpp"
#include "medium.hpp"
#include "micro_sim.hpp"
#include "params.hpp"
#include "scattering.hpp"

namespace lorentz_fick::acceptance {

using json = nlohmann::json;

struct Options {
  std::uint64_t seed = 20240917;
  unsigned workers = 1;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string summary;
  json metrics = json::object();
  double seconds = 0.0;
};

inline std::string line(const CriterionResult& r) {
  std::ostringstream os;
  os << "criterion " << r.id << " [" << (r.pass ? "PASS" : "FAIL") << "] " << r.title << ": " << r.summary;
  return os.str();
}

namespace detail {

inline std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <class Fn>
CriterionResult timed(int id, std::string title, Fn&& fn) {
  Stopwatch sw;
  CriterionResult r = fn();
  r.id = id;
  r.title = std::move(title);
  r.seconds = sw.seconds();
  r.metrics["seconds"] = r.seconds;
  return r;
}

// Landau solves of criteria 1-3: mu = 1, L = 1, rho = (1, 2), coefficient mu/2.
inline constexpr std::array<double, 3> kDeltas{0.2, 0.1, 0.05};
inline constexpr std::size_t kSlabNx = 800;
inline constexpr std::size_t kSlabNtheta = 128;

inline DiscreteField slab_landau(double delta, std::size_t nx = kSlabNx, std::size_t ntheta = kSlabNtheta) {
  return solve_landau(Grid{nx, ntheta, 1.0, delta}, 1.0, 2.0, 0.5);
}

}  // namespace detail

/// Linear profile: sup |rho - rho_S| decreasing in delta and <= 0.05 at 0.05.
inline CriterionResult criterion_1(const Options& = {}) {
  return detail::timed(1, "linear profile", [] {
    CriterionResult r;
    std::vector<double> dist, coarse_change, secs;
    for (double delta : detail::kDeltas) {
      detail::Stopwatch sw;
      const auto f = detail::slab_landau(delta);
      secs.push_back(sw.seconds());
      const auto c = detail::slab_landau(delta, detail::kSlabNx / 2, detail::kSlabNtheta);
      dist.push_back(linear_profile_distance(f));
      coarse_change.push_back(profile_change(f, c));
    }
    const bool decreasing = dist[1] < dist[0] && dist[2] < dist[1];
    const bool small = dist[2] <= 0.05;
    const bool fast = *std::max_element(secs.begin(), secs.end()) <= 60.0;
    r.pass = decreasing && small && fast;
    r.metrics = {{"deltas", detail::kDeltas},   {"sup_distance", dist},
                 {"grid_change", coarse_change}, {"solve_seconds", secs},
                 {"decreasing", decreasing},    {"tolerance", 0.05}};
    r.summary = "sup|rho-rho_S| = " + detail::fmt(dist[0]) + ", " + detail::fmt(dist[1]) + ", " +
                detail::fmt(dist[2]) + " (need decreasing and <= 0.05 at delta=0.05)";
    return r;
  });
}

/// Fick's law at delta = 0.05 with D = 1/mu.
inline CriterionResult criterion_2(const Options& = {}) {
  return detail::timed(2, "Fick's law", [] {
    CriterionResult r;
    const auto f = detail::slab_landau(0.05);
    const double D = green_kubo_D(1.0, DConvention::component_normalized);
    const auto rep = fick_check(profile_from_field(f), D);
    r.pass = rep.flux_pass && rep.spread_pass;
    r.metrics = to_json(rep);
    r.metrics["face_flux_min"] = f.face_flux(0);
    r.summary = "J_mean = " + detail::fmt(rep.J_mean) + " vs " + detail::fmt(rep.J_expected) + " (error " +
                detail::fmt(100.0 * rep.flux_error, 3) + "%, need <= 3%), spread " +
                detail::fmt(100.0 * rep.flux_spread, 3) + "% (need <= 1%)";
    return r;
  });
}

/// Hilbert remainder norms fit a power law in delta with exponent >= 0.4.
inline CriterionResult criterion_3(const Options& = {}) {
  return detail::timed(3, "Hilbert remainder", [] {
    CriterionResult r;
    std::vector<double> deltas(detail::kDeltas.begin(), detail::kDeltas.end()), norms, scaled;
    for (double delta : deltas) {
      const auto h = hilbert_residual(detail::slab_landau(delta));
      norms.push_back(h.remainder_norm);
      // diagnostic: remainder relative to the bulk density gradient
      const double slope = fitted_slope(h.x1, h.rho);
      scaled.push_back(h.remainder_norm / std::abs(slope));
    }
    const PowerFit fit = fit_power_law(deltas, norms);
    const PowerFit fit_scaled = fit_power_law(deltas, scaled);
    r.pass = fit.valid && fit.exponent >= 0.4;
    r.metrics = {{"deltas", deltas},
                 {"remainder_norms", norms},
                 {"fit", to_json(fit)},
                 {"diagnostic_gradient_scaled_fit", to_json(fit_scaled)},
                 {"tolerance", 0.4}};
    r.summary = "R = " + detail::fmt(norms[0]) + ", " + detail::fmt(norms[1]) + ", " + detail::fmt(norms[2]) +
                ", fitted exponent " + detail::fmt(fit.exponent, 3) + " (need >= 0.4)";
    return r;
  });
}

/// Landau and Boltzmann Monte Carlo against the grid solutions at ten points.
inline CriterionResult criterion_4(const Options& opt = {}) {
  return detail::timed(4, "Monte Carlo vs grid", [&] {
    CriterionResult r;
    const KineticParams p;  // eps 0.05, alpha 0.1, lambda 0.05
    const auto pot = RadialPotential::quartic_bump();
    const auto table = ScatteringTable::build(pot, p.epsilon, p.alpha, 1025);
    const double B = landau_coefficient_B(table, p.mu);
    // grid reference: Richardson extrapolation in x over two resolved grids
    auto grid = [&](std::size_t nx, bool landau) {
      return landau ? solve_landau(Grid{nx, 128, p.L, p.delta()}, p.rho1, p.rho2, B)
                    : solve_boltzmann(p, nx, 128, table);
    };
    const DiscreteField l1 = grid(400, true), l2 = grid(800, true);
    const DiscreteField b1 = grid(400, false), b2 = grid(800, false);
    const double pi = std::numbers::pi;
    const std::array<double, 10> xs{0.15, 0.25, 0.35, 0.45, 0.5, 0.55, 0.65, 0.75, 0.85, 0.3};
    const std::array<double, 10> ths{0.0,          pi / 4,       3 * pi / 4, pi,          3 * pi / 8,
                                     5 * pi / 4,   7 * pi / 4,   pi / 8,     7 * pi / 8,  pi / 2 + pi / 8};
    const auto landau = KineticModel::landau(p, B);
    const auto boltz = KineticModel::boltzmann(p, table);
    KineticRunConfig cfg;
    cfg.n_samples = 100000;
    cfg.workers = opt.workers;
    json points = json::array();
    double worst = 0.0;
    std::size_t ok = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const Vec2 x{xs[k], 0.0};
      const double ref_l = 2.0 * l2.value_at(xs[k], ths[k]) - l1.value_at(xs[k], ths[k]);
      const double ref_b = 2.0 * b2.value_at(xs[k], ths[k]) - b1.value_at(xs[k], ths[k]);
      cfg.seed = derive_seed(opt.seed, 4, k);
      const Estimate el = stationary_estimate_kinetic(landau, x, ths[k], cfg);
      const Estimate eb = stationary_estimate_kinetic(boltz, x, ths[k], cfg);
      const double zl = (el.mean - ref_l) / el.stderr();
      const double zb = (eb.mean - ref_b) / eb.stderr();
      ok += (std::abs(zl) <= 3.0) + (std::abs(zb) <= 3.0);
      worst = std::max({worst, std::abs(zl), std::abs(zb)});
      points.push_back({{"x1", xs[k]},
                        {"theta", ths[k]},
                        {"landau", {{"grid", ref_l}, {"mc", el.mean}, {"stderr", el.stderr()}, {"z", zl}}},
                        {"boltzmann", {{"grid", ref_b}, {"mc", eb.mean}, {"stderr", eb.stderr()}, {"z", zb}}}});
    }
    r.metrics = {{"points", points},     {"n_samples", cfg.n_samples}, {"landau_coefficient", B},
                 {"landau_dt", landau.dt()}, {"worst_abs_z", worst},   {"within", ok}};
    r.pass = ok == 2 * xs.size();
    r.summary = std::to_string(ok) + "/20 estimates within 3 stderr of the grid (worst |z| = " +
                detail::fmt(worst, 3) + ")";
    return r;
  });
}

/// Boltzmann-Landau sup distance decreasing over eps at fixed delta = 0.2.
inline CriterionResult criterion_5(const Options& = {}) {
  return detail::timed(5, "grazing-collision trend", [] {
    CriterionResult r;
    std::vector<KineticParams> regimes;
    for (double eps : {0.1, 0.05, 0.025}) {
      KineticParams p;
      p.epsilon = eps;
      regimes.push_back(p.with_delta(0.2));
    }
    StudyOptions so;
    so.n_x = 200;
    so.n_theta = 128;
    const auto t = convergence_study(regimes, LevelPair::boltzmann_landau, so);
    r.pass = t.strictly_decreasing;
    r.metrics = to_json(t);
    r.summary = "sup|g_B - g_L| = " + detail::fmt(t.rows[0].distance) + ", " + detail::fmt(t.rows[1].distance) +
                ", " + detail::fmt(t.rows[2].distance) + " over eps = 0.1, 0.05, 0.025 (need strictly decreasing)";
    return r;
  });
}

/// Micro vs Boltzmann Monte Carlo at x1 = L/2 over 8 angles.
inline CriterionResult criterion_6(const Options& opt = {}) {
  return detail::timed(6, "mechanical vs kinetic", [&] {
    CriterionResult r;
    const KineticParams p;
    const auto pot = RadialPotential::quartic_bump();
    const auto boltz = KineticModel::boltzmann(p, ScatteringTable::build(pot, p.epsilon, p.alpha, 1025));
    constexpr std::size_t n_angles = 8;
    MicroRunConfig mc;
    mc.potential = pot;
    mc.n_samples = 10000;
    mc.workers = opt.workers;
    KineticRunConfig kc;
    kc.n_samples = 10000;
    kc.workers = opt.workers;
    double mean_m = 0.0, mean_b = 0.0, var_m = 0.0, var_b = 0.0, censored = 0.0;
    json angles = json::array();
    const Vec2 x{0.5 * p.L, 0.0};
    for (std::size_t a = 0; a < n_angles; ++a) {
      const double theta = 2.0 * std::numbers::pi * (static_cast<double>(a) + 0.5) / n_angles;
      mc.seed = derive_seed(opt.seed, 6, a);
      kc.seed = derive_seed(opt.seed, 60, a);
      const Estimate em = stationary_estimate_micro(x, unit_from_angle(theta), p, mc);
      const Estimate eb = stationary_estimate_kinetic(boltz, x, theta, kc);
      mean_m += em.mean / n_angles;
      mean_b += eb.mean / n_angles;
      var_m += em.stderr() * em.stderr() / (n_angles * n_angles);
      var_b += eb.stderr() * eb.stderr() / (n_angles * n_angles);
      censored = std::max(censored, em.censored_fraction);
      angles.push_back({{"theta", theta},
                        {"micro", estimate_json(em, x, unit_from_angle(theta), p, "micro")},
                        {"boltzmann", estimate_json(eb, x, unit_from_angle(theta), p, "boltzmann")}});
    }
    const double sigma = std::sqrt(var_m + var_b);
    const double diff = std::abs(mean_m - mean_b);
    const bool agree = diff <= 3.0 * sigma;
    const bool uncensored = censored < 0.05;
    r.pass = agree && uncensored;
    r.metrics = {{"micro_mean", mean_m},       {"boltzmann_mean", mean_b}, {"difference", diff},
                 {"sigma", sigma},             {"max_censored_fraction", censored},
                 {"t_cap", p.default_t_cap()}, {"angles", angles}};
    r.summary = "micro " + detail::fmt(mean_m, 5) + " vs Boltzmann " + detail::fmt(mean_b, 5) + " (|diff| " +
                detail::fmt(diff, 3) + ", 3 sigma " + detail::fmt(3.0 * sigma, 3) + "), censored " +
                detail::fmt(100.0 * censored, 3) + "% (need < 5%)";
    return r;
  });
}

/// Neumann contraction and survival at t0 = eps^-lambda in an Assumption-1 regime.
inline CriterionResult criterion_7(const Options& opt = {}) {
  return detail::timed(7, "contraction", [&] {
    CriterionResult r;
    KineticParams p;
    p.epsilon = 0.05;
    p.alpha = 0.1;
    p.lambda = 0.02;
    const bool valid = p.regime().assumption1;
    const auto pot = RadialPotential::quartic_bump();
    const double B = landau_diffusion(p, pot, LandauCoefficient::table_B);
    const Grid g{100, 64, p.L, p.delta()};
    const double t0 = std::pow(p.epsilon, -p.lambda);
    const auto nr = neumann_iterate(g, p.rho1, p.rho2, landau_stencil(g, B), t0, 200);
    const double beta = nr.contraction_estimates.empty()
                            ? 0.0
                            : *std::max_element(nr.contraction_estimates.begin(), nr.contraction_estimates.end());
    const auto direct = solve_landau(g, p.rho1, p.rho2, B);
    const double agreement = field_distance(nr.field, direct);
    const auto model = KineticModel::landau(p, B);
    std::vector<double> horizons{0.5 * t0, t0, 2.0 * t0}, survival;
    for (double h : horizons)
      survival.push_back(survival_fraction(model, h, 20000, StartDistribution::mid_slab(p.L), opt.seed, opt.workers));
    const bool contracting = !nr.contraction_estimates.empty() && beta < 1.0;
    const bool survival_ok = survival[1] < 1.0 && survival[1] < survival[0] && survival[2] < survival[1];
    r.pass = valid && contracting && survival_ok;
    r.metrics = {{"params", to_json(p)},
                 {"t0", t0},
                 {"terms", nr.term_norms.size()},
                 {"ratios", nr.contraction_estimates},
                 {"max_ratio", beta},
                 {"converged", nr.converged},
                 {"distance_to_direct", agreement},
                 {"horizons", horizons},
                 {"survival", survival}};
    r.summary = "max term ratio " + detail::fmt(beta, 4) + " over " + std::to_string(nr.term_norms.size()) +
                " terms; survival " + detail::fmt(survival[0], 3) + ", " + detail::fmt(survival[1], 3) + ", " +
                detail::fmt(survival[2], 3) + " at t0/2, t0, 2 t0";
    return r;
  });
}

/// Hard-disk and smooth-potential deflections, and the angle bound report.
inline CriterionResult criterion_8(const Options& = {}) {
  return detail::timed(8, "scattering validation", [] {
    CriterionResult r;
    // hard disk: geometric reflection at the contact point
    double hard_err = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double b = -1.0 + 2.0 * (k + 0.5) / 1000.0;
      const Vec2 omega{-std::sqrt(1.0 - b * b), b};
      const Vec2 out = reflect({1.0, 0.0}, omega);
      const double geometric = std::atan2(out.y, out.x);
      const double formula = std::numbers::pi - 2.0 * std::asin(std::abs(b));
      hard_err = std::max({hard_err, std::abs(std::abs(geometric) - formula),
                           std::abs(hard_disk_deflection(b) - geometric)});
    }
    // smooth potential: full equations of motion past one scatterer
    const auto pot = RadialPotential::quartic_bump();
    const double eps = 0.05, alpha = 0.1, c = std::pow(eps, alpha);
    const Vec2 centre{0.5, 0.0};
    const auto field = ObstacleField::fixed(1.0, eps, {centre});
    const MicroDynamics dyn(field, pot, c);
    double ode_err = 0.0;
    for (int k = 0; k < 50; ++k) {
      const double b = -0.98 + 1.96 * k / 49.0;
      const ParticleState s{centre + Vec2{-1.5 * eps, b * eps}, {1.0, 0.0}, 0.0};
      const auto res = dyn.flow(s, 4.0 * eps, Direction::forward, false);
      const double ang = std::atan2(res.state.v.y, res.state.v.x);
      const double d = std::remainder(ang - deflection_angle(pot, c, b), 2.0 * std::numbers::pi);
      ode_err = std::max(ode_err, std::abs(d));
    }
    const auto study = angle_bound_study(pot, alpha, {0.1, 0.05, 0.025}, 1025);
    r.pass = hard_err <= 1e-12 && ode_err <= 1e-4 && study.all_pass;
    json reports = json::array();
    for (const auto& rep : study.reports) reports.push_back(to_json(rep));
    r.metrics = {{"hard_disk_max_error", hard_err},
                 {"ode_vs_quadrature_max_error", ode_err},
                 {"coupling", c},
                 {"angle_bound", reports},
                 {"c_tilde", study.c_tilde},
                 {"fitted_exponent", study.fitted_exponent}};
    r.summary = "hard disk err " + detail::fmt(hard_err, 3) + " (<= 1e-12), ODE vs quadrature " +
                detail::fmt(ode_err, 3) + " rad (<= 1e-4), angle bound " + (study.all_pass ? "passes" : "fails");
    return r;
  });
}

/// Poisson counts, independence of neighbouring cells, and thread-count
/// independent regeneration.
inline CriterionResult criterion_9(const Options& opt = {}) {
  return detail::timed(9, "medium statistics", [&] {
    CriterionResult r;
    const KineticParams p;
    const ObstacleField field = ObstacleField::from_params(p, opt.seed);
    const double side = field.cell_size();
    const std::int64_t cols = static_cast<std::int64_t>(std::floor(p.L / side + 1e-9));
    const std::int64_t rows = (10000 + cols - 1) / cols;
    std::vector<long> counts;
    for (std::int64_t iy = 0; iy < rows; ++iy)
      for (std::int64_t ix = 0; ix < cols; ++ix) counts.push_back(static_cast<long>(field.cell({ix, iy}).size()));
    const double mean = p.mu_eps() * side * side;
    // chi-square goodness of fit, bins merged until each expects >= 5
    const boost::math::poisson_distribution<> pois(mean);
    const double n = static_cast<double>(counts.size());
    long kmax = *std::max_element(counts.begin(), counts.end());
    std::vector<double> observed, expected;
    double obs_acc = 0.0, exp_acc = 0.0;
    for (long k = 0; k <= kmax; ++k) {
      obs_acc += static_cast<double>(std::count(counts.begin(), counts.end(), k));
      exp_acc += n * boost::math::pdf(pois, static_cast<double>(k));
      if (exp_acc >= 5.0) {
        observed.push_back(obs_acc);
        expected.push_back(exp_acc);
        obs_acc = exp_acc = 0.0;
      }
    }
    // upper tail joins the last bin
    exp_acc += n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(kmax)));
    if (expected.empty()) {
      observed.push_back(obs_acc);
      expected.push_back(exp_acc);
    } else {
      observed.back() += obs_acc;
      expected.back() += exp_acc;
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i)
      chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    const double dof = static_cast<double>(observed.size()) - 1.0;
    const double p_poisson =
        dof > 0 ? boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(dof), chi2)) : 1.0;
    // independence: Pearson correlation of vertically adjacent cell counts
    double sxy = 0.0, sxx = 0.0, syy = 0.0, mx = 0.0, my = 0.0;
    std::size_t pairs = 0;
    for (std::int64_t iy = 0; iy + 1 < rows; ++iy)
      for (std::int64_t ix = 0; ix < cols; ++ix) {
        mx += counts[iy * cols + ix];
        my += counts[(iy + 1) * cols + ix];
        ++pairs;
      }
    mx /= pairs;
    my /= pairs;
    for (std::int64_t iy = 0; iy + 1 < rows; ++iy)
      for (std::int64_t ix = 0; ix < cols; ++ix) {
        const double a = counts[iy * cols + ix] - mx, b = counts[(iy + 1) * cols + ix] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
      }
    const double corr = sxy / std::sqrt(sxx * syy);
    const double z = corr * std::sqrt(static_cast<double>(pairs));
    const double p_indep = std::erfc(std::abs(z) / std::sqrt(2.0));
    // regeneration: a fresh field, filled concurrently, matches bit for bit
    bool bit_exact = true;
    {
      const ObstacleField fresh = ObstacleField::from_params(p, opt.seed);
      const std::size_t n_cells = counts.size();
      parallel_for(n_cells, 4, [&](std::size_t i) {
        (void)fresh.cell({static_cast<std::int64_t>(i % cols), static_cast<std::int64_t>(i / cols)});
      });
      for (std::size_t i = 0; i < n_cells && bit_exact; ++i) {
        const CellKey key{static_cast<std::int64_t>(i % cols), static_cast<std::int64_t>(i / cols)};
        const auto& a = field.cell(key);
        const auto& b = fresh.cell(key);
        bit_exact = a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](Vec2 u, Vec2 v) {
                      return u.x == v.x && u.y == v.y;
                    });
      }
    }
    // estimates: identical bits for 1 and 3 workers
    {
      const auto model =
          KineticModel::boltzmann(p, ScatteringTable::build(RadialPotential::quartic_bump(), p.epsilon, p.alpha, 257));
      KineticRunConfig c1{2000, 0.0, opt.seed, 1, 10, 0}, c3{2000, 0.0, opt.seed, 3, 10, 0};
      const auto e1 = stationary_estimate_kinetic(model, {0.5, 0.0}, 0.3, c1);
      const auto e3 = stationary_estimate_kinetic(model, {0.5, 0.0}, 0.3, c3);
      MicroRunConfig m1{RadialPotential::quartic_bump(), 40, 0.0, opt.seed, 1, {}}, m3 = m1;
      m3.workers = 3;
      const auto u1 = stationary_estimate_micro({0.5, 0.0}, unit_from_angle(0.3), p, m1);
      const auto u3 = stationary_estimate_micro({0.5, 0.0}, unit_from_angle(0.3), p, m3);
      bit_exact = bit_exact && e1.mean == e3.mean && e1.stderr() == e3.stderr() && u1.mean == u3.mean &&
                  u1.stderr() == u3.stderr();
    }
    r.pass = p_poisson >= 0.01 && p_indep >= 0.01 && bit_exact;
    r.metrics = {{"cells", counts.size()},  {"cell_mean", mean},       {"chi2", chi2},
                 {"dof", dof},              {"p_poisson", p_poisson},  {"neighbour_correlation", corr},
                 {"p_independence", p_indep}, {"bit_exact", bit_exact}};
    r.summary = "chi2 p = " + detail::fmt(p_poisson, 3) + ", independence p = " + detail::fmt(p_indep, 3) +
                " over " + std::to_string(counts.size()) + " cells (need >= 0.01), regeneration " +
                (bit_exact ? "bit-exact" : "NOT bit-exact");
    return r;
  });
}

/// Energy, reversibility, maximum principle, free transport and equilibrium.
inline CriterionResult criterion_10(const Options& opt = {}) {
  return detail::timed(10, "exact invariants", [&] {
    CriterionResult r;
    const KineticParams p;
    const auto pot = RadialPotential::quartic_bump();
    const auto field = ObstacleField::from_params(p, opt.seed);
    const MicroDynamics dyn(field, pot, p.coupling());
    // energy over >= 1000 support crossings, in a strip wide enough to keep them coming
    KineticParams wide = p;
    wide.L = 40.0;
    const auto wide_field = ObstacleField::from_params(wide, opt.seed);
    const MicroDynamics wide_dyn(wide_field, pot, wide.coupling());
    const auto long_run = wide_dyn.flow({{20.0, 0.0}, unit_from_angle(0.3), 0.0}, 300.0, Direction::forward, false);
    const ParticleState s0{{0.5, 0.0}, unit_from_angle(0.3), 0.0};
    const double per_1000 =
        long_run.max_energy_drift * std::max(1.0, 1000.0 / std::max<double>(1.0, long_run.support_crossings));
    const bool energy_ok = long_run.support_crossings >= 1000 && per_1000 <= 1e-8;
    // reversibility over a horizon short of the chaotic amplification
    const auto fw = dyn.flow(s0, 0.5, Direction::forward, false);
    const auto bw = dyn.flow(fw.state, 0.5, Direction::backward, false);
    const double rev = std::max(norm(bw.state.x - s0.x), norm(bw.state.v - s0.v));
    const bool rev_ok = rev <= 1e-8;

    // maximum principle on grid fields
    const auto table = ScatteringTable::build(pot, p.epsilon, p.alpha, 1025);
    const auto gl = solve_landau(Grid{200, 64, p.L, p.delta()}, p.rho1, p.rho2, landau_coefficient_B(table, p.mu));
    const auto gb = solve_boltzmann(p, 200, 64, table);
    const double lo = p.rho1 - 1e-12, hi = p.rho2 + 1e-12;
    bool maxp = gl.min_value() >= lo && gl.max_value() <= hi && gb.min_value() >= lo && gb.max_value() <= hi;
    for (double delta : detail::kDeltas) {
      const auto f = detail::slab_landau(delta, 200, 64);
      maxp = maxp && f.min_value() >= lo && f.max_value() <= hi;
    }
    // and on Monte Carlo estimates
    const auto boltz = KineticModel::boltzmann(p, table);
    const auto landau = KineticModel::landau(p, landau_coefficient_B(table, p.mu));
    KineticRunConfig kc{2000, 0.0, opt.seed, opt.workers, 10, 0};
    MicroRunConfig mc{pot, 100, 0.0, opt.seed, opt.workers, {}};
    for (double theta : {0.0, 2.0, 4.0}) {
      for (const Estimate& e : {stationary_estimate_kinetic(boltz, {0.3, 0.0}, theta, kc),
                                stationary_estimate_kinetic(landau, {0.3, 0.0}, theta, kc),
                                stationary_estimate_micro({0.3, 0.0}, unit_from_angle(theta), p, mc)})
        maxp = maxp && e.mean >= lo && e.mean <= hi;
    }

    // free transport: zero potential, or zero angular diffusion
    double free_err = 0.0, free_err_mc = 0.0;
    {
      const Grid g{64, 66, p.L, p.delta()};  // 66 directions: no exactly vertical ray
      const auto zero = RadialPotential::zero();
      const auto ztable = ScatteringTable::build(zero, p.epsilon, p.alpha, 65);
      const auto f = solve_boltzmann(g, p.rho1, p.rho2, ztable, p.mu);
      for (std::size_t i = 0; i < g.n_x; ++i)
        for (std::size_t j = 0; j < g.n_theta; ++j)
          free_err = std::max(free_err, std::abs(f.at(i, j) - (g.cos_theta(j) > 0.0 ? p.rho1 : p.rho2)));
      const auto zb = KineticModel::boltzmann(p, ztable);
      const auto zl = KineticModel::landau(p, 0.0);
      MicroRunConfig zm{zero, 50, 0.0, opt.seed, opt.workers, {}};
      KineticRunConfig zk{200, 0.0, opt.seed, opt.workers, 10, 0};
      for (double theta : {0.4, 2.9, 4.0, 5.5}) {
        const double expect = std::cos(theta) > 0.0 ? p.rho1 : p.rho2;
        for (const Estimate& e : {stationary_estimate_kinetic(zb, {0.6, 0.0}, theta, zk),
                                  stationary_estimate_kinetic(zl, {0.6, 0.0}, theta, zk),
                                  stationary_estimate_micro({0.6, 0.0}, unit_from_angle(theta), p, zm)})
          free_err_mc = std::max(free_err_mc, std::abs(e.mean - expect) + e.stderr());
      }
    }
    // the grid solve is exact up to the direct solver's rounding; sampled paths are exact
    const bool free_ok = free_err <= 1e-10 && free_err_mc == 0.0;

    // equilibrium rho1 = rho2: constant solutions, zero flux, at every level
    double eq_err = 0.0;
    {
      KineticParams q = p;
      q.rho1 = q.rho2 = 1.5;
      const Grid g{100, 64, q.L, q.delta()};
      for (const DiscreteField& f : {solve_landau(g, q.rho1, q.rho2, landau_coefficient_B(table, q.mu)),
                                     solve_boltzmann(g, q.rho1, q.rho2, table, q.mu)}) {
        eq_err = std::max({eq_err, std::abs(f.min_value() - 1.5), std::abs(f.max_value() - 1.5)});
        for (std::size_t i = 0; i < g.n_x; ++i) eq_err = std::max(eq_err, std::abs(f.flux(i)));
      }
      const auto eb = KineticModel::boltzmann(q, table);
      const auto el = KineticModel::landau(q, landau_coefficient_B(table, q.mu));
      KineticRunConfig ek{500, 0.0, opt.seed, opt.workers, 10, 0};
      MicroRunConfig em{pot, 30, 0.0, opt.seed, opt.workers, {}};
      for (const Estimate& e : {stationary_estimate_kinetic(eb, {0.2, 0.0}, 1.0, ek),
                                stationary_estimate_kinetic(el, {0.2, 0.0}, 1.0, ek),
                                stationary_estimate_micro({0.2, 0.0}, unit_from_angle(1.0), q, em)})
        eq_err = std::max(eq_err, std::abs(e.mean - 1.5) + e.stderr());
    }
    const bool eq_ok = eq_err <= 1e-9;

    r.pass = energy_ok && rev_ok && maxp && free_ok && eq_ok;
    r.metrics = {{"support_crossings", long_run.support_crossings},
                 {"energy_drift", long_run.max_energy_drift},
                 {"energy_drift_per_1000_crossings", per_1000},
                 {"reversibility_error", rev},
                 {"maximum_principle", maxp},
                 {"free_transport_error_grid", free_err},
                 {"free_transport_error_mc", free_err_mc},
                 {"equilibrium_error", eq_err}};
    r.summary = "energy drift " + detail::fmt(per_1000, 3) + " per 1000 crossings, reversal error " +
                detail::fmt(rev, 3) + ", max principle " + (maxp ? "holds" : "violated") + ", free transport err " +
                detail::fmt(std::max(free_err, free_err_mc), 3) + ", equilibrium err " + detail::fmt(eq_err, 3);
    return r;
  });
}

inline CriterionResult run(int id, const Options& opt = {}) {
  switch (id) {
    case 1: return criterion_1(opt);
    case 2: return criterion_2(opt);
    case 3: return criterion_3(opt);
    case 4: return criterion_4(opt);
    case 5: return criterion_5(opt);
    case 6: return criterion_6(opt);
    case 7: return criterion_7(opt);
    case 8: return criterion_8(opt);
    case 9: return criterion_9(opt);
    case 10: return criterion_10(opt);
  }
  throw DomainError("criterion id must lie in 1..10");
}

inline json to_json(const CriterionResult& r) {
  return {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"summary", r.summary}, {"metrics", r.metrics}};
}

}  // namespace lorentz_fick::acceptance
