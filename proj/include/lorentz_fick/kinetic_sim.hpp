#pragma once

// Backward samplers for the two kinetic descriptions in the slab: the linear
// Boltzmann jump process and the Landau angular diffusion. Both generators
// are symmetric in the angle, so the time-reversed process has the same law
// and the backward path is simulated as forward motion with -v.

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include "error.hpp"
#include "estimate.hpp"
#include "parallel.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "scattering.hpp"
#include "vec2.hpp"

namespace lorentz_fick {

struct KineticState {
  Vec2 x;
  double theta = 0.0;
  double t = 0.0;

  Vec2 v() const { return unit_from_angle(theta); }
};

enum class GeneratorKind { boltzmann, landau };

inline const char* to_string(GeneratorKind k) { return k == GeneratorKind::boltzmann ? "boltzmann" : "landau"; }

/// Where the Landau diffusion coefficient comes from.
enum class LandauCoefficient {
  table_B,          // landau_coefficient_B of the table at the run's eps
  grazing_limit_B,  // its eps -> 0 limit B_phi
  half_mu,          // mu / 2
};

inline const char* to_string(LandauCoefficient c) {
  switch (c) {
    case LandauCoefficient::table_B: return "table_B";
    case LandauCoefficient::grazing_limit_B: return "grazing_limit_B";
    case LandauCoefficient::half_mu: return "half_mu";
  }
  return "?";
}

inline LandauCoefficient landau_coefficient_from_string(const std::string& s) {
  if (s == "table_B") return LandauCoefficient::table_B;
  if (s == "grazing_limit_B") return LandauCoefficient::grazing_limit_B;
  if (s == "half_mu") return LandauCoefficient::half_mu;
  throw DomainError("unknown Landau coefficient source '" + s + "'");
}

inline double landau_diffusion(const KineticParams& p, const RadialPotential& pot, LandauCoefficient source,
                               std::size_t table_points = 1025) {
  switch (source) {
    case LandauCoefficient::table_B:
      return landau_coefficient_B(ScatteringTable::build(pot, p.epsilon, p.alpha, table_points), p.mu);
    case LandauCoefficient::grazing_limit_B: return grazing_limit_B(pot, p.mu);
    case LandauCoefficient::half_mu: return 0.5 * p.mu;
  }
  return 0.0;
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::landau;
  double rate = 0.0;       // total jump rate (boltzmann)
  double diffusion = 0.0;  // angular generator coefficient (landau)
  double time_scale = 1.0;

  static GeneratorSpec boltzmann(const KineticParams& p) {
    return {GeneratorKind::boltzmann, p.jump_rate(), 0.0, p.time_scale()};
  }
  static GeneratorSpec landau(const KineticParams& p, double diffusion) {
    return {GeneratorKind::landau, 0.0, diffusion, p.time_scale()};
  }

  /// Zero rate or diffusion is accepted as the collisionless limit.
  void validate() const {
    if (!(time_scale > 0.0)) throw DomainError("time_scale must be > 0");
    if (kind == GeneratorKind::boltzmann && !(rate >= 0.0)) throw DomainError("jump rate must be >= 0");
    if (kind == GeneratorKind::landau && !(diffusion >= 0.0)) throw DomainError("diffusion must be >= 0");
  }
};

namespace detail {

// Backward free flight of duration s from x along angle theta. Returns the
// time of the first boundary contact within s, or a negative value.
inline double boundary_time(Vec2 x, double c, double L, double s) {
  // backward motion: dx1/dt = -c
  if (c > 0.0 && x.x / c <= s) return x.x / c;
  if (c < 0.0 && (x.x - L) / c <= s) return (x.x - L) / c;
  return -1.0;
}

inline ExitRecord make_exit(Vec2 x, double theta, double elapsed, double L, double rho1, double rho2, bool exited) {
  ExitRecord rec;
  rec.hitting_time = elapsed;
  rec.exit_state = {x, unit_from_angle(theta), -elapsed};
  if (exited) {
    rec.kind = std::cos(theta) > 0.0 ? ExitKind::exited_left : ExitKind::exited_right;
    rec.exit_state.x.x = rec.kind == ExitKind::exited_left ? 0.0 : L;
  }
  rec.boundary_value = boundary_value_for(rec.kind, rho1, rho2);
  return rec;
}

inline void check_start(Vec2 x, double L, double t_cap) {
  if (!(x.x > 0.0 && x.x < L)) throw DomainError("start point needs 0 < x1 < L");
  if (!(t_cap > 0.0)) throw DomainError("t_cap must be > 0");
}

}  // namespace detail

/// One backward path of the Boltzmann process: exponential waiting times of
/// total rate 2 mu eps^{-2 alpha - lambda}; at each event the angle rotates by
/// the tabulated deflection at a uniform impact parameter in [-1, 1].
inline ExitRecord boltzmann_exit_sample(Vec2 x, double theta, const KineticParams& p, const ScatteringTable& table,
                                        double t_cap, SplitMix64& rng) {
  detail::check_start(x, p.L, t_cap);
  const double rate = p.jump_rate();
  std::exponential_distribution<double> wait(rate > 0.0 ? rate : 1.0);
  double elapsed = 0.0;
  for (;;) {
    const double w = rate > 0.0 ? wait(rng) : t_cap;
    const bool capped = w >= t_cap - elapsed;
    const double s = capped ? t_cap - elapsed : w;
    const double c = std::cos(theta);
    const double hit = detail::boundary_time(x, c, p.L, s);
    if (hit >= 0.0) {
      x -= hit * unit_from_angle(theta);
      return detail::make_exit(x, theta, elapsed + hit, p.L, p.rho1, p.rho2, true);
    }
    x -= s * unit_from_angle(theta);
    elapsed = capped ? t_cap : elapsed + s;
    if (capped) return detail::make_exit(x, theta, t_cap, p.L, p.rho1, p.rho2, false);
    theta += table.angle(2.0 * rng.uniform() - 1.0);
    theta = std::remainder(theta, 2.0 * std::numbers::pi);
  }
}

/// Landau sampler with a fixed time step. Each step is a Strang splitting
/// half-drift, angular Gaussian kick, half-drift; boundary contact is located
/// exactly on the straight drift pieces.
class LandauSampler {
 public:
  static constexpr double kMaxAngularStd = 0.1;

  LandauSampler(const KineticParams& p, GeneratorSpec gen, double dt) : p_(p), gen_(gen), dt_(dt) {
    gen_.validate();
    if (gen_.kind != GeneratorKind::landau) throw DomainError("LandauSampler needs a landau generator");
    if (!(dt > 0.0)) throw DomainError("dt must be > 0");
    sigma_ = std::sqrt(2.0 * gen_.diffusion * gen_.time_scale * dt);
    if (sigma_ > kMaxAngularStd * (1.0 + 1e-12))
      throw DomainError("dt too large: angular increment std " + std::to_string(sigma_) + " exceeds 0.1 rad");
  }

  /// Largest dt whose angular increment std equals `angular_std`.
  static double dt_for(const GeneratorSpec& gen, double angular_std = kMaxAngularStd) {
    if (gen.diffusion <= 0.0) return 1e-2;
    return angular_std * angular_std / (2.0 * gen.diffusion * gen.time_scale);
  }

  double dt() const { return dt_; }
  double angular_std() const { return sigma_; }

  ExitRecord exit_sample(Vec2 x, double theta, double t_cap, SplitMix64& rng) const {
    detail::check_start(x, p_.L, t_cap);
    std::normal_distribution<double> normal(0.0, 1.0);
    double elapsed = 0.0;
    // Straight drift over s; on boundary contact returns the contact time.
    auto drift = [&](double s) {
      const double hit = detail::boundary_time(x, std::cos(theta), p_.L, s);
      x -= (hit >= 0.0 ? hit : s) * unit_from_angle(theta);
      return hit;
    };
    while (elapsed < t_cap) {
      const double h = std::min(dt_, t_cap - elapsed);
      const double end = t_cap - elapsed <= dt_ ? t_cap : elapsed + h;
      if (const double hit = drift(0.5 * h); hit >= 0.0)
        return detail::make_exit(x, theta, elapsed + hit, p_.L, p_.rho1, p_.rho2, true);
      if (sigma_ > 0.0) theta += sigma_ * std::sqrt(h / dt_) * normal(rng);
      if (const double hit = drift(0.5 * h); hit >= 0.0)
        return detail::make_exit(x, theta, elapsed + 0.5 * h + hit, p_.L, p_.rho1, p_.rho2, true);
      elapsed = end;
    }
    return detail::make_exit(x, theta, t_cap, p_.L, p_.rho1, p_.rho2, false);
  }

  /// Angle after time t with no boundary (for the Brownian-motion check).
  double free_angle(double theta, double t, SplitMix64& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double s = 0.0; s < t; s += dt_) {
      const double h = std::min(dt_, t - s);
      theta += sigma_ * std::sqrt(h / dt_) * normal(rng);
    }
    return theta;
  }

 private:
  KineticParams p_;
  GeneratorSpec gen_;
  double dt_;
  double sigma_ = 0.0;
};

inline ExitRecord landau_exit_sample(Vec2 x, double theta, const KineticParams& p, const GeneratorSpec& gen,
                                     double dt, double t_cap, SplitMix64& rng) {
  return LandauSampler(p, gen, dt).exit_sample(x, theta, t_cap, rng);
}

/// A kinetic process ready for sampling: Boltzmann with its table, or Landau
/// with its coefficient and time step.
class KineticModel {
 public:
  static KineticModel boltzmann(const KineticParams& p, ScatteringTable table) {
    p.validate();
    KineticModel m(p, GeneratorSpec::boltzmann(p));
    m.table_ = std::make_shared<const ScatteringTable>(std::move(table));
    return m;
  }

  /// dt <= 0 selects the largest admissible step.
  static KineticModel landau(const KineticParams& p, double diffusion, double dt = 0.0) {
    p.validate();
    KineticModel m(p, GeneratorSpec::landau(p, diffusion));
    m.landau_ = std::make_shared<const LandauSampler>(p, m.gen_, dt > 0.0 ? dt : LandauSampler::dt_for(m.gen_));
    return m;
  }

  GeneratorKind kind() const { return gen_.kind; }
  const GeneratorSpec& generator() const { return gen_; }
  const KineticParams& params() const { return p_; }
  const ScatteringTable* table() const { return table_.get(); }
  double dt() const { return landau_ ? landau_->dt() : 0.0; }

  ExitRecord exit_sample(Vec2 x, double theta, double t_cap, SplitMix64& rng) const {
    if (gen_.kind == GeneratorKind::boltzmann) return boltzmann_exit_sample(x, theta, p_, *table_, t_cap, rng);
    return landau_->exit_sample(x, theta, t_cap, rng);
  }

 private:
  KineticModel(const KineticParams& p, GeneratorSpec gen) : p_(p), gen_(gen) {}

  KineticParams p_;
  GeneratorSpec gen_;
  std::shared_ptr<const ScatteringTable> table_;
  std::shared_ptr<const LandauSampler> landau_;
};

struct KineticRunConfig {
  std::size_t n_samples = 1000;
  double t_cap = 0.0;  // 0 selects params.default_t_cap()
  std::uint64_t seed = 0;
  unsigned workers = 1;
  int max_renewals = 10;
  std::uint64_t stream = 0;  // distinguishes estimates sharing a seed
};

namespace detail {

inline constexpr std::uint64_t kKineticStream = 0x6b696e65ULL;

inline SampleOutcome kinetic_sample(const KineticModel& m, Vec2 x, double theta, double t_cap, int max_renewals,
                                    SplitMix64& rng) {
  SampleOutcome out;
  ExitRecord rec = m.exit_sample(x, theta, t_cap, rng);
  out.censored_first = rec.kind == ExitKind::censored;
  // The processes are Markov: a censored path simply continues.
  for (int k = 0; rec.kind == ExitKind::censored && k < max_renewals; ++k) {
    const ParticleState& e = rec.exit_state;
    rec = m.exit_sample(e.x, std::atan2(e.v.y, e.v.x), t_cap, rng);
  }
  out.value = rec.boundary_value;
  return out;
}

}  // namespace detail

/// Monte Carlo estimate of the kinetic stationary density at (x, theta).
inline Estimate stationary_estimate_kinetic(const KineticModel& m, Vec2 x, double theta, const KineticRunConfig& cfg) {
  if (cfg.n_samples < 1) throw DomainError("n_samples must be >= 1");
  const double t_cap = cfg.t_cap > 0.0 ? cfg.t_cap : m.params().default_t_cap();
  const auto samples = parallel_map<SampleOutcome>(cfg.n_samples, cfg.workers, [&](std::size_t i) {
    SplitMix64 rng(derive_seed(cfg.seed, detail::kKineticStream ^ cfg.stream, i));
    return detail::kinetic_sample(m, x, theta, t_cap, cfg.max_renewals, rng);
  });
  return reduce_samples(samples);
}

/// Spatial density at x: the angle is drawn uniformly per sample.
inline Estimate stationary_density_kinetic(const KineticModel& m, Vec2 x, const KineticRunConfig& cfg) {
  if (cfg.n_samples < 1) throw DomainError("n_samples must be >= 1");
  const double t_cap = cfg.t_cap > 0.0 ? cfg.t_cap : m.params().default_t_cap();
  const auto samples = parallel_map<SampleOutcome>(cfg.n_samples, cfg.workers, [&](std::size_t i) {
    SplitMix64 rng(derive_seed(cfg.seed, detail::kKineticStream ^ cfg.stream, i));
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    return detail::kinetic_sample(m, x, theta, t_cap, cfg.max_renewals, rng);
  });
  return reduce_samples(samples);
}

/// Start points for survival_fraction: x1 uniform in [x1_lo, x1_hi], angle uniform.
struct StartDistribution {
  double x1_lo = 0.5;
  double x1_hi = 0.5;

  static StartDistribution mid_slab(double L) { return {0.5 * L, 0.5 * L}; }
};

/// Fraction of backward paths that have not reached the boundary by t_horizon.
inline double survival_fraction(const KineticModel& m, double t_horizon, std::size_t n_samples,
                                StartDistribution start, std::uint64_t seed, unsigned workers = 1) {
  if (n_samples < 1000) throw DomainError("survival_fraction needs n_samples >= 1000");
  if (!(t_horizon >= 0.0)) throw DomainError("t_horizon must be >= 0");
  if (!(start.x1_lo > 0.0 && start.x1_hi < m.params().L && start.x1_lo <= start.x1_hi))
    throw DomainError("start interval must lie inside (0, L)");
  if (t_horizon == 0.0) return 1.0;
  const auto alive = parallel_map<char>(n_samples, workers, [&](std::size_t i) -> char {
    SplitMix64 rng(derive_seed(seed, detail::kKineticStream ^ 0x5375ULL, i));
    const double x1 = start.x1_lo + (start.x1_hi - start.x1_lo) * rng.uniform();
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    return m.exit_sample({x1, 0.0}, theta, t_horizon, rng).kind == ExitKind::censored;
  });
  std::size_t n = 0;
  for (char a : alive) n += a ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(n_samples);
}

}  // namespace lorentz_fick
