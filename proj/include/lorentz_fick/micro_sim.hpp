#pragma once

// Newtonian motion of the light particle through the scatterer field.
//
// Outside every support the particle moves on straight lines, so free flight
// is computed in closed form up to the next support entry. Inside supports
// the flow is integrated by a sixth-order symmetric composition of
// velocity-Verlet steps with an energy-checked step controller. Support
// entries, exits and slab-boundary crossings inside supports are located by
// bisection on the step length.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "error.hpp"
#include "estimate.hpp"
#include "medium.hpp"
#include "parallel.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "scattering.hpp"
#include "vec2.hpp"

namespace lorentz_fick {

enum class Direction { forward, backward };

enum class FlowEvent { none, left_boundary, right_boundary };

struct MicroOptions {
  double step_fraction = 0.02;       // nominal step times the largest oscillation frequency
  double max_step_over_eps = 0.05;   // cap on the spatial step inside supports, in units of eps
  double energy_tolerance = 1e-13;   // accepted |dE| per step, relative to max(1, E)
  int max_halvings = 40;
  double position_tolerance = 1e-12;  // bisection stops below this spatial resolution, relative to eps
  int max_renewals = 10;
};

struct FlowResult {
  ParticleState state;
  FlowEvent event = FlowEvent::none;
  double elapsed = 0.0;
  double max_energy_drift = 0.0;  // max |E(t) - E(0)| seen at accepted steps
  std::size_t support_crossings = 0;
  std::size_t steps = 0;
};

class MicroDynamics {
 public:
  MicroDynamics(const ObstacleField& field, RadialPotential pot, double coupling, MicroOptions opt = {})
      : field_(&field), pot_(std::move(pot)), coupling_(coupling), opt_(opt) {
    if (!(coupling >= 0.0)) throw DomainError("coupling must be >= 0");
    eps_ = field.radius();
    curvature_ = std::max(pot_.curvature_bound(), 1e-300);
    slope_ = pot_.sup_r_derivative();
  }

  const ObstacleField& field() const { return *field_; }
  double coupling() const { return coupling_; }

  /// Kinetic plus potential energy at a phase-space point.
  double energy(const ParticleState& s) const {
    double u = 0.0;
    field_->for_each_near(s.x, eps_, [&](Vec2 c) { u += pot_.value(norm(s.x - c) / eps_); });
    return 0.5 * norm2(s.v) + coupling_ * u;
  }

  /// Advances by dt along the flow (backward: time-reversed) without
  /// stopping at the slab boundary.
  ParticleState integrate(ParticleState s, double dt, Direction dir = Direction::forward) const {
    return flow(s, dt, dir, false).state;
  }

  /// Advances by at most dt; with stop_at_boundary the run ends when x1
  /// reaches 0 or L.
  FlowResult flow(ParticleState s, double dt, Direction dir, bool stop_at_boundary,
                  std::vector<ParticleState>* trace = nullptr) const {
    if (!(dt > 0.0)) throw DomainError("dt must be > 0");
    if (dir == Direction::backward) s.v = -s.v;
    FlowResult r = run(s, dt, stop_at_boundary, trace);
    if (dir == Direction::backward) {
      r.state.v = -r.state.v;
      r.state.t = s.t - r.elapsed;
      if (trace)
        for (auto& p : *trace) p.v = -p.v;
    }
    return r;
  }

  /// Runs the time-reversed flow from (x, v) until x1 hits 0 or L, or t_cap.
  ExitRecord backward_exit(Vec2 x, Vec2 v, double t_cap, double rho1, double rho2,
                           std::vector<ParticleState>* trace = nullptr) const {
    if (!(x.x > 0.0 && x.x < field_->L())) throw DomainError("backward_exit needs 0 < x1 < L");
    if (std::abs(norm(v) - 1.0) > 1e-9) throw DomainError("backward_exit needs |v| = 1");
    if (!(t_cap > 0.0)) throw DomainError("t_cap must be > 0");
    const FlowResult r = flow({x, v, 0.0}, t_cap, Direction::backward, true, trace);
    ExitRecord rec;
    rec.exit_state = r.state;
    rec.hitting_time = r.elapsed;
    rec.kind = r.event == FlowEvent::left_boundary    ? ExitKind::exited_left
               : r.event == FlowEvent::right_boundary ? ExitKind::exited_right
                                                       : ExitKind::censored;
    rec.boundary_value = boundary_value_for(rec.kind, rho1, rho2);
    return rec;
  }

 private:
  struct Tracker {
    std::vector<Vec2> active;      // centres whose support contains x
    std::vector<Vec2> candidates;  // centres near the anchor that may be entered
    Vec2 anchor;
  };

  static constexpr double kReach = 2.5;  // candidate radius, in eps
  static constexpr double kRefresh = 1.0;

  Vec2 force(Vec2 x, const std::vector<Vec2>& active) const {
    Vec2 f{0.0, 0.0};
    for (const Vec2& c : active) {
      const Vec2 y = (x - c) / eps_;
      const double r = norm(y);
      if (r < 1.0) f -= pot_.derivative_over_r(r) * y;
    }
    return (coupling_ / eps_) * f;
  }

  double potential(Vec2 x, const std::vector<Vec2>& active) const {
    double u = 0.0;
    for (const Vec2& c : active) u += pot_.value(norm(x - c) / eps_);
    return coupling_ * u;
  }

  // One symmetric sixth-order step (Yoshida) built from velocity Verlet.
  void compose(Vec2& x, Vec2& v, double h, const std::vector<Vec2>& active) const {
    static constexpr double w1 = -1.17767998417887;
    static constexpr double w2 = 0.235573213359357;
    static constexpr double w3 = 0.784513610477560;
    static constexpr double w0 = 1.0 - 2.0 * (w1 + w2 + w3);
    static constexpr double ws[7] = {w3, w2, w1, w0, w1, w2, w3};
    for (double w : ws) {
      const double s = w * h;
      v += (0.5 * s) * force(x, active);
      x += s * v;
      v += (0.5 * s) * force(x, active);
    }
  }

  void refresh(Tracker& tr, Vec2 x) const {
    tr.anchor = x;
    tr.candidates.clear();
    field_->for_each_near(x, kReach * eps_, [&](Vec2 c) { tr.candidates.push_back(c); });
  }

  bool is_active(const Tracker& tr, Vec2 c) const {
    return std::find(tr.active.begin(), tr.active.end(), c) != tr.active.end();
  }

  // Earliest time in (0, limit] at which the straight line x + s v enters a
  // support, scanning the field in segments of one cell.
  std::optional<std::pair<double, Vec2>> next_entry(Vec2 x, Vec2 v, double limit) const {
    if (field_->intensity() == 0.0 && !field_->is_fixed()) return std::nullopt;
    const double a = norm2(v);
    const double speed = std::sqrt(a);
    const double seg = field_->cell_size() / speed;
    const double e2 = eps_ * eps_;
    for (double t0 = 0.0; t0 < limit; t0 += seg) {
      const double t1 = std::min(limit, t0 + seg);
      const Vec2 mid = x + (0.5 * (t0 + t1)) * v;
      double best = std::numeric_limits<double>::infinity();
      Vec2 hit;
      field_->for_each_near(mid, 0.5 * (t1 - t0) * speed + eps_ * (1.0 + 1e-9), [&](Vec2 c) {
        const Vec2 d = x - c;
        const double cq = norm2(d) - e2;
        if (cq <= 0.0) return;  // already inside or on the rim, moving out
        const double bq = dot(d, v);
        if (bq >= 0.0) return;  // moving away
        const double disc = bq * bq - a * cq;
        if (disc <= 0.0) return;
        const double s = cq / (-bq + std::sqrt(disc));  // smaller root, cancellation-free
        if (s >= t0 && s <= t1 && s < best) {
          best = s;
          hit = c;
        }
      });
      if (best <= t1) return std::make_pair(best, hit);
    }
    return std::nullopt;
  }

  struct Trial {
    Vec2 x, v;
    bool enter = false, leave = false, boundary = false;
  };

  Trial trial(Vec2 x, Vec2 v, double h, const Tracker& tr, bool stop_at_boundary) const {
    Trial t{x, v};
    compose(t.x, t.v, h, tr.active);
    const double e2 = eps_ * eps_;
    for (const Vec2& c : tr.active)
      if (norm2(t.x - c) >= e2) t.leave = true;
    for (const Vec2& c : tr.candidates)
      if (norm2(t.x - c) < e2 && !is_active(tr, c)) t.enter = true;
    if (stop_at_boundary && (t.x.x <= 0.0 || t.x.x >= field_->L())) t.boundary = true;
    return t;
  }

  // Whether the chord [a, b] passes through a support not in the active set.
  bool chord_grazes(Vec2 a, Vec2 b, const Tracker& tr) const {
    const Vec2 d = b - a;
    const double dd = norm2(d);
    if (dd == 0.0) return false;
    for (const Vec2& c : tr.candidates) {
      if (is_active(tr, c)) continue;
      const double s = std::clamp(dot(c - a, d) / dd, 0.0, 1.0);
      if (norm2(a + s * d - c) < eps_ * eps_) return true;
    }
    return false;
  }

  // Per-step energy tolerance. Far from the origin the rounding of x alone
  // moves the potential by about coupling * sup|phi'| * ulp(|x|) / eps.
  double energy_floor(Vec2 x, double e_scale) const {
    const double ulp = std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(x.x), std::abs(x.y)});
    return std::max(opt_.energy_tolerance * e_scale, 16.0 * coupling_ * slope_ * ulp / eps_);
  }

  double nominal_step(std::size_t n_active) const {
    const double omega = std::sqrt(coupling_ * curvature_ * static_cast<double>(std::max<std::size_t>(n_active, 1))) / eps_;
    const double by_freq = omega > 0.0 ? opt_.step_fraction / omega : std::numeric_limits<double>::infinity();
    return std::min(by_freq, opt_.max_step_over_eps * eps_);
  }

  FlowResult run(ParticleState s, double duration, bool stop_at_boundary,
                 std::vector<ParticleState>* trace) const {
    FlowResult res;
    const double L = field_->L();
    Tracker tr;
    field_->for_each_near(s.x, eps_, [&](Vec2 c) {
      if (norm2(s.x - c) < eps_ * eps_) tr.active.push_back(c);
    });
    const double e0 = 0.5 * norm2(s.v) + potential(s.x, tr.active);
    const double e_scale = std::max(1.0, std::abs(e0));
    double elapsed = 0.0;
    double h_prev = 0.0;
    if (trace) trace->push_back(s);

    auto finish = [&](FlowEvent ev) {
      s.t += elapsed;
      res.state = s;
      res.elapsed = elapsed;
      res.event = ev;
      if (trace) trace->push_back(s);
      return res;
    };

    while (elapsed < duration) {
      const double remaining = duration - elapsed;
      if (tr.active.empty()) {
        double t_move = remaining;
        FlowEvent ev = FlowEvent::none;
        if (stop_at_boundary) {
          if (s.v.x < 0.0 && -s.x.x / s.v.x <= t_move) {
            t_move = -s.x.x / s.v.x;
            ev = FlowEvent::left_boundary;
          } else if (s.v.x > 0.0 && (L - s.x.x) / s.v.x <= t_move) {
            t_move = (L - s.x.x) / s.v.x;
            ev = FlowEvent::right_boundary;
          }
        }
        const auto hit = next_entry(s.x, s.v, t_move);
        if (hit && hit->first < t_move) {
          s.x += hit->first * s.v;
          elapsed += hit->first;
          tr.active.push_back(hit->second);
          ++res.support_crossings;
          refresh(tr, s.x);
          h_prev = 0.0;
          if (trace) trace->push_back({s.x, s.v, s.t + elapsed});
          continue;
        }
        s.x += t_move * s.v;
        elapsed = ev == FlowEvent::none ? duration : elapsed + t_move;
        if (ev == FlowEvent::left_boundary) s.x.x = 0.0;
        if (ev == FlowEvent::right_boundary) s.x.x = L;
        return finish(ev);
      }

      if (norm(s.x - tr.anchor) > kRefresh * eps_ || tr.candidates.empty()) refresh(tr, s.x);

      // Energy-checked step.
      const double e_start = 0.5 * norm2(s.v) + potential(s.x, tr.active);
      double h = std::min(remaining, nominal_step(tr.active.size()));
      if (h_prev > 0.0) h = std::min(h, 2.0 * h_prev);
      Trial t;
      for (int halving = 0;; ++halving) {
        t = trial(s.x, s.v, h, tr, stop_at_boundary);
        const double de = std::abs(0.5 * norm2(t.v) + potential(t.x, tr.active) - e_start);
        const bool graze = !t.enter && !t.leave && !t.boundary && chord_grazes(s.x, t.x, tr);
        if (de <= energy_floor(s.x, e_scale) && !(graze && h > 1e-6 * eps_)) break;
        if (halving >= opt_.max_halvings)
          throw StepFailure("step controller could not meet the energy tolerance", s.x.x, s.x.y);
        h *= 0.5;
      }
      h_prev = h;
      ++res.steps;

      if (t.enter || t.leave || t.boundary) {
        // Smallest step length at which an event has happened.
        double lo = 0.0, hi = h;
        Trial at_hi = t;
        const double tol = opt_.position_tolerance * eps_;
        while ((hi - lo) * std::sqrt(norm2(s.v)) > tol && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
          const double mid = 0.5 * (lo + hi);
          const Trial m = trial(s.x, s.v, mid, tr, stop_at_boundary);
          if (m.enter || m.leave || m.boundary) {
            hi = mid;
            at_hi = m;
          } else {
            lo = mid;
          }
        }
        elapsed += hi;
        s.x = at_hi.x;
        s.v = at_hi.v;
        if (at_hi.boundary) {
          const FlowEvent ev = s.x.x <= 0.0 ? FlowEvent::left_boundary : FlowEvent::right_boundary;
          s.x.x = ev == FlowEvent::left_boundary ? 0.0 : L;
          track_energy(res, s, tr, e0);
          return finish(ev);
        }
        const double e2 = eps_ * eps_;
        std::erase_if(tr.active, [&](Vec2 c) { return norm2(s.x - c) >= e2; });
        for (const Vec2& c : tr.candidates)
          if (norm2(s.x - c) < e2 && !is_active(tr, c)) {
            tr.active.push_back(c);
            ++res.support_crossings;
          }
        if (trace) trace->push_back({s.x, s.v, s.t + elapsed});
      } else {
        elapsed += h;
        s.x = t.x;
        s.v = t.v;
        if (trace) trace->push_back({s.x, s.v, s.t + elapsed});
      }
      track_energy(res, s, tr, e0);
      if (tr.active.empty()) {
        // Back in free flight: restore unit-speed bookkeeping exactly as integrated.
        h_prev = 0.0;
      }
    }
    elapsed = duration;
    return finish(FlowEvent::none);
  }

  void track_energy(FlowResult& res, const ParticleState& s, const Tracker& tr, double e0) const {
    const double e = 0.5 * norm2(s.v) + potential(s.x, tr.active);
    res.max_energy_drift = std::max(res.max_energy_drift, std::abs(e - e0));
  }

  const ObstacleField* field_;
  RadialPotential pot_;
  double coupling_;
  MicroOptions opt_;
  double eps_ = 0.0;
  double curvature_ = 1.0;
  double slope_ = 0.0;
};

/// Backward exit with renewals: a censored path continues from where it
/// stopped for another t_cap, up to `max_renewals` times.
inline SampleOutcome resolve_with_renewals(const MicroDynamics& dyn, Vec2 x, Vec2 v, double t_cap,
                                           double rho1, double rho2, int max_renewals) {
  SampleOutcome out;
  ExitRecord rec = dyn.backward_exit(x, v, t_cap, rho1, rho2);
  out.censored_first = rec.kind == ExitKind::censored;
  for (int k = 0; rec.kind == ExitKind::censored && k < max_renewals; ++k) {
    const ParticleState& e = rec.exit_state;
    if (!(e.x.x > 0.0 && e.x.x < dyn.field().L())) break;
    rec = dyn.backward_exit(e.x, e.v / norm(e.v), t_cap, rho1, rho2);
  }
  out.value = rec.boundary_value;
  return out;
}

struct MicroRunConfig {
  RadialPotential potential = RadialPotential::quartic_bump();
  std::size_t n_samples = 1000;
  double t_cap = 0.0;  // 0 selects params.default_t_cap()
  std::uint64_t seed = 0;
  unsigned workers = 1;
  MicroOptions options{};
};

namespace detail {

inline constexpr std::uint64_t kMicroStream = 0x6d6963726fULL;

template <class VelocityFn>
Estimate micro_estimate(Vec2 x, const KineticParams& params, const MicroRunConfig& cfg, VelocityFn&& velocity) {
  params.validate();
  const double t_cap = cfg.t_cap > 0.0 ? cfg.t_cap : params.default_t_cap();
  auto samples = parallel_map<SampleOutcome>(cfg.n_samples, cfg.workers, [&](std::size_t i) {
    SplitMix64 rng(derive_seed(cfg.seed, kMicroStream, i));
    const ObstacleField field = ObstacleField::from_params(params, rng());
    const MicroDynamics dyn(field, cfg.potential, params.coupling(), cfg.options);
    return resolve_with_renewals(dyn, x, velocity(rng), t_cap, params.rho1, params.rho2,
                                 cfg.options.max_renewals);
  });
  return reduce_samples(samples);
}

}  // namespace detail

/// Monte Carlo estimate of the microscopic stationary density at (x, v):
/// one independent scatterer field per sample.
inline Estimate stationary_estimate_micro(Vec2 x, Vec2 v, const KineticParams& params,
                                          const MicroRunConfig& cfg) {
  if (cfg.n_samples < 1) throw DomainError("n_samples must be >= 1");
  return detail::micro_estimate(x, params, cfg, [v](SplitMix64&) { return v; });
}

/// Same estimator with the velocity angle drawn uniformly per sample, which
/// estimates the spatial density at x.
inline Estimate stationary_density_micro(Vec2 x, const KineticParams& params, const MicroRunConfig& cfg) {
  if (cfg.n_samples < 1) throw DomainError("n_samples must be >= 1");
  return detail::micro_estimate(x, params, cfg, [](SplitMix64& rng) {
    return unit_from_angle(2.0 * std::numbers::pi * rng.uniform());
  });
}

/// CSV rows "t,x1,x2,v1,v2".
inline void write_trajectory_csv(std::ostream& os, const std::vector<ParticleState>& trace) {
  const auto old = os.precision(17);
  os << "t,x1,x2,v1,v2\n";
  for (const auto& p : trace) os << p.t << ',' << p.x.x << ',' << p.x.y << ',' << p.v.x << ',' << p.v.y << '\n';
  os.precision(old);
}

}  // namespace lorentz_fick
