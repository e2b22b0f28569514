#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vec2.hpp"

namespace lorentz_fick {

enum class ExitKind { exited_left, exited_right, censored };

inline const char* to_string(ExitKind k) {
  switch (k) {
    case ExitKind::exited_left: return "exited_left";
    case ExitKind::exited_right: return "exited_right";
    case ExitKind::censored: return "censored";
  }
  return "?";
}

struct ParticleState {
  Vec2 x;
  Vec2 v;
  double t = 0.0;
};

/// Outcome of one backward trajectory. `hitting_time` is the backward time
/// elapsed until the boundary was reached (or the horizon, when censored).
struct ExitRecord {
  ExitKind kind = ExitKind::censored;
  ParticleState exit_state;
  double hitting_time = 0.0;
  std::optional<double> boundary_value;
};

/// Boundary value carried by a backward exit: rho1 through x1 = 0, rho2 through x1 = L.
inline std::optional<double> boundary_value_for(ExitKind kind, double rho1, double rho2) {
  switch (kind) {
    case ExitKind::exited_left: return rho1;
    case ExitKind::exited_right: return rho2;
    case ExitKind::censored: return std::nullopt;
  }
  return std::nullopt;
}

/// Monte Carlo estimate of a stationary density at one phase-space point.
struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;                 // samples requested
  std::size_t n_used = 0;            // samples that reached a boundary (possibly after renewals)
  std::size_t n_censored_first = 0;  // samples still inside at the first horizon
  std::size_t n_dropped = 0;         // samples censored after every renewal
  double censored_fraction = 0.0;    // n_censored_first / n

  double stderr() const { return stderr_; }
};

/// Per-sample value (nullopt when the sample was dropped) and whether it was
/// censored at the first horizon.
struct SampleOutcome {
  std::optional<double> value;
  bool censored_first = false;
};

/// Index-ordered reduction of sample outcomes, so the result does not depend
/// on how the samples were scheduled.
inline Estimate reduce_samples(const std::vector<SampleOutcome>& samples) {
  Estimate e;
  e.n = samples.size();
  double sum = 0.0;
  for (const auto& s : samples) {
    if (s.censored_first) ++e.n_censored_first;
    if (s.value) {
      ++e.n_used;
      sum += *s.value;
    } else {
      ++e.n_dropped;
    }
  }
  if (e.n_used > 0) {
    e.mean = sum / static_cast<double>(e.n_used);
    double ss = 0.0;
    for (const auto& s : samples)
      if (s.value) ss += (*s.value - e.mean) * (*s.value - e.mean);
    if (e.n_used > 1)
      e.stderr_ = std::sqrt(ss / static_cast<double>(e.n_used - 1) / static_cast<double>(e.n_used));
  }
  e.censored_fraction = e.n > 0 ? static_cast<double>(e.n_censored_first) / static_cast<double>(e.n) : 0.0;
  return e;
}

}  // namespace lorentz_fick
