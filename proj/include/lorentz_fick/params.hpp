#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"

namespace lorentz_fick {

/// Boundary data and scale separation of a stationary slab problem on (0, L).
/// `delta` multiplies transport relative to collisions (delta = eps^lambda).
struct SlabProblem {
  double L = 1.0;
  double rho1 = 1.0;
  double rho2 = 2.0;
  double delta = 1.0;

  void validate() const {
    if (!(L > 0.0)) throw DomainError("slab width L must be > 0");
    if (!(delta > 0.0)) throw DomainError("delta must be > 0");
    if (!(rho1 >= 0.0) || !(rho2 >= 0.0)) throw DomainError("reservoir densities must be >= 0");
  }

  double rho_min() const { return std::min(rho1, rho2); }
  double rho_max() const { return std::max(rho1, rho2); }
};

/// Which proven-convergence windows a parameter set falls in.
struct RegimeFlags {
  bool alpha_in_proven_range = false;  // 0 < alpha < 1/8
  bool assumption1 = false;            // lambda < (1 - 8 alpha) / 8
  bool theorem1_only = false;          // lambda < (1 - 8 alpha) / 7
  double gamma_assumption = 0.0;       // 1 - 8 (alpha + lambda/2)
  double gamma_propositions = 0.0;     // 1 - 8 (alpha - lambda/2)

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    if (!alpha_in_proven_range) out.emplace_back("alpha-outside-(0,1/8)");
    if (assumption1)
      out.emplace_back("assumption-1");
    else if (theorem1_only)
      out.emplace_back("theorem-1-only");
    else
      out.emplace_back("outside-proven-regime");
    return out;
  }
};

/// Physical regime of the weak-coupling Lorentz gas in the slab.
struct KineticParams {
  double epsilon = 0.05;
  double alpha = 0.1;
  double lambda = 0.05;
  double mu = 1.0;
  double L = 1.0;
  double rho1 = 1.0;
  double rho2 = 2.0;

  void validate() const {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
    if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("alpha must lie in (0, 1/2)");
    if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
    if (!(mu >= 0.0)) throw DomainError("mu must be >= 0");
    if (!(L > 0.0)) throw DomainError("L must be > 0");
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw DomainError("rho1 and rho2 must be > 0");
  }

  /// Scatterer intensity eps^{-(2 alpha + lambda + 1)} mu.
  double mu_eps() const { return std::pow(epsilon, -(2.0 * alpha + lambda + 1.0)) * mu; }
  /// Total Boltzmann jump rate 2 mu_eps eps = 2 mu eps^{-2 alpha - lambda}.
  double jump_rate() const { return 2.0 * mu * std::pow(epsilon, -2.0 * alpha - lambda); }
  double time_scale() const { return std::pow(epsilon, -lambda); }
  double delta() const { return std::pow(epsilon, lambda); }
  double coupling() const { return std::pow(epsilon, alpha); }
  /// Default backward horizon 10 eps^{-lambda} L.
  double default_t_cap() const { return 10.0 * time_scale() * L; }

  SlabProblem slab() const { return {L, rho1, rho2, delta()}; }

  RegimeFlags regime() const {
    RegimeFlags f;
    f.alpha_in_proven_range = alpha > 0.0 && alpha < 0.125;
    f.assumption1 = lambda < (1.0 - 8.0 * alpha) / 8.0;
    f.theorem1_only = lambda < (1.0 - 8.0 * alpha) / 7.0;
    f.gamma_assumption = 1.0 - 8.0 * (alpha + lambda / 2.0);
    f.gamma_propositions = 1.0 - 8.0 * (alpha - lambda / 2.0);
    return f;
  }

  /// Same regime with lambda chosen so that eps^lambda equals `delta`.
  KineticParams with_delta(double delta) const {
    if (!(delta > 0.0 && delta <= 1.0) || !(epsilon < 1.0))
      throw DomainError("with_delta needs 0 < delta <= 1 and epsilon < 1");
    KineticParams p = *this;
    p.lambda = std::log(delta) / std::log(epsilon);
    return p;
  }
};

}  // namespace lorentz_fick
