#pragma once

// JSON views of results, and small helpers for the output directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "analysis.hpp"
#include "estimate.hpp"
#include "grid_solver.hpp"
#include "params.hpp"
#include "scattering.hpp"

namespace lorentz_fick {

using json = nlohmann::json;

inline json to_json(const KineticParams& p) {
  json j = {{"epsilon", p.epsilon}, {"alpha", p.alpha}, {"lambda", p.lambda}, {"mu", p.mu},
            {"L", p.L},             {"rho1", p.rho1},   {"rho2", p.rho2},     {"delta", p.delta()},
            {"mu_eps", p.mu_eps()}, {"jump_rate", p.jump_rate()}};
  j["regime"] = p.regime().labels();
  return j;
}

inline json to_json(const RegimeFlags& f) {
  return {{"alpha_in_proven_range", f.alpha_in_proven_range},
          {"assumption1", f.assumption1},
          {"theorem1_only", f.theorem1_only},
          {"gamma_assumption", f.gamma_assumption},
          {"gamma_propositions", f.gamma_propositions},
          {"labels", f.labels()}};
}

/// Estimate record: {x, v, mean, stderr, n, censored_fraction, params, kind}.
inline json estimate_json(const Estimate& e, Vec2 x, Vec2 v, const KineticParams& p, const std::string& kind) {
  return {{"x", {x.x, x.y}},
          {"v", {v.x, v.y}},
          {"mean", e.mean},
          {"stderr", e.stderr()},
          {"n", e.n},
          {"n_used", e.n_used},
          {"n_dropped", e.n_dropped},
          {"censored_fraction", e.censored_fraction},
          {"params", to_json(p)},
          {"kind", kind}};
}

inline json to_json(const SolverDiagnostics& d) {
  return {{"backend", d.backend}, {"iterations", d.iterations}, {"residual_max", d.residual_max}};
}

inline json to_json(const FickReport& r) {
  return {{"D", r.D_used},
          {"J_mean", r.J_mean},
          {"J_expected", r.J_expected},
          {"flux_error", r.flux_error},
          {"flux_spread", r.flux_spread},
          {"gradient", r.gradient},
          {"D_effective", r.D_effective},
          {"residual", r.residual},
          {"residual_modes", r.residual_modes},
          {"flux_pass", r.flux_pass},
          {"spread_pass", r.spread_pass},
          {"residual_pass", r.residual_pass},
          {"pass", r.pass}};
}

inline json to_json(const PowerFit& f) {
  return {{"exponent", f.exponent}, {"stderr", f.stderr_}, {"prefactor", f.prefactor}, {"valid", f.valid}};
}

inline json to_json(const ConvergenceTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"epsilon", r.epsilon}, {"delta", r.delta}, {"distance", r.distance}, {"err", r.error}});
  return {{"pair", to_string(t.pair)},
          {"swept", t.swept},
          {"rows", rows},
          {"fit", to_json(t.fit)},
          {"reference_exponent", t.reference_exponent},
          {"reference_exponent_alt", t.reference_exponent_alt},
          {"strictly_decreasing", t.strictly_decreasing},
          {"resolved", t.resolved},
          {"separated", t.separated}};
}

inline json to_json(const AngleBoundReport& r) {
  return {{"max_angle", r.lhs_max},
          {"first_order", r.first_order},
          {"c_tilde", r.c_tilde},
          {"bound", r.rhs},
          {"margin", r.margin},
          {"pass", r.pass}};
}

inline json to_json(const HilbertReport& h) {
  return {{"remainder_norm", h.remainder_norm}, {"expected_amplitude", h.expected_amplitude}};
}

/// Output directory: LORENTZ_FICK_OUT when set, else the given fallback.
inline std::filesystem::path output_directory(const std::string& fallback) {
  if (const char* env = std::getenv("LORENTZ_FICK_OUT"); env && *env) return env;
  return fallback;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& w) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  w(os);
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

}  // namespace lorentz_fick
