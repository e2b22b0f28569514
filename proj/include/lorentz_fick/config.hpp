#pragma once

// Experiment configuration: a JSON document with one object per concern.
//
//   {
//     "params":      {"epsilon", "alpha", "lambda", "mu", "L", "rho1", "rho2"},
//     "potential":   {"profile": "quartic_bump" | "wendland", "height"},
//     "grid":        {"n_x", "n_theta", "backend", "interpolation", "kernel_samples"},
//     "sampler":     {"n_samples", "t_cap", "dt", "max_renewals", "points": [[x1, theta], ...]},
//     "conventions": {"D": "component_normalized" | "paper_literal",
//                     "landau_coefficient": "table_B" | "grazing_limit_B" | "half_mu"},
//     "sweep":       {"pair", "epsilons", "deltas", "delta"},
//     "fick":        {"source": "landau" | "boltzmann", "flux_relative", "flux_spread", "residual_relative"},
//     "table_points", "seed", "workers", "output_dir", "debug_trajectories"
//   }
//
// Every key is optional; absent keys take the defaults below. Unknown keys are
// rejected so that typos do not silently fall back to defaults.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "error.hpp"
#include "grid_solver.hpp"
#include "kinetic_sim.hpp"
#include "params.hpp"
#include "scattering.hpp"

namespace lorentz_fick {

using json = nlohmann::json;

struct PotentialSpec {
  std::string profile = "quartic_bump";
  double height = 1.0;

  RadialPotential build() const { return RadialPotential::by_name(profile, height); }
};

struct GridSpec {
  std::size_t n_x = 400;
  std::size_t n_theta = 128;
  SolverBackend backend = SolverBackend::direct;
  AngularInterpolation interpolation = AngularInterpolation::linear;
  std::size_t kernel_samples = 20000;

  SolverOptions solver_options() const {
    SolverOptions o;
    o.backend = backend;
    o.interpolation = interpolation;
    o.kernel_samples = kernel_samples;
    return o;
  }
};

struct SamplerSpec {
  std::size_t n_samples = 10000;
  double t_cap = 0.0;  // 0: 10 eps^{-lambda} L
  double dt = 0.0;     // 0: largest admissible Landau step
  int max_renewals = 10;
  std::vector<std::pair<double, double>> points{{0.5, 0.0}, {0.5, 0.7853981633974483}, {0.25, 3.141592653589793}};
};

struct SweepSpec {
  LevelPair pair = LevelPair::boltzmann_landau;
  std::vector<double> epsilons{0.1, 0.05, 0.025};
  std::vector<double> deltas{0.2, 0.1, 0.05};
  double delta = 0.2;  // fixed delta for the epsilon sweeps
};

struct FickSpec {
  GeneratorKind source = GeneratorKind::landau;
  FickTolerances tolerances{};
};

struct ExperimentConfig {
  KineticParams params{};
  PotentialSpec potential{};
  GridSpec grid{};
  SamplerSpec sampler{};
  DConvention d_convention = DConvention::component_normalized;
  LandauCoefficient landau_coefficient = LandauCoefficient::table_B;
  SweepSpec sweep{};
  FickSpec fick{};
  std::size_t table_points = 1025;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string output_dir = "out";
  bool debug_trajectories = false;

  void validate() const;
};

namespace detail {

inline std::string backend_name(SolverBackend b) { return to_string(b); }
inline SolverBackend backend_from(const std::string& s, const std::string& path) {
  if (s == "direct") return SolverBackend::direct;
  if (s == "source_iteration") return SolverBackend::source_iteration;
  throw ConfigError(path, "expected \"direct\" or \"source_iteration\"");
}
inline std::string interp_name(AngularInterpolation a) { return a == AngularInterpolation::linear ? "linear" : "cubic"; }
inline AngularInterpolation interp_from(const std::string& s, const std::string& path) {
  if (s == "linear") return AngularInterpolation::linear;
  if (s == "cubic") return AngularInterpolation::cubic;
  throw ConfigError(path, "expected \"linear\" or \"cubic\"");
}

// Reads key `k` of object `j` into `out` when present, with a typed error.
template <class T>
void read(const json& j, const char* k, T& out, const std::string& path) {
  const auto it = j.find(k);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path.empty() ? std::string(k) : path + "." + k, std::string("wrong type: ") + e.what());
  }
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(path.empty() ? k : path + "." + k, "unknown key");
}

template <class E, class F>
E read_enum(const json& j, const char* k, E fallback, const std::string& path, F&& parse) {
  std::string s;
  read(j, k, s, path);
  if (s.empty()) return fallback;
  try {
    return parse(s);
  } catch (const DomainError& e) {
    throw ConfigError(path + "." + k, e.what());
  }
}

}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
  json points = json::array();
  for (const auto& [x, t] : c.sampler.points) points.push_back({x, t});
  json j = {
      {"params",
       {{"epsilon", c.params.epsilon},
        {"alpha", c.params.alpha},
        {"lambda", c.params.lambda},
        {"mu", c.params.mu},
        {"L", c.params.L},
        {"rho1", c.params.rho1},
        {"rho2", c.params.rho2}}},
      {"potential", {{"profile", c.potential.profile}, {"height", c.potential.height}}},
      {"grid",
       {{"n_x", c.grid.n_x},
        {"n_theta", c.grid.n_theta},
        {"backend", detail::backend_name(c.grid.backend)},
        {"interpolation", detail::interp_name(c.grid.interpolation)},
        {"kernel_samples", c.grid.kernel_samples}}},
      {"sampler",
       {{"n_samples", c.sampler.n_samples},
        {"t_cap", c.sampler.t_cap},
        {"dt", c.sampler.dt},
        {"max_renewals", c.sampler.max_renewals},
        {"points", points}}},
      {"conventions", {{"D", to_string(c.d_convention)}, {"landau_coefficient", to_string(c.landau_coefficient)}}},
      {"sweep",
       {{"pair", to_string(c.sweep.pair)},
        {"epsilons", c.sweep.epsilons},
        {"deltas", c.sweep.deltas},
        {"delta", c.sweep.delta}}},
      {"fick",
       {{"source", to_string(c.fick.source)},
        {"flux_relative", c.fick.tolerances.flux_relative},
        {"flux_spread", c.fick.tolerances.flux_spread},
        {"residual_relative", c.fick.tolerances.residual_relative}}},
      {"table_points", c.table_points},
      {"workers", c.workers},
      {"output_dir", c.output_dir},
      {"debug_trajectories", c.debug_trajectories},
  };
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  using detail::read;
  ExperimentConfig c;
  detail::check_keys(j,
                     {"params", "potential", "grid", "sampler", "conventions", "sweep", "fick", "table_points", "seed",
                      "workers", "output_dir", "debug_trajectories"},
                     "");
  if (const auto it = j.find("params"); it != j.end()) {
    detail::check_keys(*it, {"epsilon", "alpha", "lambda", "mu", "L", "rho1", "rho2"}, "params");
    read(*it, "epsilon", c.params.epsilon, "params");
    read(*it, "alpha", c.params.alpha, "params");
    read(*it, "lambda", c.params.lambda, "params");
    read(*it, "mu", c.params.mu, "params");
    read(*it, "L", c.params.L, "params");
    read(*it, "rho1", c.params.rho1, "params");
    read(*it, "rho2", c.params.rho2, "params");
  }
  if (const auto it = j.find("potential"); it != j.end()) {
    detail::check_keys(*it, {"profile", "height"}, "potential");
    read(*it, "profile", c.potential.profile, "potential");
    read(*it, "height", c.potential.height, "potential");
  }
  if (const auto it = j.find("grid"); it != j.end()) {
    detail::check_keys(*it, {"n_x", "n_theta", "backend", "interpolation", "kernel_samples"}, "grid");
    read(*it, "n_x", c.grid.n_x, "grid");
    read(*it, "n_theta", c.grid.n_theta, "grid");
    read(*it, "kernel_samples", c.grid.kernel_samples, "grid");
    std::string s;
    read(*it, "backend", s, "grid");
    if (!s.empty()) c.grid.backend = detail::backend_from(s, "grid.backend");
    s.clear();
    read(*it, "interpolation", s, "grid");
    if (!s.empty()) c.grid.interpolation = detail::interp_from(s, "grid.interpolation");
  }
  if (const auto it = j.find("sampler"); it != j.end()) {
    detail::check_keys(*it, {"n_samples", "t_cap", "dt", "max_renewals", "points"}, "sampler");
    read(*it, "n_samples", c.sampler.n_samples, "sampler");
    read(*it, "t_cap", c.sampler.t_cap, "sampler");
    read(*it, "dt", c.sampler.dt, "sampler");
    read(*it, "max_renewals", c.sampler.max_renewals, "sampler");
    if (const auto p = it->find("points"); p != it->end()) {
      if (!p->is_array()) throw ConfigError("sampler.points", "expected an array of [x1, theta] pairs");
      c.sampler.points.clear();
      for (std::size_t k = 0; k < p->size(); ++k) {
        const json& e = (*p)[k];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
          throw ConfigError("sampler.points[" + std::to_string(k) + "]", "expected [x1, theta]");
        c.sampler.points.emplace_back(e[0].get<double>(), e[1].get<double>());
      }
    }
  }
  if (const auto it = j.find("conventions"); it != j.end()) {
    detail::check_keys(*it, {"D", "landau_coefficient"}, "conventions");
    c.d_convention = detail::read_enum(*it, "D", c.d_convention, "conventions", d_convention_from_string);
    c.landau_coefficient =
        detail::read_enum(*it, "landau_coefficient", c.landau_coefficient, "conventions", landau_coefficient_from_string);
  }
  if (const auto it = j.find("sweep"); it != j.end()) {
    detail::check_keys(*it, {"pair", "epsilons", "deltas", "delta"}, "sweep");
    c.sweep.pair = detail::read_enum(*it, "pair", c.sweep.pair, "sweep", level_pair_from_string);
    read(*it, "epsilons", c.sweep.epsilons, "sweep");
    read(*it, "deltas", c.sweep.deltas, "sweep");
    read(*it, "delta", c.sweep.delta, "sweep");
  }
  if (const auto it = j.find("fick"); it != j.end()) {
    detail::check_keys(*it, {"source", "flux_relative", "flux_spread", "residual_relative"}, "fick");
    std::string s;
    read(*it, "source", s, "fick");
    if (s == "boltzmann")
      c.fick.source = GeneratorKind::boltzmann;
    else if (s == "landau" || s.empty())
      c.fick.source = GeneratorKind::landau;
    else
      throw ConfigError("fick.source", "expected \"landau\" or \"boltzmann\"");
    read(*it, "flux_relative", c.fick.tolerances.flux_relative, "fick");
    read(*it, "flux_spread", c.fick.tolerances.flux_spread, "fick");
    read(*it, "residual_relative", c.fick.tolerances.residual_relative, "fick");
  }
  read(j, "table_points", c.table_points, "");
  read(j, "workers", c.workers, "");
  read(j, "output_dir", c.output_dir, "");
  read(j, "debug_trajectories", c.debug_trajectories, "");
  if (const auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw ConfigError("seed", "expected a non-negative 64-bit integer");
    c.seed = it->get<std::uint64_t>();
  }
  c.validate();
  return c;
}

inline void ExperimentConfig::validate() const {
  auto positive = [](double v, const char* path) {
    if (!(v > 0.0)) throw ConfigError(path, "must be > 0");
  };
  positive(params.epsilon, "params.epsilon");
  if (!(params.alpha > 0.0 && params.alpha < 0.5)) throw ConfigError("params.alpha", "must lie in (0, 1/2)");
  if (!(params.lambda >= 0.0)) throw ConfigError("params.lambda", "must be >= 0");
  positive(params.mu, "params.mu");
  positive(params.L, "params.L");
  positive(params.rho1, "params.rho1");
  positive(params.rho2, "params.rho2");
  positive(potential.height, "potential.height");
  try {
    (void)potential.build();
  } catch (const Error& e) {
    throw ConfigError("potential.profile", e.what());
  }
  if (grid.n_x < 8) throw ConfigError("grid.n_x", "must be >= 8");
  if (grid.n_theta < 4 || grid.n_theta % 2 != 0) throw ConfigError("grid.n_theta", "must be even and >= 4");
  if (grid.kernel_samples < 2) throw ConfigError("grid.kernel_samples", "must be >= 2");
  if (sampler.n_samples < 1) throw ConfigError("sampler.n_samples", "must be >= 1");
  if (!(sampler.t_cap >= 0.0)) throw ConfigError("sampler.t_cap", "must be >= 0 (0 selects the default)");
  if (!(sampler.dt >= 0.0)) throw ConfigError("sampler.dt", "must be >= 0 (0 selects the default)");
  if (sampler.max_renewals < 0) throw ConfigError("sampler.max_renewals", "must be >= 0");
  for (std::size_t k = 0; k < sampler.points.size(); ++k)
    if (!(sampler.points[k].first > 0.0 && sampler.points[k].first < params.L))
      throw ConfigError("sampler.points[" + std::to_string(k) + "]", "x1 must lie in (0, L)");
  if (table_points < 16) throw ConfigError("table_points", "must be >= 16");
  for (std::size_t k = 0; k < sweep.epsilons.size(); ++k)
    if (!(sweep.epsilons[k] > 0.0 && sweep.epsilons[k] < 1.0))
      throw ConfigError("sweep.epsilons[" + std::to_string(k) + "]", "must lie in (0, 1)");
  for (std::size_t k = 0; k < sweep.deltas.size(); ++k)
    if (!(sweep.deltas[k] > 0.0 && sweep.deltas[k] <= 1.0))
      throw ConfigError("sweep.deltas[" + std::to_string(k) + "]", "must lie in (0, 1]");
  if (!(sweep.delta > 0.0 && sweep.delta <= 1.0)) throw ConfigError("sweep.delta", "must lie in (0, 1]");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// 64-bit FNV-1a of the canonical serialization.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace lorentz_fick
