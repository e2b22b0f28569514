// lorentz-fick: command-line driver for the scattering, sampling, grid and
// acceptance experiments. Every run writes summary.json (version, config
// hash, seed, results) and CSV files into the output directory.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <lorentz_fick/acceptance.hpp>
#include <lorentz_fick/analysis.hpp>
#include <lorentz_fick/config.hpp>
#include <lorentz_fick/grid_solver.hpp>
#include <lorentz_fick/io.hpp>
#include <lorentz_fick/kinetic_sim.hpp>
#include <lorentz_fick/micro_sim.hpp>
#include <lorentz_fick/scattering.hpp>

namespace fs = std::filesystem;
using namespace lorentz_fick;

namespace {

struct Run {
  ExperimentConfig cfg;
  std::uint64_t seed = 0;
  fs::path out;
  json summary;
};

double landau_coef(const Run& run) {
  return landau_diffusion(run.cfg.params, run.cfg.potential.build(), run.cfg.landau_coefficient, run.cfg.table_points);
}

ScatteringTable table_for(const Run& run) {
  return ScatteringTable::build(run.cfg.potential.build(), run.cfg.params.epsilon, run.cfg.params.alpha,
                                run.cfg.table_points);
}

void write_estimates(const Run& run, const std::string& kind, const std::vector<Estimate>& est, json& results) {
  const auto& pts = run.cfg.sampler.points;
  write_file(run.out / (kind + "_estimates.csv"), [&](std::ostream& os) {
    os.precision(17);
    os << "x1,theta,mean,stderr,n,censored_fraction\n";
    for (std::size_t k = 0; k < est.size(); ++k)
      os << pts[k].first << ',' << pts[k].second << ',' << est[k].mean << ',' << est[k].stderr() << ','
         << est[k].n << ',' << est[k].censored_fraction << '\n';
  });
  json arr = json::array();
  for (std::size_t k = 0; k < est.size(); ++k)
    arr.push_back(estimate_json(est[k], {pts[k].first, 0.0}, unit_from_angle(pts[k].second), run.cfg.params, kind));
  results["estimates"] = arr;
  for (std::size_t k = 0; k < est.size(); ++k)
    std::cout << kind << " g(" << pts[k].first << ", " << pts[k].second << ") = " << est[k].mean << " +- "
              << est[k].stderr() << " (censored " << est[k].censored_fraction << ")\n";
}

int cmd_scatter(Run& run) {
  const auto pot = run.cfg.potential.build();
  const auto table = table_for(run);
  write_file(run.out / "scattering_table.csv", [&](std::ostream& os) { table.write_csv(os); });
  const auto study = angle_bound_study(pot, run.cfg.params.alpha, run.cfg.sweep.epsilons, run.cfg.table_points);
  json reports = json::array();
  for (const auto& r : study.reports) reports.push_back(to_json(r));
  const double B = landau_coefficient_B(table, run.cfg.params.mu);
  const double B0 = grazing_limit_B(pot, run.cfg.params.mu);
  run.summary["results"] = {{"coupling", table.coupling()},
                            {"max_abs_angle", table.max_abs_angle()},
                            {"reflects_head_on", reflects_head_on(pot, table.coupling())},
                            {"landau_coefficient_B", B},
                            {"grazing_limit_B", B0},
                            {"angle_bound", reports},
                            {"angle_bound_pass", study.all_pass},
                            {"c_tilde", study.c_tilde}};
  std::cout << "coupling " << table.coupling() << ", max |theta| " << table.max_abs_angle() << ", B " << B
            << ", grazing-limit B " << B0 << ", angle bound " << (study.all_pass ? "passes" : "fails") << '\n';
  return 0;
}

int cmd_micro(Run& run) {
  MicroRunConfig mc;
  mc.potential = run.cfg.potential.build();
  mc.n_samples = run.cfg.sampler.n_samples;
  mc.t_cap = run.cfg.sampler.t_cap;
  mc.workers = run.cfg.workers;
  mc.options.max_renewals = run.cfg.sampler.max_renewals;
  std::vector<Estimate> est;
  for (std::size_t k = 0; k < run.cfg.sampler.points.size(); ++k) {
    const auto [x1, theta] = run.cfg.sampler.points[k];
    mc.seed = derive_seed(run.seed, 1, k);
    est.push_back(stationary_estimate_micro({x1, 0.0}, unit_from_angle(theta), run.cfg.params, mc));
  }
  json results;
  write_estimates(run, "micro", est, results);
  if (run.cfg.debug_trajectories && !run.cfg.sampler.points.empty()) {
    const auto field = ObstacleField::from_params(run.cfg.params, derive_seed(run.seed, 2, 0));
    const MicroDynamics dyn(field, mc.potential, run.cfg.params.coupling(), mc.options);
    const auto [x1, theta] = run.cfg.sampler.points.front();
    std::vector<ParticleState> trace;
    const double t_cap = mc.t_cap > 0.0 ? mc.t_cap : run.cfg.params.default_t_cap();
    const auto rec = dyn.backward_exit({x1, 0.0}, unit_from_angle(theta), t_cap, run.cfg.params.rho1,
                                       run.cfg.params.rho2, &trace);
    write_file(run.out / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, trace); });
    double y_lo = 0.0, y_hi = 0.0;
    for (const auto& s : trace) {
      y_lo = std::min(y_lo, s.x.y);
      y_hi = std::max(y_hi, s.x.y);
    }
    write_file(run.out / "obstacles.csv", [&](std::ostream& os) { field.write_window_csv(os, y_lo - 0.1, y_hi + 0.1); });
    results["trajectory"] = {{"exit", to_string(rec.kind)}, {"hitting_time", rec.hitting_time}, {"states", trace.size()}};
  }
  run.summary["results"] = results;
  return 0;
}

int cmd_kinetic(Run& run, GeneratorKind kind) {
  const auto& p = run.cfg.params;
  const KineticModel model = kind == GeneratorKind::boltzmann ? KineticModel::boltzmann(p, table_for(run))
                                                              : KineticModel::landau(p, landau_coef(run), run.cfg.sampler.dt);
  KineticRunConfig kc;
  kc.n_samples = run.cfg.sampler.n_samples;
  kc.t_cap = run.cfg.sampler.t_cap;
  kc.workers = run.cfg.workers;
  kc.max_renewals = run.cfg.sampler.max_renewals;
  std::vector<Estimate> est;
  for (std::size_t k = 0; k < run.cfg.sampler.points.size(); ++k) {
    const auto [x1, theta] = run.cfg.sampler.points[k];
    kc.seed = derive_seed(run.seed, 3, k);
    est.push_back(stationary_estimate_kinetic(model, {x1, 0.0}, theta, kc));
  }
  json results;
  write_estimates(run, to_string(kind), est, results);
  results["generator"] = {{"rate", model.generator().rate},
                          {"diffusion", model.generator().diffusion},
                          {"time_scale", model.generator().time_scale},
                          {"dt", model.dt()}};
  run.summary["results"] = results;
  return 0;
}

DiscreteField solve_grid(const Run& run, GeneratorKind kind) {
  const auto& p = run.cfg.params;
  const auto opt = run.cfg.grid.solver_options();
  if (kind == GeneratorKind::boltzmann) return solve_boltzmann(p, run.cfg.grid.n_x, run.cfg.grid.n_theta, table_for(run), opt);
  return solve_landau(Grid{run.cfg.grid.n_x, run.cfg.grid.n_theta, p.L, p.delta()}, p.rho1, p.rho2, landau_coef(run), opt);
}

int cmd_grid(Run& run) {
  json results;
  for (GeneratorKind kind : {GeneratorKind::landau, GeneratorKind::boltzmann}) {
    const auto f = solve_grid(run, kind);
    const std::string name = to_string(kind);
    write_file(run.out / (name + "_field.csv"), [&](std::ostream& os) { f.write_csv(os); });
    write_file(run.out / (name + "_profile.csv"), [&](std::ostream& os) { f.write_profile_csv(os); });
    const auto h = hilbert_residual(f);
    results[name] = {{"diagnostics", to_json(f.diagnostics)},
                     {"coefficient", f.coefficient},
                     {"min", f.min_value()},
                     {"max", f.max_value()},
                     {"linear_profile_distance", linear_profile_distance(f)},
                     {"hilbert", to_json(h)}};
    std::cout << name << ": " << f.diagnostics.backend << " solve, residual " << f.diagnostics.residual_max
              << ", sup|rho - linear| " << linear_profile_distance(f) << '\n';
  }
  run.summary["results"] = results;
  return 0;
}

int cmd_fick(Run& run) {
  const auto f = solve_grid(run, run.cfg.fick.source);
  // the Landau generator coef * Laplacian corresponds to mu = 2 coef
  const double coef = run.cfg.fick.source == GeneratorKind::landau ? f.coefficient : landau_coef(run);
  const double D = green_kubo_D(2.0 * coef, run.cfg.d_convention);
  const auto profile = profile_from_field(f);
  const auto rep = fick_check(profile, D, run.cfg.fick.tolerances);
  write_file(run.out / "profile.csv", [&](std::ostream& os) { profile.write_csv(os); });
  run.summary["results"] = to_json(rep);
  run.summary["results"]["source"] = to_string(run.cfg.fick.source);
  run.summary["results"]["convention"] = to_string(run.cfg.d_convention);
  std::cout << "J_mean " << rep.J_mean << " vs -D grad = " << rep.J_expected << " (D " << D << "), flux error "
            << rep.flux_error << ", spread " << rep.flux_spread << ", weak residual " << rep.residual << " -> "
            << (rep.pass ? "pass" : "fail") << '\n';
  return rep.pass ? 0 : 3;
}

int cmd_sweep(Run& run) {
  const auto& c = run.cfg;
  std::vector<KineticParams> regimes;
  if (c.sweep.pair == LevelPair::landau_linear) {
    for (double d : c.sweep.deltas) regimes.push_back(c.params.with_delta(d));
  } else {
    for (double eps : c.sweep.epsilons) {
      KineticParams p = c.params;
      p.epsilon = eps;
      regimes.push_back(c.sweep.pair == LevelPair::boltzmann_landau ? p.with_delta(c.sweep.delta) : p);
    }
  }
  StudyOptions so;
  so.potential = c.potential.build();
  so.n_x = c.grid.n_x;
  so.n_theta = c.grid.n_theta;
  so.table_points = c.table_points;
  so.landau_source = c.landau_coefficient;
  so.solver = c.grid.solver_options();
  so.n_samples = c.sampler.n_samples;
  so.seed = run.seed;
  so.workers = c.workers;
  const auto t = convergence_study(regimes, c.sweep.pair, so);
  write_file(run.out / "convergence.csv", [&](std::ostream& os) { t.write_csv(os); });
  run.summary["results"] = to_json(t);
  for (const auto& r : t.rows)
    std::cout << "eps " << r.epsilon << " delta " << r.delta << " distance " << r.distance << " +- " << r.error << '\n';
  std::cout << "fitted exponent " << t.fit.exponent << " +- " << t.fit.stderr_ << (t.resolved ? "" : " (unresolved)")
            << ", strictly decreasing: " << (t.strictly_decreasing ? "yes" : "no") << '\n';
  return 0;
}

int cmd_all(Run& run, const std::vector<int>& ids) {
  acceptance::Options opt;
  opt.seed = run.seed;
  opt.workers = run.cfg.workers;
  json results = json::array();
  bool all = true;
  for (int id : ids) {
    const auto r = acceptance::run(id, opt);
    std::cout << acceptance::line(r) << std::endl;
    results.push_back(acceptance::to_json(r));
    all = all && r.pass;
  }
  run.summary["results"] = results;
  run.summary["all_pass"] = all;
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lorentz gas to Fick's law: scattering, sampling, grid and acceptance experiments"};
  app.set_version_flag("--version", std::string(LORENTZ_FICK_VERSION));
  std::string command, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  app.add_option("command", command, "scatter | micro | boltzmann | landau | grid | fick | sweep | all")
      ->required()
      ->check(CLI::IsMember({"scatter", "micro", "boltzmann", "landau", "grid", "fick", "sweep", "all"}));
  app.add_option("--config", config_path, "experiment config (JSON); defaults apply when omitted");
  app.add_option("--seed", seed, "master seed; drawn at random and printed when omitted");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory (LORENTZ_FICK_OUT overrides)");
  app.add_option("--criteria", criteria, "acceptance criteria for `all`")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  try {
    Run run;
    if (!config_path.empty()) run.cfg = load_config(config_path);
    if (workers) run.cfg.workers = *workers;
    if (seed) {
      run.seed = *seed;
    } else if (run.cfg.seed) {
      run.seed = *run.cfg.seed;
    } else {
      run.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
      std::cout << "seed " << run.seed << " (drawn)\n";
    }
    run.cfg.seed = run.seed;
    run.out = output_directory(out_dir.empty() ? run.cfg.output_dir : out_dir);
    fs::create_directories(run.out);
    run.summary = {{"version", LORENTZ_FICK_VERSION},
                   {"command", command},
                   {"config_hash", hex64(config_hash(run.cfg))},
                   {"seed", run.seed},
                   {"config", to_json(run.cfg)},
                   {"params", to_json(run.cfg.params)}};

    int code = 0;
    if (command == "scatter") code = cmd_scatter(run);
    else if (command == "micro") code = cmd_micro(run);
    else if (command == "boltzmann") code = cmd_kinetic(run, GeneratorKind::boltzmann);
    else if (command == "landau") code = cmd_kinetic(run, GeneratorKind::landau);
    else if (command == "grid") code = cmd_grid(run);
    else if (command == "fick") code = cmd_fick(run);
    else if (command == "sweep") code = cmd_sweep(run);
    else code = cmd_all(run, criteria);

    write_json(run.out / "summary.json", run.summary);
    std::cout << "wrote " << (run.out / "summary.json").string() << '\n';
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
