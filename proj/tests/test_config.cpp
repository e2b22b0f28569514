#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include <lorentz_fick/config.hpp>
#include <lorentz_fick/io.hpp>

using namespace lorentz_fick;
namespace fs = std::filesystem;

namespace {

std::string error_path(const json& j) {
  try {
    (void)config_from_json(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto c = config_from_json(json::object());
  EXPECT_EQ(c.params.epsilon, KineticParams{}.epsilon);
  EXPECT_EQ(c.grid.n_x, 400u);
  EXPECT_EQ(c.landau_coefficient, LandauCoefficient::table_B);
  EXPECT_EQ(c.d_convention, DConvention::component_normalized);
  EXPECT_FALSE(c.seed.has_value());
}

TEST(Config, RoundTripPreservesEveryField) {
  ExperimentConfig c;
  c.params.epsilon = 0.025;
  c.params.rho2 = 3.0;
  c.potential.profile = "wendland";
  c.grid.n_theta = 64;
  c.grid.backend = SolverBackend::source_iteration;
  c.grid.interpolation = AngularInterpolation::cubic;
  c.sampler.points = {{0.3, 1.0}};
  c.d_convention = DConvention::paper_literal;
  c.landau_coefficient = LandauCoefficient::half_mu;
  c.sweep.pair = LevelPair::landau_linear;
  c.fick.source = GeneratorKind::boltzmann;
  c.fick.tolerances.flux_relative = 0.05;
  c.seed = 123456789012345ULL;
  c.workers = 3;
  c.debug_trajectories = true;
  const auto d = config_from_json(to_json(c));
  EXPECT_EQ(to_json(d), to_json(c));
  EXPECT_EQ(config_hash(d), config_hash(c));
  EXPECT_EQ(*d.seed, 123456789012345ULL);
}

TEST(Config, ErrorsNameTheOffendingKey) {
  EXPECT_EQ(error_path(json::parse(R"({"params": {"epsilon": 0.1, "eps": 0.2}})")), "params.eps");
  EXPECT_EQ(error_path(json::parse(R"({"colour": 1})")), "colour");
  EXPECT_EQ(error_path(json::parse(R"({"grid": {"n_x": "many"}})")), "grid.n_x");
  EXPECT_EQ(error_path(json::parse(R"({"table_points": "x"})")), "table_points");
  EXPECT_EQ(error_path(json::parse(R"({"params": {"alpha": 0.7}})")), "params.alpha");
  EXPECT_EQ(error_path(json::parse(R"({"grid": {"n_theta": 33}})")), "grid.n_theta");
  EXPECT_EQ(error_path(json::parse(R"({"conventions": {"D": "physical"}})")), "conventions.D");
  EXPECT_EQ(error_path(json::parse(R"({"sampler": {"points": [[1.5, 0.0]]}})")), "sampler.points[0]");
  EXPECT_EQ(error_path(json::parse(R"({"potential": {"profile": "coulomb"}})")), "potential.profile");
  EXPECT_EQ(error_path(json::parse(R"({"seed": -4})")), "seed");
  EXPECT_EQ(error_path(json::parse(R"({"fick": {"source": "micro"}})")), "fick.source");
}

TEST(Config, HashTracksContent) {
  ExperimentConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.params.mu = 2.0;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Config, ShippedConfigsParse) {
  const fs::path dir = fs::path(LORENTZ_FICK_SOURCE_DIR) / "configs";
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW((void)load_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 3u);
  EXPECT_THROW((void)load_config((fs::path(LORENTZ_FICK_SOURCE_DIR) / "tests/data/bad_config.json").string()), ConfigError);
  EXPECT_THROW((void)load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Io, OutputDirectoryOverrideAndWriters) {
  ::unsetenv("LORENTZ_FICK_OUT");
  EXPECT_EQ(output_directory("out/a"), fs::path("out/a"));
  const fs::path tmp = fs::temp_directory_path() / "lorentz_fick_io_test";
  ::setenv("LORENTZ_FICK_OUT", tmp.c_str(), 1);
  EXPECT_EQ(output_directory("out/a"), tmp);
  ::unsetenv("LORENTZ_FICK_OUT");
  write_json(tmp / "nested" / "x.json", json{{"k", 1}});
  std::ifstream in(tmp / "nested" / "x.json");
  EXPECT_EQ(json::parse(in)["k"], 1);
  fs::remove_all(tmp);
}

TEST(Io, ParamsJsonCarriesDerivedScales) {
  KineticParams p;
  const json j = to_json(p);
  EXPECT_EQ(j["epsilon"], p.epsilon);
  EXPECT_TRUE(j.contains("delta"));
  EXPECT_TRUE(j.contains("regime"));
}
