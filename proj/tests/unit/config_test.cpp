#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "abe/config.hpp"
#include "abe/error.hpp"

using namespace abe;

TEST_SUITE("config") {
  TEST_CASE("a file with only velocities takes every default") {
    const RunConfig cfg = parse_config_string("[sweep]\nvelocities = 4, 8, 16, 32\n");
    CHECK(cfg.sweep.velocities == std::vector<double>{4, 8, 16, 32});
    CHECK(cfg.geometry.a1 == 6.0);
    CHECK(cfg.grid.points2 == 512);
    CHECK(cfg.envelope_radius == 2.5);
    CHECK(cfg.solver.comoving);
    CHECK(cfg.background.strength == 0.1);
    const auto j = to_json(cfg);
    for (const char* section : {"physics", "geometry", "grid", "pulse", "background", "envelope", "solver", "sweep",
                                "output", "leakage", "cutoff"})
      CHECK(j.contains(section));
    CHECK(j["solver"]["dt_factor"] == 0.05);
    CHECK(j["physics"]["hbar"] == 1.0);
  }

  TEST_CASE("R = L1 - L0 is rejected") {
    CHECK_THROWS_WITH_AS(parse_config_string("[envelope]\nradius = 3\n"), doctest::Contains("R < L1 - L0 violated: 3 >= 3"),
                         ConfigError);
    CHECK_NOTHROW(parse_config_string("[envelope]\nradius = 2.9\n"));
  }

  TEST_CASE("rho - mu <= 1 is rejected") {
    CHECK_THROWS_WITH_AS(parse_config_string("[sweep]\nbg_mode = rho_one\nrho = 1\nmu = 0.5\n"),
                         doctest::Contains("rho - mu > 1"), ConfigError);
    // Even with the background off the exponents must be admissible.
    CHECK_THROWS_AS(parse_config_string("[sweep]\nrho = 1\nmu = 0.5\n"), ConfigError);
  }

  TEST_CASE("bg_mode supplies decay defaults that explicit keys override") {
    RunConfig cfg = parse_config_string("[sweep]\nbg_mode = rho_frac\n");
    CHECK(cfg.sweep.rho == 0.5);
    CHECK(cfg.sweep.mu == -0.75);
    cfg = parse_config_string("[sweep]\nbg_mode = rho_frac\nmu = -1\n");
    CHECK(cfg.sweep.mu == -1.0);
    const ExperimentSpecs specs = to_specs(cfg);
    CHECK(specs.physics.background.enabled);
    CHECK(specs.physics.background.rho == 0.5);
  }

  TEST_CASE("errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_config_string("[grid]\n\npoints1 = many\n"), doctest::Contains("line 3"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_string("[grid\npoints1 = 1\n"), doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_string("[grid]\npoints1 = 256\n[solver]\nfoo = 1\n"),
                         doctest::Contains("line 4"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_string("[nonsense]\nx = 1\n"), doctest::Contains("unknown"), ConfigError);
  }

  TEST_CASE("cross-field checks") {
    CHECK_THROWS_WITH_AS(parse_config_string("[geometry]\nL1 = 6.5\n"), doctest::Contains("L1 < a1"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[grid]\npoints1 = 100\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[solver]\ndt = 0.01\n"), ResolutionError);
    CHECK_THROWS_AS(parse_config_string("[grid]\npoints1 = 64\npoints2 = 128\n"), ResolutionError);
    CHECK_THROWS_AS(parse_config_string("[solver]\nframe = lab\n"), ResolutionError);
    CHECK_NOTHROW(parse_config_string("[solver]\nframe = lab\n[grid]\npoints2 = 1024\n"));
    CHECK_THROWS_AS(parse_config_string("[solver]\nframe = sideways\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[run]\nthreads = 0\n"), ConfigError);
  }

  TEST_CASE("hash depends on physics only") {
    const RunConfig a = parse_config_string("[sweep]\nvelocities = 4, 8, 16, 32\n");
    const RunConfig b = parse_config_string("[sweep]\nvelocities = 4, 8, 16, 32\n[output]\ndirectory = elsewhere\n");
    const RunConfig c = parse_config_string("[sweep]\nvelocities = 4, 8, 16, 33\n");
    CHECK(config_hash(a).size() == 8);
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
  }

  TEST_CASE("shipped configs parse") {
    const std::filesystem::path dir = std::filesystem::path(__FILE__).parent_path().parent_path().parent_path() / "configs";
    for (const char* name : {"default.ini", "fractional.ini"}) {
      INFO(name);
      CHECK_NOTHROW(parse_config(dir / name));
    }
    CHECK_THROWS_AS(parse_config(dir / "missing.ini"), ConfigError);
  }

  TEST_CASE("exit codes per failure class") {
    CHECK(ConfigError("x").exit_code() == 2);
    CHECK(ResolutionError("x").exit_code() == 3);
    CHECK(SolverError("x").exit_code() == 4);
    CHECK(InvariantError("x").exit_code() == 5);
  }
}
