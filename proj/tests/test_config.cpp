#include "doctest.h"
#include "support.hpp"

#include <fstream>

#include "wmfi/config.hpp"

using namespace wmfi;
using namespace wmfi::test;
using nlohmann::json;

TEST_CASE("defaults are the desk-scale experiment") {
  const SimConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.grid == GridSpec{128, 129, 50.0, 50.0});
  CHECK(c.cfl == 0.4);
  CHECK(c.kappa == 0.5);
  REQUIRE(c.stages.size() == 1);
  CHECK(c.stages[0].type == StageType::SpinUp);
  CHECK(c.stages[0].t_spin == 100.0);
  CHECK(c.loop.markers == 64);
}

TEST_CASE("stage names") {
  for (StageType s : {StageType::SpinUp, StageType::Coupled, StageType::NlsOnly})
    CHECK(stage_type_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(stage_type_from_string("Spinup"), ConfigError);
}

TEST_CASE("JSON round trip") {
  SimConfig c;
  c.grid = GridSpec{32, 33, 50.0, 50.0};
  c.wave_model = WaveModel::Harmonic;
  c.alpha = 2.5;
  c.dt_override = 0.01;
  c.noise = NoiseConfig{{{1, 1, 0.1}, {2, 3, -0.05}}, false};
  c.stages = {StageSpec{StageType::SpinUp, 12.5, false}, StageSpec{StageType::Coupled, 100.0, true}};
  c.restart = "snap.wmfi";
  c.seed = 1234567890123ULL;
  const SimConfig back = config_from_json(to_json(c));
  CHECK(back == c);
  CHECK(config_from_json(json::parse(to_json(c).dump())) == c);
}

TEST_CASE("missing keys keep defaults; unknown keys are rejected") {
  CHECK(config_from_json(json::object()) == SimConfig{});
  CHECK(config_from_json(json{{"run", {{"t_end", 5.0}}}}).t_end == 5.0);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"grid", {{"nz", 4}}}}), doctest::Contains("nz"), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"colour", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"run", {{"cfl", "fast"}}}}), ConfigError);
}

TEST_CASE("validation") {
  auto bad = [](auto mutate) {
    SimConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  bad([](SimConfig& c) { c.grid.nx = 7; });
  bad([](SimConfig& c) { c.hbar = 2.0; });
  bad([](SimConfig& c) { c.alpha = -1.0; });
  bad([](SimConfig& c) { c.wave_model = WaveModel::None; });
  bad([](SimConfig& c) { c.cfl = 0.0; });
  bad([](SimConfig& c) { c.cfl = 2.0; });
  bad([](SimConfig& c) { c.dt_override = 0.0; });
  bad([](SimConfig& c) { c.elliptic_tol = 1e-3; });
  bad([](SimConfig& c) { c.stages.clear(); });
  bad([](SimConfig& c) { c.snapshot_interval = -1.0; });
  bad([](SimConfig& c) { c.output_dir.clear(); });
  bad([](SimConfig& c) { c.loop.markers = 16; });
  bad([](SimConfig& c) { c.loop.radius = 0.0; });
  bad([](SimConfig& c) { c.noise = NoiseConfig{{{1, 0, 0.1}}, true}; });
  bad([](SimConfig& c) { c.t_end = -1.0; });
}

TEST_CASE("dotted overrides") {
  json j = to_json(SimConfig{});
  apply_override(j, "run.t_end=5");
  apply_override(j, "physics.wave_model=Harmonic");
  apply_override(j, "stages.0.t_spin=2.5");
  apply_override(j, "io.output_dir=results/a");
  apply_override(j, "run.dt_override=0.02");
  const SimConfig c = config_from_json(j);
  CHECK(c.t_end == 5.0);
  CHECK(c.wave_model == WaveModel::Harmonic);
  CHECK(c.stages[0].t_spin == 2.5);
  CHECK(c.output_dir == "results/a");
  CHECK(c.dt_override == 0.02);

  CHECK_THROWS_AS(apply_override(j, "run.t_end"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "=3"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "stages.7.t_spin=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "run.cfl.x=1"), ConfigError);
  // A new key is accepted by the override and rejected by the parser.
  apply_override(j, "run.bogus=1");
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("config files") {
  const std::string dir = scratch_dir("config");
  const std::string path = dir + "/c.json";
  SimConfig c;
  c.t_end = 7.0;
  std::ofstream(path) << to_json(c).dump(2);
  CHECK(load_config(path) == c);
  std::ofstream(dir + "/broken.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir + "/broken.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir + "/missing.json"), ConfigError);
}

TEST_CASE("stage physics") {
  SimConfig c;
  c.kappa = 0.25;
  c.hyperviscosity = 1e-4;
  c.wave_model = WaveModel::Harmonic;
  const Physics spin = stage_physics(c, StageType::SpinUp);
  CHECK(spin.wave.model == WaveModel::None);
  CHECK_FALSE(spin.frozen_flow);
  CHECK(spin.hyperviscosity == 1e-4);
  CHECK(stage_physics(c, StageType::Coupled).wave.model == WaveModel::Harmonic);
  const Physics nls = stage_physics(c, StageType::NlsOnly);
  CHECK(nls.wave.model == WaveModel::Nls);
  CHECK(nls.frozen_flow);
  CHECK(nls.wave.kappa == 0.25);
}

TEST_CASE("noise modes vanish on the walls") {
  SimConfig c;
  c.grid = GridSpec{16, 17, 50.0, 50.0};
  CHECK(build_noise(c).modes.empty());
  c.noise = NoiseConfig{{{1, 1, 0.2}, {0, 2, 0.1}}, true};
  c.seed = 99;
  const NoiseSpec n = build_noise(c);
  REQUIRE(n.modes.size() == 2);
  CHECK(n.seed == 99);
  CHECK(n.modes[0].amplitude == 0.2);
  CHECK_NOTHROW(n.validate(c.grid));
  for (const NoiseMode& m : n.modes)
    for (int i = 0; i < c.grid.nx; ++i) {
      CHECK(m.stream(i, 0) == 0.0);
      CHECK(m.stream(i, c.grid.ny - 1) == 0.0);
    }
  CHECK(n.modes[0].stream(4, 8) == doctest::Approx(std::sin(2 * pi * 4 / 16) * std::sin(pi * 8 / 16)));
}
