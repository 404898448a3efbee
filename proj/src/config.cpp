#include "wmfi/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace wmfi {

using nlohmann::json;

std::string to_string(StageType s) {
  switch (s) {
    case StageType::SpinUp: return "SpinUp";
    case StageType::Coupled: return "Coupled";
    case StageType::NlsOnly: return "NlsOnly";
  }
  return "?";
}

StageType stage_type_from_string(const std::string& s) {
  if (s == "SpinUp") return StageType::SpinUp;
  if (s == "Coupled") return StageType::Coupled;
  if (s == "NlsOnly") return StageType::NlsOnly;
  throw ConfigError("unknown stage type '" + s + "' (expected SpinUp, Coupled or NlsOnly)");
}

void SimConfig::validate() const {
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(hbar == 1.0, "physics.hbar is fixed at 1");
  require(std::isfinite(kappa), "physics.kappa must be finite");
  require(alpha >= 0.0 && std::isfinite(alpha), "physics.alpha must be >= 0");
  require(wave_model != WaveModel::None, "physics.wave_model must be Nls or Harmonic");
  require(t_end >= 0.0 && std::isfinite(t_end), "run.t_end must be >= 0");
  require(cfl > 0.0 && cfl <= 1.5, "run.cfl must lie in (0, 1.5]");
  require(!dt_override || (*dt_override > 0.0 && std::isfinite(*dt_override)), "run.dt_override must be > 0");
  require(hyperviscosity >= 0.0, "run.hyperviscosity must be >= 0");
  require(elliptic_tol > 0.0 && elliptic_tol <= 1e-4, "run.elliptic_tol must lie in (0, 1e-4]");
  require(!stages.empty(), "stages must not be empty");
  for (const StageSpec& s : stages) require(s.t_spin >= 0.0 && std::isfinite(s.t_spin), "stage t_spin must be >= 0");
  require(snapshot_interval >= 0.0, "io.snapshot_interval must be >= 0");
  require(diagnostics_interval >= 0.0, "io.diagnostics_interval must be >= 0");
  require(!output_dir.empty(), "io.output_dir must not be empty");
  require(loop.markers >= static_cast<int>(MaterialLoop::kMinMarkers), "loop.markers must be >= 32");
  require(loop.radius > 0.0, "loop.radius must be > 0");
  if (noise) {
    for (const NoiseModeSpec& m : noise->modes) {
      require(m.kx >= 0 && m.ky >= 1, "noise mode needs kx >= 0 and ky >= 1");
      require(std::isfinite(m.amplitude), "noise amplitude must be finite");
    }
  }
}

json to_json(const SimConfig& c) {
  json j;
  j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"Lx", c.grid.Lx}, {"Ly", c.grid.Ly}};
  j["physics"] = {{"kappa", c.kappa}, {"alpha", c.alpha}, {"hbar", c.hbar}, {"wave_model", to_string(c.wave_model)}};
  j["run"] = {{"t_end", c.t_end},
              {"cfl", c.cfl},
              {"dt_override", c.dt_override ? json(*c.dt_override) : json(nullptr)},
              {"hyperviscosity", c.hyperviscosity},
              {"elliptic_tol", c.elliptic_tol}};
  if (c.noise) {
    json modes = json::array();
    for (const NoiseModeSpec& m : c.noise->modes) modes.push_back({{"kx", m.kx}, {"ky", m.ky}, {"amplitude", m.amplitude}});
    j["noise"] = {{"modes", modes}, {"fallback_deterministic", c.noise->fallback_deterministic}};
  } else {
    j["noise"] = nullptr;
  }
  json stages = json::array();
  for (const StageSpec& s : c.stages) {
    json st = {{"type", to_string(s.type)}};
    if (s.type == StageType::SpinUp) st["t_spin"] = s.t_spin;
    if (s.type == StageType::Coupled) st["zero_fluid_pv"] = s.zero_fluid_pv;
    stages.push_back(st);
  }
  j["stages"] = stages;
  j["io"] = {{"output_dir", c.output_dir},
             {"snapshot_interval", c.snapshot_interval},
             {"diagnostics_interval", c.diagnostics_interval},
             {"restart", c.restart ? json(*c.restart) : json(nullptr)}};
  j["loop"] = {{"center_x", c.loop.center_x},
               {"center_y", c.loop.center_y},
               {"radius", c.loop.radius},
               {"markers", c.loop.markers}};
  j["seed"] = c.seed;
  return j;
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace

SimConfig config_from_json(const json& j) {
  SimConfig c;
  reject_unknown(j, {"grid", "physics", "run", "noise", "stages", "io", "loop", "seed"}, "config");
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, {"nx", "ny", "Lx", "Ly"}, "grid");
    read(g, "nx", c.grid.nx, "grid");
    read(g, "ny", c.grid.ny, "grid");
    read(g, "Lx", c.grid.Lx, "grid");
    read(g, "Ly", c.grid.Ly, "grid");
  }
  if (j.contains("physics")) {
    const json& p = j["physics"];
    reject_unknown(p, {"kappa", "alpha", "hbar", "wave_model"}, "physics");
    read(p, "kappa", c.kappa, "physics");
    read(p, "alpha", c.alpha, "physics");
    read(p, "hbar", c.hbar, "physics");
    if (p.contains("wave_model")) {
      try {
        c.wave_model = wave_model_from_string(p["wave_model"].get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("physics.wave_model: ") + e.what());
      }
    }
  }
  if (j.contains("run")) {
    const json& r = j["run"];
    reject_unknown(r, {"t_end", "cfl", "dt_override", "hyperviscosity", "elliptic_tol"}, "run");
    read(r, "t_end", c.t_end, "run");
    read(r, "cfl", c.cfl, "run");
    if (r.contains("dt_override") && !r["dt_override"].is_null()) {
      double v = 0.0;
      read(r, "dt_override", v, "run");
      c.dt_override = v;
    }
    read(r, "hyperviscosity", c.hyperviscosity, "run");
    read(r, "elliptic_tol", c.elliptic_tol, "run");
  }
  if (j.contains("noise") && !j["noise"].is_null()) {
    const json& n = j["noise"];
    reject_unknown(n, {"modes", "fallback_deterministic"}, "noise");
    NoiseConfig nc;
    read(n, "fallback_deterministic", nc.fallback_deterministic, "noise");
    if (n.contains("modes")) {
      if (!n["modes"].is_array()) throw ConfigError("noise.modes must be an array");
      for (const json& m : n["modes"]) {
        reject_unknown(m, {"kx", "ky", "amplitude"}, "noise.modes[]");
        NoiseModeSpec ms;
        read(m, "kx", ms.kx, "noise.modes[]");
        read(m, "ky", ms.ky, "noise.modes[]");
        read(m, "amplitude", ms.amplitude, "noise.modes[]");
        nc.modes.push_back(ms);
      }
    }
    c.noise = nc;
  }
  if (j.contains("stages")) {
    if (!j["stages"].is_array()) throw ConfigError("stages must be an array");
    c.stages.clear();
    for (const json& s : j["stages"]) {
      reject_unknown(s, {"type", "t_spin", "zero_fluid_pv"}, "stages[]");
      if (!s.contains("type")) throw ConfigError("stages[] entry needs a type");
      StageSpec st;
      st.type = stage_type_from_string(s["type"].get<std::string>());
      read(s, "t_spin", st.t_spin, "stages[]");
      read(s, "zero_fluid_pv", st.zero_fluid_pv, "stages[]");
      c.stages.push_back(st);
    }
  }
  if (j.contains("io")) {
    const json& io = j["io"];
    reject_unknown(io, {"output_dir", "snapshot_interval", "diagnostics_interval", "restart"}, "io");
    read(io, "output_dir", c.output_dir, "io");
    read(io, "snapshot_interval", c.snapshot_interval, "io");
    read(io, "diagnostics_interval", c.diagnostics_interval, "io");
    if (io.contains("restart") && !io["restart"].is_null()) {
      std::string p;
      read(io, "restart", p, "io");
      c.restart = p;
    }
  }
  if (j.contains("loop")) {
    const json& l = j["loop"];
    reject_unknown(l, {"center_x", "center_y", "radius", "markers"}, "loop");
    read(l, "center_x", c.loop.center_x, "loop");
    read(l, "center_y", c.loop.center_y, "loop");
    read(l, "radius", c.loop.radius, "loop");
    read(l, "markers", c.loop.markers, "loop");
  }
  read(j, "seed", c.seed, "config");
  c.validate();
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  // Numeric parts index into arrays ("stages.0.t_spin").
  auto child = [&](json* n, const std::string& p) -> json* {
    if (n->is_array()) {
      std::size_t used = 0;
      std::size_t idx = 0;
      try {
        idx = std::stoul(p, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != p.size() || idx >= n->size())
        throw ConfigError("override '" + key + "': '" + p + "' is not a valid array index");
      return &(*n)[idx];
    }
    if (n->is_null()) *n = json::object();
    if (!n->is_object()) throw ConfigError("override '" + key + "' descends into a scalar");
    return &(*n)[p];
  };
  if (parts.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) node = child(node, parts[k]);
  *child(node, parts.back()) = value;
}

Physics stage_physics(const SimConfig& c, StageType stage) {
  Physics p;
  p.wave.kappa = c.kappa;
  p.wave.alpha = c.alpha;
  p.wave.hbar = c.hbar;
  p.elliptic.rel_tol = c.elliptic_tol;
  p.hyperviscosity = c.hyperviscosity;
  switch (stage) {
    case StageType::SpinUp: p.wave.model = WaveModel::None; break;
    case StageType::Coupled: p.wave.model = c.wave_model; break;
    case StageType::NlsOnly:
      p.wave.model = WaveModel::Nls;
      p.frozen_flow = true;
      break;
  }
  return p;
}

NoiseSpec build_noise(const SimConfig& c) {
  NoiseSpec spec;
  spec.seed = c.seed;
  if (!c.noise) return spec;
  spec.fallback_deterministic = c.noise->fallback_deterministic;
  const GridSpec& g = c.grid;
  for (const NoiseModeSpec& m : c.noise->modes) {
    NoiseMode mode;
    mode.amplitude = m.amplitude;
    mode.stream = Field::from_function(g, BcClass::PeriodicX_DirichletY, [&](double x, double y) {
      return std::sin(2.0 * std::numbers::pi * m.kx * x / g.Lx) * std::sin(std::numbers::pi * m.ky * y / g.Ly);
    });
    // Exact zeros on the walls.
    for (int i = 0; i < g.nx; ++i) {
      mode.stream(i, 0) = 0.0;
      mode.stream(i, g.ny - 1) = 0.0;
    }
    spec.modes.push_back(std::move(mode));
  }
  return spec;
}

}  // namespace wmfi
