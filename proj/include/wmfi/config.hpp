#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "wmfi/diagnostics.hpp"
#include "wmfi/fluid.hpp"
#include "wmfi/stepping.hpp"

namespace wmfi {

/// Invalid or unreadable configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StageType { SpinUp, Coupled, NlsOnly };

std::string to_string(StageType s);
StageType stage_type_from_string(const std::string& s);

struct StageSpec {
  StageType type = StageType::SpinUp;
  /// Spin-up duration (SpinUp only).
  double t_spin = 100.0;
  /// Coupled only: start the second stage with Q_F = 0.
  bool zero_fluid_pv = false;

  bool operator==(const StageSpec&) const = default;
};

/// Analytic transport mode: stream = sin(2 pi kx x / Lx) sin(pi ky y / Ly),
/// which vanishes on both walls.
struct NoiseModeSpec {
  int kx = 1;
  int ky = 1;
  double amplitude = 0.0;
  bool operator==(const NoiseModeSpec&) const = default;
};

struct NoiseConfig {
  std::vector<NoiseModeSpec> modes;
  bool fallback_deterministic = true;
  bool operator==(const NoiseConfig&) const = default;
};

struct LoopConfig {
  double center_x = 25.0;
  double center_y = 25.0;
  double radius = 8.0;
  int markers = 64;
  bool operator==(const LoopConfig&) const = default;
};

struct SimConfig {
  GridSpec grid{128, 129, 50.0, 50.0};

  double kappa = 0.5;
  double alpha = 1.0;
  double hbar = 1.0;
  /// Wave model of the Coupled stage (Nls or Harmonic).
  WaveModel wave_model = WaveModel::Nls;

  /// Duration of Coupled and NlsOnly stages.
  double t_end = 30.0;
  double cfl = 0.4;
  std::optional<double> dt_override;
  double hyperviscosity = 0.0;
  double elliptic_tol = 1e-10;

  std::optional<NoiseConfig> noise;
  std::vector<StageSpec> stages{StageSpec{}};

  std::string output_dir = "out";
  /// 0 disables periodic output (initial and final states are always written).
  double snapshot_interval = 10.0;
  double diagnostics_interval = 1.0;
  std::optional<std::string> restart;

  LoopConfig loop;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  bool operator==(const SimConfig&) const = default;
};

nlohmann::json to_json(const SimConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
SimConfig config_from_json(const nlohmann::json& j);
SimConfig load_config(const std::string& path);

/// Applies "a.b.c=value" where value is parsed as JSON when possible and as a
/// string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Physics for a stage of this config.
Physics stage_physics(const SimConfig& c, StageType stage);

/// NoiseSpec materialised on the config grid (empty when noise is absent).
NoiseSpec build_noise(const SimConfig& c);

}  // namespace wmfi
