#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmfi/fluid.hpp"

namespace wmfi {

/// NaN/Inf produced inside a step.
class NumericalBlowUp : public std::runtime_error {
 public:
  NumericalBlowUp(double t, int stage);
  double time() const { return t_; }
  int stage() const { return stage_; }

 private:
  double t_;
  int stage_;
};

/// Called once per stage with the stage index (0-based), the stage's time
/// offset within the step, and the diagnosed fields used by that stage.
using StageObserver = std::function<void(int stage, double tau, const Diagnosed&)>;

/// Optional extra wave tendency added at every stage; the hook for wave-side
/// stochastic Hamiltonians, which this code does not define itself.
using WaveTendencyHook = std::function<void(const CoupledState&, WaveState& tendency)>;

struct StepHooks {
  StageObserver on_stage;
  WaveTendencyHook extra_wave_tendency;
  /// Diagnosis of the incoming state if the caller already has it; saves one
  /// elliptic solve per step. Must match diagnose(state, physics).
  const Diagnosed* initial = nullptr;
};

/// Three-stage strong-stability-preserving Runge-Kutta (Shu-Osher):
///   s1 = s + dt L(s)
///   s2 = 3/4 s + 1/4 (s1 + dt L(s1))
///   s+ = 1/3 s + 2/3 (s2 + dt L(s2))
/// evaluated in the algebraically identical increment form, so a vanishing
/// tendency leaves the state bit-for-bit unchanged. Diagnosis is re-run at
/// every stage. Stage time offsets are 0, dt, dt/2.
CoupledState ssp_rk3_step(const CoupledState& state, double dt, const Physics& physics,
                          const StepHooks& hooks = {});

struct NoiseMode {
  /// Stream function of the transport mode xi = grad_perp(stream); DirichletY.
  Field stream;
  double amplitude = 0.0;
};

struct NoiseSpec {
  std::vector<NoiseMode> modes;
  std::uint64_t seed = 0;
  /// With no active modes, delegate to ssp_rk3_step instead of Heun.
  bool fallback_deterministic = true;

  bool active() const;
  void validate(const GridSpec& g) const;
};

/// Counter-based standard normals keyed by (seed, step, mode).
double counter_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t mode);

/// Tracks which step indices have already been drawn so a Brownian increment is
/// never reused.
class NoiseClock {
 public:
  explicit NoiseClock(std::uint64_t seed = 0) : seed_(seed) {}
  /// dW_i ~ N(0, dt) for every mode at this step. Throws std::logic_error if
  /// `step` is not strictly after the previously drawn step.
  std::vector<double> increments(std::uint64_t step, std::size_t modes, double dt);
  std::uint64_t seed() const { return seed_; }
  std::optional<std::uint64_t> last_step() const { return last_; }

 private:
  std::uint64_t seed_;
  std::optional<std::uint64_t> last_;
};

/// Stratonovich-Heun step for transport noise: every advection uses
/// psi + sum_i amplitude_i stream_i dW_i / dt, while dispersion,
/// self-interaction and the baroclinic source enter as drift. The same
/// increments are used in predictor and corrector.
CoupledState stratonovich_step(const CoupledState& state, double dt, const NoiseSpec& noise, std::uint64_t step,
                               NoiseClock& clock, const Physics& physics, const StepHooks& hooks = {});

/// Floor on the velocity scale in suggest_dt.
inline constexpr double kVelocityFloor = 1e-6;
/// h^2 times the largest eigenvalue magnitude of the 2D five-point Laplacian.
inline constexpr double kLaplacianStencilConstant = 8.0;

/// cfl * min(dx, dy) / max(|u|_inf, floor), capped for Nls by the dispersive
/// limit cfl * min(dx,dy)^2 / (stencil/2) and for Harmonic by cfl / sqrt(alpha).
double suggest_dt(const GridSpec& g, const Diagnosed& d, double cfl, const WaveParams& wave);

}  // namespace wmfi
