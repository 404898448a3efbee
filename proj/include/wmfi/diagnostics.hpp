#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wmfi/fluid.hpp"

namespace wmfi {

/// One time sample of the monitored integrals and extrema.
struct DiagnosticsRecord {
  double t = 0.0;
  double E_fluid = 0.0;
  double E_wave = 0.0;
  double E_total = 0.0;
  double int_N = 0.0;
  double int_rho = 0.0;
  double int_rho2 = 0.0;
  double int_Z = 0.0;
  double int_QF = 0.0;
  double int_QW = 0.0;
  double max_QF = 0.0;
  double max_QW = 0.0;
  double circ_total = 0.0;
  double circ_fluid = 0.0;
  double circ_wave = 0.0;
  double elliptic_residual = 0.0;

  /// Column names in CSV order.
  static const std::vector<std::string>& columns();
  std::vector<double> values() const;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

/// Closed polyline of markers; the last marker connects back to the first.
/// x is kept unwrapped so segments never jump across the periodic seam.
struct MaterialLoop {
  std::vector<Vec2> markers;

  static constexpr std::size_t kMinMarkers = 32;
  static MaterialLoop circle(Vec2 center, double radius, std::size_t count);
  static MaterialLoop rectangle(Vec2 lower_left, Vec2 upper_right, std::size_t per_side);

  double length() const;
  /// True if any two non-adjacent segments cross.
  bool self_intersects() const;
  bool operator==(const MaterialLoop&) const = default;
};

/// Velocity at a point and a time offset tau within the current step.
using VelocitySampler = std::function<Vec2(Vec2 position, double tau)>;

/// Bilinear sampler for a frozen velocity field.
VelocitySampler frozen_sampler(const Field& u, const Field& v);

/// Sampler over the SSP-RK3 stage velocities (tau = 0, dt, dt/2). With only
/// stages 0 and 1 recorded the midpoint velocity is their average.
class StageVelocities {
 public:
  void store(int stage, const Field& u, const Field& v);
  void clear();
  VelocitySampler sampler(double dt) const;

 private:
  std::array<std::optional<std::pair<Field, Field>>, 3> stages_;
};

/// Advances every marker with SSP-RK3 and bilinear interpolation, keeps y at
/// least one grid spacing from the walls, and re-samples segments longer than
/// three grid spacings by inserting points. Re-sampling stops once the loop
/// holds `max_markers` markers (chaotic stretching is exponential).
MaterialLoop advect_loop(const MaterialLoop& loop, const VelocitySampler& velocity, double dt, const GridSpec& grid,
                         std::size_t max_markers = 65536);

/// Trapezoid line integral of a covector field (cx, cy) around the loop.
double circulation(const MaterialLoop& loop, const Field& cx, const Field& cy);

/// The wave part of the momentum shift per unit density: J / rho for Nls,
/// -(w grad zeta) / rho for Harmonic, so that circ_total = circ_fluid - circ_wave.
std::pair<Field, Field> wave_shift_covector(const CoupledState& state, const Physics& physics);

/// Non-inertial force per unit density acting on the fluid circulation,
/// written without the wave phase: for Nls (F_a grad b + a grad F_b - F_b grad a
/// - b grad F_a) / rho, for Harmonic -(w grad w - alpha zeta grad zeta) / rho.
std::pair<Field, Field> wave_force_covector(const CoupledState& state, const Physics& physics);

/// Integrals, extrema and (when a loop is supplied) the circulation split.
DiagnosticsRecord record(const CoupledState& state, const Diagnosed& d, const Physics& physics,
                         const MaterialLoop* loop = nullptr);

struct KelvinFrame {
  MaterialLoop loop;
  CoupledState state;
};

struct KelvinReport {
  std::vector<double> t;
  /// d/dt of circ_fluid along the advected loop (centered difference).
  std::vector<double> rate;
  /// Integral of the non-inertial wave force around the loop.
  std::vector<double> wave_force;
  /// Eulerian part: loop integral of du/dt at fixed markers.
  std::vector<double> local_rate;
  std::vector<double> residual;
  /// Largest term magnitude at each sample.
  std::vector<double> scale;
  /// max |residual| / max scale over the whole history (0 when every term is 0).
  double relative_residual = 0.0;
  bool loop_degenerate = false;
};

/// Circulation balance along a loop history with non-uniform spacing allowed.
/// Gradient terms (Bernoulli and pressure) drop on closed loops when rho is
/// uniform; with variable rho the baroclinic pressure term is not available and
/// shows up in the residual.
KelvinReport kelvin_balance(std::span<const KelvinFrame> history, const Physics& physics);

}  // namespace wmfi
