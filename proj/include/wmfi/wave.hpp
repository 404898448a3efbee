#pragma once

#include <string>
#include <utility>

#include "wmfi/grid.hpp"

namespace wmfi {

enum class WaveModel { None, Nls, Harmonic };

std::string to_string(WaveModel m);
WaveModel wave_model_from_string(const std::string& s);

struct WaveParams {
  /// NLS self-interaction strength.
  double kappa = 0.5;
  /// Fixed at 1; the value is validated, never varied.
  double hbar = 1.0;
  /// Harmonic-oscillator stiffness.
  double alpha = 1.0;
  WaveModel model = WaveModel::Nls;

  void validate() const;
};

/// Wave prognostics. For Nls the pair is (a, b) with psi = a + i b; for
/// Harmonic it is (zeta, w) stored in the same slots. Both carry NeumannY.
struct WaveState {
  Field first;
  Field second;

  static WaveState zeros(const GridSpec& g);

  Field& a() { return first; }
  Field& b() { return second; }
  const Field& a() const { return first; }
  const Field& b() const { return second; }
  Field& zeta() { return first; }
  Field& w() { return second; }
  const Field& zeta() const { return first; }
  const Field& w() const { return second; }

  bool operator==(const WaveState&) const = default;
};

/// N = a^2 + b^2 for Nls (and None); for Harmonic the oscillator energy
/// density (w^2 + alpha zeta^2) / 2.
Field wave_action_density(const WaveState& ws, const WaveParams& params);

/// J = hbar (a grad b - b grad a).
std::pair<Field, Field> momentum_map_J(const WaveState& ws, const WaveParams& params);

/// Wave potential vorticity: 2 hbar J(a, b) for Nls, J(w, zeta) for Harmonic,
/// zero for None.
Field wave_pv(const WaveState& ws, const WaveParams& params);

/// Doppler-shifted NLS in real variables:
///   da/dt = -J(psi, a) - lap(b)/2 + kappa (a^2+b^2) b
///   db/dt = -J(psi, b) + lap(a)/2 - kappa (a^2+b^2) a
WaveState nls_rhs(const WaveState& ws, const Field& psi, const WaveParams& params);

/// The dispersive and self-interaction part of nls_rhs without transport,
/// (F_a, F_b). Used by the circulation diagnostics.
WaveState nls_drift(const WaveState& ws, const WaveParams& params);

/// Advected field of oscillators: dzeta/dt = -J(psi, zeta) + w,
/// dw/dt = -J(psi, w) - alpha zeta.
WaveState harmonic_rhs(const WaveState& ws, const Field& psi, const WaveParams& params);

/// Dispatches on params.model; None returns zero tendencies.
WaveState wave_rhs(const WaveState& ws, const Field& psi, const WaveParams& params);

/// Nls: (1/2) int |grad a|^2 + |grad b|^2 + kappa (a^2+b^2)^2.
/// Harmonic: (1/2) int w^2 + alpha zeta^2.
double wave_energy(const WaveState& ws, const WaveParams& params);

class WaveModelMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace wmfi
