#pragma once

#include "wmfi/elliptic.hpp"
#include "wmfi/grid.hpp"
#include "wmfi/wave.hpp"

namespace wmfi {

/// Prognostic fluid variables. Z is the total potential vorticity
/// (Q_F - Q_W for Nls, Q_F + Q_W for Harmonic, Q_F without waves).
/// Both fields carry NeumannY: their ghost rows mirror the first interior row,
/// which is what makes the wall-bounded Arakawa transport conservative.
struct FluidState {
  Field Z;
  Field rho;

  static FluidState zeros(const GridSpec& g);
  bool operator==(const FluidState&) const = default;
};

struct CoupledState {
  FluidState fluid;
  WaveState wave;
  double t = 0.0;

  const GridSpec& grid() const { return fluid.Z.grid(); }
  /// All fields finite and min(rho) > 0; throws std::domain_error otherwise.
  void validate() const;
  bool operator==(const CoupledState&) const = default;
};

/// Everything the physics needs beyond the state itself.
struct Physics {
  WaveParams wave;
  EllipticOptions elliptic;
  /// Coefficient of the optional -nu lap^2 filter on Z and rho (0 = off).
  double hyperviscosity = 0.0;
  /// Uncoupled wave run: psi is forced to zero and the fluid is frozen.
  bool frozen_flow = false;

  void validate() const;
};

struct Diagnosed {
  Field Q_W;
  Field Q_F;
  Field psi;
  Field u;
  Field v;
  double elliptic_residual = 0.0;
};

/// +1 for Nls (Q_F = Z + Q_W), -1 for Harmonic (Q_F = Z - Q_W), 0 without waves.
double wave_pv_sign(WaveModel m);

/// Q_W from the waves, Q_F from Z, psi from div(rho grad psi) = Q_F, u = grad_perp(psi).
Diagnosed diagnose(const CoupledState& state, const Physics& physics);

/// dZ/dt = -J(psi, Z) + J(rho, |u|^2)/2, drho/dt = -J(psi, rho), plus the
/// optional hyperviscous filter.
FluidState fluid_rhs(const CoupledState& state, const Diagnosed& d, const Physics& physics);

/// Full tendency of a coupled state (time slot unused).
struct Tendency {
  FluidState fluid;
  WaveState wave;
};

/// Tendency with an explicit advecting stream function. Transport terms use
/// `advecting_psi`; the baroclinic source uses the velocity in `d`.
Tendency coupled_rhs(const CoupledState& state, const Diagnosed& d, const Field& advecting_psi,
                     const Physics& physics);
Tendency coupled_rhs(const CoupledState& state, const Diagnosed& d, const Physics& physics);

}  // namespace wmfi
