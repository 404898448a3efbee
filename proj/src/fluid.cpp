#include "wmfi/fluid.hpp"

#include <stdexcept>

namespace wmfi {

FluidState FluidState::zeros(const GridSpec& g) {
  return {Field(g, BcClass::PeriodicX_NeumannY), Field(g, BcClass::PeriodicX_NeumannY)};
}

void CoupledState::validate() const {
  const Field* fields[] = {&fluid.Z, &fluid.rho, &wave.first, &wave.second};
  for (const Field* f : fields) {
    if (!(f->grid() == grid())) throw std::domain_error("state: fields live on different grids");
    if (!f->all_finite()) throw std::domain_error("state: non-finite sample");
  }
  if (!(fluid.rho.min() > 0.0)) throw std::domain_error("state: non-positive density");
}

void Physics::validate() const {
  wave.validate();
  elliptic.validate();
  if (!(hyperviscosity >= 0.0)) throw std::invalid_argument("physics: hyperviscosity must be >= 0");
}

double wave_pv_sign(WaveModel m) {
  switch (m) {
    case WaveModel::None: return 0.0;
    case WaveModel::Nls: return 1.0;
    case WaveModel::Harmonic: return -1.0;
  }
  return 0.0;
}

Diagnosed diagnose(const CoupledState& state, const Physics& physics) {
  const GridSpec& g = state.grid();
  Diagnosed d;
  d.Q_W = wave_pv(state.wave, physics.wave);
  d.Q_F = state.fluid.Z;
  d.Q_F.axpy(wave_pv_sign(physics.wave.model), d.Q_W);
  if (physics.frozen_flow) {
    d.psi = Field(g, BcClass::PeriodicX_DirichletY);
  } else {
    EllipticSolution sol = solve_poisson_variable_detailed(state.fluid.rho, d.Q_F, physics.elliptic);
    d.psi = std::move(sol.psi);
    d.elliptic_residual = sol.relative_residual;
  }
  auto [u, v] = grad_perp(d.psi);
  d.u = std::move(u);
  d.v = std::move(v);
  return d;
}

namespace {

Field speed_squared(const Diagnosed& d) {
  Field s = hadamard(d.u, d.u);
  s += hadamard(d.v, d.v);
  // |u|^2 is even about the walls for free-slip flow.
  s.set_bc(BcClass::PeriodicX_NeumannY);
  return s;
}

void add_hyperviscosity(Field& tendency, const Field& f, double nu) {
  if (nu == 0.0) return;
  Field lap = laplacian(f);
  lap.set_bc(f.bc());
  tendency.axpy(-nu, laplacian(lap));
}

FluidState fluid_rhs_with(const CoupledState& state, const Diagnosed& d, const Field& advecting_psi,
                          const Physics& physics) {
  const GridSpec& g = state.grid();
  if (physics.frozen_flow) return FluidState::zeros(g);
  Field dZ = jacobian(advecting_psi, state.fluid.Z);
  dZ *= -1.0;
  dZ.axpy(0.5, jacobian(state.fluid.rho, speed_squared(d)));
  Field drho = jacobian(advecting_psi, state.fluid.rho);
  drho *= -1.0;
  add_hyperviscosity(dZ, state.fluid.Z, physics.hyperviscosity);
  add_hyperviscosity(drho, state.fluid.rho, physics.hyperviscosity);
  dZ.set_bc(BcClass::PeriodicX_NeumannY);
  drho.set_bc(BcClass::PeriodicX_NeumannY);
  return {std::move(dZ), std::move(drho)};
}

}  // namespace

FluidState fluid_rhs(const CoupledState& state, const Diagnosed& d, const Physics& physics) {
  return fluid_rhs_with(state, d, d.psi, physics);
}

Tendency coupled_rhs(const CoupledState& state, const Diagnosed& d, const Field& advecting_psi,
                     const Physics& physics) {
  Tendency t;
  t.fluid = fluid_rhs_with(state, d, advecting_psi, physics);
  t.wave = wave_rhs(state.wave, advecting_psi, physics.wave);
  return t;
}

Tendency coupled_rhs(const CoupledState& state, const Diagnosed& d, const Physics& physics) {
  return coupled_rhs(state, d, d.psi, physics);
}

}  // namespace wmfi
