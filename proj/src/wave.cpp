#include "wmfi/wave.hpp"

#include <cmath>

namespace wmfi {

std::string to_string(WaveModel m) {
  switch (m) {
    case WaveModel::None: return "None";
    case WaveModel::Nls: return "Nls";
    case WaveModel::Harmonic: return "Harmonic";
  }
  return "?";
}

WaveModel wave_model_from_string(const std::string& s) {
  if (s == "None") return WaveModel::None;
  if (s == "Nls") return WaveModel::Nls;
  if (s == "Harmonic") return WaveModel::Harmonic;
  throw std::invalid_argument("unknown wave model '" + s + "' (expected None, Nls or Harmonic)");
}

void WaveParams::validate() const {
  if (hbar != 1.0) throw std::invalid_argument("wave: hbar is fixed at 1");
  if (!std::isfinite(kappa)) throw std::invalid_argument("wave: kappa must be finite");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("wave: alpha must be finite and >= 0");
}

WaveState WaveState::zeros(const GridSpec& g) {
  return {Field(g, BcClass::PeriodicX_NeumannY), Field(g, BcClass::PeriodicX_NeumannY)};
}

Field wave_action_density(const WaveState& ws, const WaveParams& params) {
  Field n(ws.first.grid(), BcClass::PeriodicX_NeumannY);
  auto out = n.values();
  auto p = ws.first.values();
  auto q = ws.second.values();
  if (params.model == WaveModel::Harmonic) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * (q[k] * q[k] + params.alpha * p[k] * p[k]);
  } else {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = p[k] * p[k] + q[k] * q[k];
  }
  return n;
}

std::pair<Field, Field> momentum_map_J(const WaveState& ws, const WaveParams& params) {
  if (params.model == WaveModel::Harmonic) {
    // Momentum one-form w dzeta.
    Field jx = hadamard(ws.w(), ddx(ws.zeta()));
    Field jy = hadamard(ws.w(), ddy(ws.zeta()));
    return {std::move(jx), std::move(jy)};
  }
  const Field& a = ws.a();
  const Field& b = ws.b();
  Field jx = hadamard(a, ddx(b));
  jx -= hadamard(b, ddx(a));
  Field jy = hadamard(a, ddy(b));
  jy -= hadamard(b, ddy(a));
  jx *= params.hbar;
  jy *= params.hbar;
  return {std::move(jx), std::move(jy)};
}

Field wave_pv(const WaveState& ws, const WaveParams& params) {
  switch (params.model) {
    case WaveModel::None: return Field(ws.first.grid(), BcClass::PeriodicX_NeumannY);
    case WaveModel::Nls: {
      Field q = jacobian(ws.a(), ws.b());
      q *= 2.0 * params.hbar;
      q.set_bc(BcClass::PeriodicX_NeumannY);
      return q;
    }
    case WaveModel::Harmonic: {
      Field q = jacobian(ws.w(), ws.zeta());
      q.set_bc(BcClass::PeriodicX_NeumannY);
      return q;
    }
  }
  throw std::logic_error("unreachable wave model");
}

WaveState nls_drift(const WaveState& ws, const WaveParams& params) {
  const Field& a = ws.a();
  const Field& b = ws.b();
  Field fa = laplacian(b);
  fa *= -0.5;
  Field fb = laplacian(a);
  fb *= 0.5;
  auto av = a.values();
  auto bv = b.values();
  auto fav = fa.values();
  auto fbv = fb.values();
  const double kappa = params.kappa;
  for (std::size_t k = 0; k < fav.size(); ++k) {
    const double n = av[k] * av[k] + bv[k] * bv[k];
    fav[k] += kappa * n * bv[k];
    fbv[k] -= kappa * n * av[k];
  }
  fa.set_bc(BcClass::PeriodicX_NeumannY);
  fb.set_bc(BcClass::PeriodicX_NeumannY);
  return {std::move(fa), std::move(fb)};
}

WaveState nls_rhs(const WaveState& ws, const Field& psi, const WaveParams& params) {
  if (params.model != WaveModel::Nls) throw WaveModelMismatch("nls_rhs called with wave model " + to_string(params.model));
  WaveState t = nls_drift(ws, params);
  t.first -= jacobian(psi, ws.a());
  t.second -= jacobian(psi, ws.b());
  return t;
}

WaveState harmonic_rhs(const WaveState& ws, const Field& psi, const WaveParams& params) {
  if (params.model != WaveModel::Harmonic)
    throw WaveModelMismatch("harmonic_rhs called with wave model " + to_string(params.model));
  Field dz = ws.w();
  dz -= jacobian(psi, ws.zeta());
  Field dw = jacobian(psi, ws.w());
  dw *= -1.0;
  dw.axpy(-params.alpha, ws.zeta());
  dz.set_bc(BcClass::PeriodicX_NeumannY);
  dw.set_bc(BcClass::PeriodicX_NeumannY);
  return {std::move(dz), std::move(dw)};
}

WaveState wave_rhs(const WaveState& ws, const Field& psi, const WaveParams& params) {
  switch (params.model) {
    case WaveModel::None: return WaveState::zeros(ws.first.grid());
    case WaveModel::Nls: return nls_rhs(ws, psi, params);
    case WaveModel::Harmonic: return harmonic_rhs(ws, psi, params);
  }
  throw std::logic_error("unreachable wave model");
}

double wave_energy(const WaveState& ws, const WaveParams& params) {
  switch (params.model) {
    case WaveModel::None: return 0.0;
    case WaveModel::Harmonic: {
      return 0.5 * (inner(ws.w(), ws.w()) + params.alpha * inner(ws.zeta(), ws.zeta()));
    }
    case WaveModel::Nls: {
      // Gradient energy in summation-by-parts form, <a, -lap a>, which is the
      // quadratic form the discrete NLS actually conserves.
      const double grad = -inner(ws.a(), laplacian(ws.a())) - inner(ws.b(), laplacian(ws.b()));
      const Field n = wave_action_density(ws, params);
      return 0.5 * (grad + params.kappa * inner(n, n));
    }
  }
  throw std::logic_error("unreachable wave model");
}

}  // namespace wmfi
