#include "wmfi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wmfi {

const std::vector<std::string>& DiagnosticsRecord::columns() {
  static const std::vector<std::string> names = {
      "t",      "E_fluid", "E_wave", "E_total",    "int_N",      "int_rho",   "int_rho2",  "int_Z",
      "int_QF", "int_QW",  "max_QF", "max_QW",     "circ_total", "circ_fluid", "circ_wave", "elliptic_residual"};
  return names;
}

std::vector<double> DiagnosticsRecord::values() const {
  return {t,      E_fluid, E_wave, E_total,    int_N,      int_rho,    int_rho2,  int_Z,
          int_QF, int_QW,  max_QF, max_QW,     circ_total, circ_fluid, circ_wave, elliptic_residual};
}

MaterialLoop MaterialLoop::circle(Vec2 center, double radius, std::size_t count) {
  if (count < kMinMarkers) throw std::invalid_argument("material loop needs at least 32 markers");
  MaterialLoop loop;
  loop.markers.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    loop.markers.push_back({center.x + radius * std::cos(th), center.y + radius * std::sin(th)});
  }
  return loop;
}

MaterialLoop MaterialLoop::rectangle(Vec2 lo, Vec2 hi, std::size_t per_side) {
  if (4 * per_side < kMinMarkers) throw std::invalid_argument("material loop needs at least 32 markers");
  MaterialLoop loop;
  const Vec2 corners[5] = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}, lo};
  for (int s = 0; s < 4; ++s) {
    for (std::size_t k = 0; k < per_side; ++k) {
      const double f = static_cast<double>(k) / static_cast<double>(per_side);
      loop.markers.push_back({corners[s].x + f * (corners[s + 1].x - corners[s].x),
                              corners[s].y + f * (corners[s + 1].y - corners[s].y)});
    }
  }
  return loop;
}

double MaterialLoop::length() const {
  double total = 0.0;
  const std::size_t n = markers.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = markers[k];
    const Vec2& b = markers[(k + 1) % n];
    total += std::hypot(b.x - a.x, b.y - a.y);
  }
  return total;
}

namespace {

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool segments_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

bool MaterialLoop::self_intersects() const {
  const std::size_t n = markers.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(markers[i], markers[(i + 1) % n], markers[j], markers[(j + 1) % n])) return true;
    }
  }
  return false;
}

VelocitySampler frozen_sampler(const Field& u, const Field& v) {
  return [u, v](Vec2 p, double) { return Vec2{sample_bilinear(u, p.x, p.y), sample_bilinear(v, p.x, p.y)}; };
}

void StageVelocities::store(int stage, const Field& u, const Field& v) {
  if (stage < 0 || stage > 2) throw std::out_of_range("stage velocities: stage must be 0, 1 or 2");
  stages_[static_cast<std::size_t>(stage)] = std::make_pair(u, v);
}

VelocitySampler StageVelocities::sampler(double dt) const {
  if (!stages_[0] || !stages_[1]) throw std::logic_error("stage velocities: stages 0 and 1 must be recorded");
  // Two-stage (Heun) steps leave stage 2 empty; its tau = dt/2 velocity is then
  // the mean of the end-point velocities.
  return [stages = stages_, dt](Vec2 p, double tau) {
    auto at = [&](std::size_t k) {
      const auto& [u, v] = *stages[k];
      return Vec2{sample_bilinear(u, p.x, p.y), sample_bilinear(v, p.x, p.y)};
    };
    if (tau == 0.0) return at(0);
    if (tau == dt) return at(1);
    if (stages[2]) return at(2);
    const Vec2 a = at(0);
    const Vec2 b = at(1);
    return Vec2{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  };
}

void StageVelocities::clear() {
  for (auto& s : stages_) s.reset();
}

MaterialLoop advect_loop(const MaterialLoop& loop, const VelocitySampler& velocity, double dt, const GridSpec& g,
                         std::size_t max_markers) {
  const double ylo = g.dy();
  const double yhi = g.Ly - g.dy();
  auto clamp = [&](Vec2 p) { return Vec2{p.x, std::clamp(p.y, ylo, yhi)}; };

  MaterialLoop out;
  out.markers.reserve(loop.markers.size());
  for (const Vec2& p : loop.markers) {
    const Vec2 k0 = velocity(p, 0.0);
    const Vec2 p1 = clamp({p.x + dt * k0.x, p.y + dt * k0.y});
    const Vec2 k1 = velocity(p1, dt);
    const Vec2 p2 = clamp({p.x + 0.25 * dt * (k0.x + k1.x), p.y + 0.25 * dt * (k0.y + k1.y)});
    const Vec2 k2 = velocity(p2, 0.5 * dt);
    out.markers.push_back(clamp({p.x + dt * (k0.x + k1.x + 4.0 * k2.x) / 6.0,
                                 p.y + dt * (k0.y + k1.y + 4.0 * k2.y) / 6.0}));
  }

  const double max_gap = 3.0 * std::max(g.dx(), g.dy());
  const std::size_t n = out.markers.size();
  bool needs = false;
  for (std::size_t k = 0; k < n && !needs; ++k) {
    const Vec2& a = out.markers[k];
    const Vec2& b = out.markers[(k + 1) % n];
    needs = std::hypot(b.x - a.x, b.y - a.y) > max_gap;
  }
  if (!needs || n >= max_markers) return out;

  MaterialLoop refined;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = out.markers[k];
    const Vec2& b = out.markers[(k + 1) % n];
    refined.markers.push_back(a);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int pieces = static_cast<int>(std::ceil(len / max_gap));
    for (int s = 1; s < pieces; ++s) {
      const double f = static_cast<double>(s) / pieces;
      refined.markers.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
    }
  }
  return refined;
}

double circulation(const MaterialLoop& loop, const Field& cx, const Field& cy) {
  require_same_grid(cx, cy, "circulation");
  const std::size_t n = loop.markers.size();
  if (n == 0) return 0.0;
  std::vector<Vec2> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& p = loop.markers[k];
    c[k] = {sample_bilinear(cx, p.x, p.y), sample_bilinear(cy, p.x, p.y)};
  }
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t m = (k + 1) % n;
    const Vec2& a = loop.markers[k];
    const Vec2& b = loop.markers[m];
    total += 0.5 * ((c[k].x + c[m].x) * (b.x - a.x) + (c[k].y + c[m].y) * (b.y - a.y));
  }
  return total;
}

namespace {

Field reciprocal(const Field& rho) {
  Field r = rho;
  for (double& v : r.values()) v = 1.0 / v;
  return r;
}

}  // namespace

std::pair<Field, Field> wave_shift_covector(const CoupledState& state, const Physics& physics) {
  const GridSpec& g = state.grid();
  if (physics.wave.model == WaveModel::None)
    return {Field(g, BcClass::PeriodicX_ExtrapY), Field(g, BcClass::PeriodicX_ExtrapY)};
  auto [jx, jy] = momentum_map_J(state.wave, physics.wave);
  const Field inv = reciprocal(state.fluid.rho);
  const double s = wave_pv_sign(physics.wave.model);
  Field cx = hadamard(jx, inv);
  Field cy = hadamard(jy, inv);
  cx *= s;
  cy *= s;
  return {std::move(cx), std::move(cy)};
}

std::pair<Field, Field> wave_force_covector(const CoupledState& state, const Physics& physics) {
  const GridSpec& g = state.grid();
  Field fx(g, BcClass::PeriodicX_ExtrapY), fy(g, BcClass::PeriodicX_ExtrapY);
  const WaveState& ws = state.wave;
  switch (physics.wave.model) {
    case WaveModel::None: return {fx, fy};
    case WaveModel::Nls: {
      const WaveState drift = nls_drift(ws, physics.wave);
      const Field& fa = drift.first;
      const Field& fb = drift.second;
      fx = hadamard(fa, ddx(ws.b()));
      fx += hadamard(ws.a(), ddx(fb));
      fx -= hadamard(fb, ddx(ws.a()));
      fx -= hadamard(ws.b(), ddx(fa));
      fy = hadamard(fa, ddy(ws.b()));
      fy += hadamard(ws.a(), ddy(fb));
      fy -= hadamard(fb, ddy(ws.a()));
      fy -= hadamard(ws.b(), ddy(fa));
      fx *= physics.wave.hbar;
      fy *= physics.wave.hbar;
      break;
    }
    case WaveModel::Harmonic: {
      fx = hadamard(ws.w(), ddx(ws.w()));
      fx.axpy(-physics.wave.alpha, hadamard(ws.zeta(), ddx(ws.zeta())));
      fy = hadamard(ws.w(), ddy(ws.w()));
      fy.axpy(-physics.wave.alpha, hadamard(ws.zeta(), ddy(ws.zeta())));
      fx *= -1.0;
      fy *= -1.0;
      break;
    }
  }
  const Field inv = reciprocal(state.fluid.rho);
  return {hadamard(fx, inv), hadamard(fy, inv)};
}

DiagnosticsRecord record(const CoupledState& state, const Diagnosed& d, const Physics& physics,
                         const MaterialLoop* loop) {
  const GridSpec& g = state.grid();
  DiagnosticsRecord r;
  r.t = state.t;
  // Kinetic energy through the flux stencil: -1/2 <psi, div(rho grad psi)> is the
  // face-based discrete 1/2 int rho |u|^2 (psi vanishes on the walls).
  const Field aq = flux_divergence(state.fluid.rho, d.psi);
  double e = 0.0;
  for (int j = 1; j < g.ny - 1; ++j) {
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) row += d.psi(i, j) * aq(i, j);
    e += row;
  }
  r.E_fluid = -0.5 * e * g.dx() * g.dy();
  r.E_wave = wave_energy(state.wave, physics.wave);
  r.E_total = r.E_fluid + r.E_wave;
  r.int_N = integrate(wave_action_density(state.wave, physics.wave));
  r.int_rho = integrate(state.fluid.rho);
  r.int_rho2 = inner(state.fluid.rho, state.fluid.rho);
  r.int_Z = integrate(state.fluid.Z);
  r.int_QF = integrate(d.Q_F);
  r.int_QW = integrate(d.Q_W);
  r.max_QF = d.Q_F.max_abs();
  r.max_QW = d.Q_W.max_abs();
  r.elliptic_residual = d.elliptic_residual;
  if (loop != nullptr && !loop->markers.empty()) {
    r.circ_fluid = circulation(*loop, d.u, d.v);
    auto [cx, cy] = wave_shift_covector(state, physics);
    r.circ_wave = circulation(*loop, cx, cy);
    r.circ_total = r.circ_fluid - r.circ_wave;
  }
  return r;
}

KelvinReport kelvin_balance(std::span<const KelvinFrame> history, const Physics& physics) {
  KelvinReport rep;
  const std::size_t n = history.size();
  if (n < 3) return rep;
  std::vector<Diagnosed> diag;
  diag.reserve(n);
  for (const KelvinFrame& f : history) diag.push_back(diagnose(f.state, physics));

  double max_res = 0.0, max_scale = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const KelvinFrame& prev = history[k - 1];
    const KelvinFrame& cur = history[k];
    const KelvinFrame& next = history[k + 1];
    const double span = next.state.t - prev.state.t;
    const double c_prev = circulation(prev.loop, diag[k - 1].u, diag[k - 1].v);
    const double c_next = circulation(next.loop, diag[k + 1].u, diag[k + 1].v);
    const double rate = (c_next - c_prev) / span;
    const double local = (circulation(cur.loop, diag[k + 1].u, diag[k + 1].v) -
                          circulation(cur.loop, diag[k - 1].u, diag[k - 1].v)) /
                         span;
    auto [fx, fy] = wave_force_covector(cur.state, physics);
    const double force = circulation(cur.loop, fx, fy);
    const double residual = rate - force;
    const double scale = std::max({std::abs(local), std::abs(rate - local), std::abs(force)});
    rep.t.push_back(cur.state.t);
    rep.rate.push_back(rate);
    rep.wave_force.push_back(force);
    rep.local_rate.push_back(local);
    rep.residual.push_back(residual);
    rep.scale.push_back(scale);
    max_res = std::max(max_res, std::abs(residual));
    max_scale = std::max(max_scale, scale);
    if (cur.loop.self_intersects()) rep.loop_degenerate = true;
  }
  rep.relative_residual = max_scale > 0.0 ? max_res / max_scale : 0.0;
  return rep;
}

}  // namespace wmfi
