#include "wmfi/stepping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace wmfi {

namespace {

std::string blowup_message(double t, int stage) {
  std::ostringstream os;
  os << "numerical blow-up at t=" << t << ", stage " << stage;
  return os.str();
}

// state + sum_k c_k * tendency_k, applied field-wise.
CoupledState advance(const CoupledState& s, std::initializer_list<std::pair<double, const Tendency*>> terms) {
  CoupledState out = s;
  for (const auto& [c, t] : terms) {
    out.fluid.Z.axpy(c, t->fluid.Z);
    out.fluid.rho.axpy(c, t->fluid.rho);
    out.wave.first.axpy(c, t->wave.first);
    out.wave.second.axpy(c, t->wave.second);
  }
  return out;
}

void check_finite(const CoupledState& s, double t, int stage) {
  if (!s.fluid.Z.all_finite() || !s.fluid.rho.all_finite() || !s.wave.first.all_finite() ||
      !s.wave.second.all_finite())
    throw NumericalBlowUp(t, stage);
}

Diagnosed diagnose_stage(const CoupledState& s, const Physics& physics, double t, int stage) {
  try {
    return diagnose(s, physics);
  } catch (const NonPositiveDensity&) {
    throw NumericalBlowUp(t, stage);
  }
}

Tendency stage_tendency(const CoupledState& s, const Diagnosed& d, const Field& advecting, const Physics& physics,
                        const StepHooks& hooks) {
  Tendency t = coupled_rhs(s, d, advecting, physics);
  if (hooks.extra_wave_tendency) hooks.extra_wave_tendency(s, t.wave);
  return t;
}

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

NumericalBlowUp::NumericalBlowUp(double t, int stage)
    : std::runtime_error(blowup_message(t, stage)), t_(t), stage_(stage) {}

CoupledState ssp_rk3_step(const CoupledState& s, double dt, const Physics& physics, const StepHooks& hooks) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("ssp_rk3_step: dt must be positive");

  const Diagnosed d0 = hooks.initial ? *hooks.initial : diagnose_stage(s, physics, s.t, 0);
  if (hooks.on_stage) hooks.on_stage(0, 0.0, d0);
  const Tendency l0 = stage_tendency(s, d0, d0.psi, physics, hooks);
  CoupledState s1 = advance(s, {{dt, &l0}});
  check_finite(s1, s.t, 0);

  const Diagnosed d1 = diagnose_stage(s1, physics, s.t, 1);
  if (hooks.on_stage) hooks.on_stage(1, dt, d1);
  const Tendency l1 = stage_tendency(s1, d1, d1.psi, physics, hooks);
  CoupledState s2 = advance(s, {{0.25 * dt, &l0}, {0.25 * dt, &l1}});
  check_finite(s2, s.t, 1);

  const Diagnosed d2 = diagnose_stage(s2, physics, s.t, 2);
  if (hooks.on_stage) hooks.on_stage(2, 0.5 * dt, d2);
  const Tendency l2 = stage_tendency(s2, d2, d2.psi, physics, hooks);
  const double sixth = dt / 6.0;
  CoupledState next = advance(s, {{sixth, &l0}, {sixth, &l1}, {4.0 * sixth, &l2}});
  check_finite(next, s.t, 2);
  next.t = s.t + dt;
  return next;
}

bool NoiseSpec::active() const {
  return std::any_of(modes.begin(), modes.end(), [](const NoiseMode& m) { return m.amplitude != 0.0; });
}

void NoiseSpec::validate(const GridSpec& g) const {
  for (const NoiseMode& m : modes) {
    if (!(m.stream.grid() == g)) throw std::invalid_argument("noise: mode lives on a different grid");
    if (m.stream.bc() != BcClass::PeriodicX_DirichletY)
      throw std::invalid_argument("noise: mode stream function must be DirichletY");
    if (!std::isfinite(m.amplitude) || !m.stream.all_finite())
      throw std::invalid_argument("noise: non-finite mode");
    for (int i = 0; i < g.nx; ++i) {
      if (m.stream(i, 0) != m.stream(0, 0) || m.stream(i, g.ny - 1) != m.stream(0, g.ny - 1))
        throw std::invalid_argument("noise: mode stream function must be constant along each wall");
    }
  }
}

double counter_normal(std::uint64_t seed, std::uint64_t step, std::uint64_t mode) {
  const std::uint64_t key = splitmix(seed ^ splitmix(step ^ splitmix(mode)));
  const double u1 = unit_open(splitmix(key));
  const double u2 = unit_open(splitmix(key ^ 0xd1b54a32d192ed03ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> NoiseClock::increments(std::uint64_t step, std::size_t modes, double dt) {
  if (last_ && step <= *last_)
    throw std::logic_error("noise clock: step index " + std::to_string(step) + " already drawn");
  last_ = step;
  std::vector<double> dw(modes);
  const double sd = std::sqrt(dt);
  for (std::size_t i = 0; i < modes; ++i) dw[i] = sd * counter_normal(seed_, step, i);
  return dw;
}

CoupledState stratonovich_step(const CoupledState& s, double dt, const NoiseSpec& noise, std::uint64_t step,
                               NoiseClock& clock, const Physics& physics, const StepHooks& hooks) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("stratonovich_step: dt must be positive");
  const std::vector<double> dw = clock.increments(step, noise.modes.size(), dt);
  if (!noise.active() && noise.fallback_deterministic) return ssp_rk3_step(s, dt, physics, hooks);

  const GridSpec& g = s.grid();
  Field noise_psi(g, BcClass::PeriodicX_DirichletY);
  for (std::size_t i = 0; i < noise.modes.size(); ++i)
    noise_psi.axpy(noise.modes[i].amplitude * dw[i] / dt, noise.modes[i].stream);

  auto effective = [&](const Diagnosed& d) {
    Field p = d.psi;
    p += noise_psi;
    return p;
  };

  const Diagnosed d0 = hooks.initial ? *hooks.initial : diagnose_stage(s, physics, s.t, 0);
  if (hooks.on_stage) hooks.on_stage(0, 0.0, d0);
  const Tendency l0 = stage_tendency(s, d0, effective(d0), physics, hooks);
  CoupledState predictor = advance(s, {{dt, &l0}});
  check_finite(predictor, s.t, 0);

  const Diagnosed d1 = diagnose_stage(predictor, physics, s.t, 1);
  if (hooks.on_stage) hooks.on_stage(1, dt, d1);
  const Tendency l1 = stage_tendency(predictor, d1, effective(d1), physics, hooks);
  CoupledState next = advance(s, {{0.5 * dt, &l0}, {0.5 * dt, &l1}});
  check_finite(next, s.t, 1);
  next.t = s.t + dt;
  return next;
}

double suggest_dt(const GridSpec& g, const Diagnosed& d, double cfl, const WaveParams& wave) {
  if (!(cfl > 0.0)) throw std::invalid_argument("suggest_dt: cfl must be positive");
  const double h = std::min(g.dx(), g.dy());
  double umax = 0.0;
  auto u = d.u.values();
  auto v = d.v.values();
  for (std::size_t k = 0; k < u.size(); ++k) umax = std::max(umax, std::hypot(u[k], v[k]));
  double dt = cfl * h / std::max(umax, kVelocityFloor);
  if (wave.model == WaveModel::Nls) dt = std::min(dt, cfl * h * h / (0.5 * kLaplacianStencilConstant));
  if (wave.model == WaveModel::Harmonic && wave.alpha > 0.0) dt = std::min(dt, cfl / std::sqrt(wave.alpha));
  return dt;
}

}  // namespace wmfi
