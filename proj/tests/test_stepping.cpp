#include "doctest.h"
#include "support.hpp"

#include "wmfi/stepping.hpp"

using namespace wmfi;
using namespace wmfi::test;

namespace {

constexpr BcClass kDir = BcClass::PeriodicX_DirichletY;
constexpr BcClass kNeu = BcClass::PeriodicX_NeumannY;

Physics physics(WaveModel m, bool frozen = false) {
  Physics p;
  p.wave.model = m;
  p.frozen_flow = frozen;
  return p;
}

CoupledState smooth_state(const GridSpec& g, std::uint64_t seed, bool waves) {
  CoupledState s;
  s.fluid.Z = 0.2 * smooth_random(g, kNeu, seed);
  s.fluid.rho = Field::from_function(g, kNeu, [](double, double) { return 1.0; });
  s.fluid.rho.axpy(0.1, smooth_random(g, kNeu, seed + 1));
  s.wave = WaveState::zeros(g);
  if (waves) s.wave = WaveState{0.5 * smooth_random(g, kNeu, seed + 2), 0.5 * smooth_random(g, kNeu, seed + 3)};
  return s;
}

NoiseSpec noise_spec(const GridSpec& g, double amplitude, std::uint64_t seed) {
  NoiseSpec n;
  n.seed = seed;
  for (int k = 1; k <= 2; ++k) {
    Field s = Field::from_function(g, kDir, [&](double x, double y) {
      return std::sin(2 * pi * k * x / g.Lx) * std::sin(pi * y / g.Ly);
    });
    n.modes.push_back({zero_walls(std::move(s)), amplitude});
  }
  return n;
}

double distance(const CoupledState& a, const CoupledState& b) {
  return std::max({(a.fluid.Z - b.fluid.Z).max_abs(), (a.fluid.rho - b.fluid.rho).max_abs(),
                   (a.wave.first - b.wave.first).max_abs(), (a.wave.second - b.wave.second).max_abs()});
}

CoupledState integrate_rk3(CoupledState s, double T, int n, const Physics& p, const StepHooks& hooks = {}) {
  const double dt = T / n;
  for (int k = 0; k < n; ++k) s = ssp_rk3_step(s, dt, p, hooks);
  return s;
}

}  // namespace

TEST_CASE("a state with zero tendency is a fixed point, bit-wise") {
  const GridSpec g = square(16);
  CoupledState s = smooth_state(g, 1, false);
  s.fluid.Z.fill(0.0);
  const CoupledState next = ssp_rk3_step(s, 0.3, physics(WaveModel::Nls));
  CHECK(next.fluid == s.fluid);
  CHECK(next.wave == s.wave);
  CHECK(next.t == 0.3);
}

TEST_CASE("SSP-RK3 reproduces the cubic Taylor polynomial on a linear problem") {
  const GridSpec g = square(16);
  CoupledState s = smooth_state(g, 2, true);
  // Zero out the NLS operator (flat profile, kappa = 0) and inject da/dt = lambda a.
  s.wave.first.fill(1.0);
  s.wave.second.fill(0.0);
  Physics p = physics(WaveModel::Nls, true);
  p.wave.kappa = 0.0;
  for (double lambda : {-0.7, 0.4}) {
    StepHooks hooks;
    hooks.extra_wave_tendency = [&](const CoupledState& st, WaveState& t) { t.first.axpy(lambda, st.wave.first); };
    const double dt = 0.5, z = lambda * dt;
    const CoupledState next = ssp_rk3_step(s, dt, p, hooks);
    const double expect = 1 + z + z * z / 2 + z * z * z / 6;
    CHECK(std::abs(next.wave.first(3, 4) - expect) <= 1e-14);
    CHECK(next.wave.second.max_abs() == 0.0);
  }
}

TEST_CASE("plane wave: third-order convergence to the semi-discrete solution") {
  const GridSpec g = square(32);
  const double k = 2 * pi * 2 / g.Lx, dx = g.dx(), kappa = 0.5;
  const double omega_h = (1 - std::cos(k * dx)) / (dx * dx) + kappa;
  CoupledState s;
  s.fluid = FluidState::zeros(g);
  s.fluid.rho.fill(1.0);
  s.wave.first = Field::from_function(g, kNeu, [&](double x, double) { return std::cos(k * x); });
  s.wave.second = Field::from_function(g, kNeu, [&](double x, double) { return std::sin(k * x); });
  Physics p = physics(WaveModel::Nls, true);
  p.wave.kappa = kappa;
  const double T = 2.0;
  auto err = [&](int n) {
    const CoupledState e = integrate_rk3(s, T, n, p);
    double m = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      const double ph = k * g.x(i) - omega_h * T;
      m = std::max({m, std::abs(e.wave.first(i, 7) - std::cos(ph)), std::abs(e.wave.second(i, 7) - std::sin(ph))});
    }
    return m;
  };
  const double e1 = err(10), e2 = err(20);
  CHECK(e1 > 1e-10);
  CHECK(e1 / e2 >= 7.5);
}

TEST_CASE("coupled nonlinear system converges at third order in time") {
  const GridSpec g = square(24);
  const CoupledState s = smooth_state(g, 3, true);
  const Physics p = physics(WaveModel::Nls);
  const double T = 0.4;
  const CoupledState a = integrate_rk3(s, T, 4, p), b = integrate_rk3(s, T, 8, p), c = integrate_rk3(s, T, 16, p);
  const double ratio = distance(a, b) / distance(b, c);
  CHECK(ratio >= 6.0);
  CHECK(ratio <= 10.0);
}

TEST_CASE("stage observer sees converged elliptic solves at the right stage times") {
  const GridSpec g = square(24);
  const CoupledState s = smooth_state(g, 4, true);
  const Physics p = physics(WaveModel::Nls);
  std::vector<std::pair<int, double>> seen;
  StepHooks hooks;
  hooks.on_stage = [&](int stage, double tau, const Diagnosed& d) {
    seen.emplace_back(stage, tau);
    CHECK(d.elliptic_residual <= p.elliptic.rel_tol);
  };
  ssp_rk3_step(s, 0.2, p, hooks);
  REQUIRE(seen.size() == 3);
  CHECK(seen[0] == std::pair{0, 0.0});
  CHECK(seen[1] == std::pair{1, 0.2});
  CHECK(seen[2] == std::pair{2, 0.1});
}

TEST_CASE("a supplied initial diagnosis is used as-is") {
  const GridSpec g = square(16);
  const CoupledState s = smooth_state(g, 5, true);
  const Physics p = physics(WaveModel::Nls);
  const Diagnosed d = diagnose(s, p);
  StepHooks hooks;
  hooks.initial = &d;
  CHECK(ssp_rk3_step(s, 0.1, p, hooks) == ssp_rk3_step(s, 0.1, p));
}

TEST_CASE("blow-up detection") {
  const GridSpec g = square(16);
  CoupledState s = smooth_state(g, 6, true);
  s.t = 2.5;
  s.wave.first(4, 4) = std::nan("");
  try {
    ssp_rk3_step(s, 0.1, physics(WaveModel::Nls, true));
    FAIL("expected NumericalBlowUp");
  } catch (const NumericalBlowUp& e) {
    CHECK(std::string(e.what()).rfind("numerical blow-up at t=2.5", 0) == 0);
    CHECK(e.time() == 2.5);
    CHECK(e.stage() == 0);
  }
  CHECK_THROWS_AS(ssp_rk3_step(smooth_state(g, 6, true), 0.0, physics(WaveModel::Nls)), std::invalid_argument);
  CHECK_THROWS_AS(ssp_rk3_step(smooth_state(g, 6, true), -1.0, physics(WaveModel::Nls)), std::invalid_argument);
}

TEST_CASE("counter-based normals") {
  CHECK(counter_normal(7, 3, 1) == counter_normal(7, 3, 1));
  CHECK(counter_normal(7, 3, 1) != counter_normal(8, 3, 1));
  CHECK(counter_normal(7, 3, 1) != counter_normal(7, 4, 1));
  CHECK(counter_normal(7, 3, 1) != counter_normal(7, 3, 2));
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = counter_normal(11, static_cast<std::uint64_t>(k), 0);
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n, var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(n));
  // Standard error of the sample variance is sqrt(2 / n).
  CHECK(std::abs(var - 1.0) <= 3.0 * std::sqrt(2.0 / n));

  NoiseClock clock(5);
  const auto dw = clock.increments(0, 3, 0.25);
  CHECK(dw[1] == 0.5 * counter_normal(5, 0, 1));
  CHECK_THROWS_AS(clock.increments(0, 3, 0.25), std::logic_error);
  CHECK_NOTHROW(clock.increments(2, 3, 0.25));
  CHECK(*clock.last_step() == 2);
}

TEST_CASE("Stratonovich-Heun step") {
  const GridSpec g = square(16);
  const CoupledState s = smooth_state(g, 7, true);
  const Physics p = physics(WaveModel::Nls);

  SUBCASE("inactive noise falls back to SSP-RK3 bit-wise") {
    NoiseClock clock(1);
    const CoupledState a = stratonovich_step(s, 0.1, noise_spec(g, 0.0, 1), 0, clock, p);
    CHECK(a == ssp_rk3_step(s, 0.1, p));
  }
  SUBCASE("same seed reproduces the path; a different seed does not") {
    auto path = [&](std::uint64_t seed) {
      const NoiseSpec n = noise_spec(g, 0.3, seed);
      NoiseClock clock(seed);
      CoupledState x = s;
      for (std::uint64_t k = 0; k < 5; ++k) x = stratonovich_step(x, 0.05, n, k, clock, p);
      return x;
    };
    CHECK(path(3) == path(3));
    CHECK(distance(path(3), path(4)) > 0.0);
  }
  SUBCASE("per-path mass conservation over an ensemble") {
    const double m0 = integrate(s.fluid.rho);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      const NoiseSpec n = noise_spec(g, 0.5, seed);
      NoiseClock clock(seed);
      CoupledState x = s;
      for (std::uint64_t k = 0; k < 4; ++k) x = stratonovich_step(x, 0.05, n, k, clock, p);
      worst = std::max(worst, std::abs(integrate(x.fluid.rho) - m0) / m0);
    }
    CHECK(worst <= 1e-12);
  }
  SUBCASE("path distance to the noise-free Heun path shrinks with the amplitude") {
    auto path = [&](double amp) {
      NoiseSpec n = noise_spec(g, amp, 9);
      n.fallback_deterministic = false;
      NoiseClock clock(9);
      CoupledState x = s;
      for (std::uint64_t k = 0; k < 4; ++k) x = stratonovich_step(x, 0.05, n, k, clock, p);
      return x;
    };
    const CoupledState ref = path(0.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double amp : {0.4, 0.1, 0.025, 0.0}) {
      const double d = distance(path(amp), ref);
      CHECK(d < prev);
      prev = d;
    }
    CHECK(prev == 0.0);
  }
  SUBCASE("noise spec validation") {
    NoiseSpec bad = noise_spec(g, 1.0, 0);
    CHECK_NOTHROW(bad.validate(g));
    bad.modes[0].stream(3, 0) = 1.0;
    CHECK_THROWS(bad.validate(g));
    CHECK_THROWS(noise_spec(g, 1.0, 0).validate(square(8)));
  }
}

TEST_CASE("suggest_dt") {
  const GridSpec g = square(128);
  Diagnosed d;
  d.u = Field::from_function(g, kDir, [](double, double) { return 1.0; });
  d.v = Field(g, kDir);
  WaveParams none;
  none.model = WaveModel::None;
  CHECK(suggest_dt(g, d, 0.4, none) == doctest::Approx(0.15625));

  WaveParams nls;
  const double h = 50.0 / 128;
  CHECK(suggest_dt(g, d, 0.4, nls) == doctest::Approx(0.4 * h * h / 4));

  // The dispersive limit quarters when the resolution doubles.
  const GridSpec fine = square(256);
  Diagnosed df;
  df.u = Field(fine, kDir);
  df.v = Field(fine, kDir);
  d.u.fill(0.0);
  CHECK(suggest_dt(g, d, 0.4, nls) / suggest_dt(fine, df, 0.4, nls) == doctest::Approx(4.0));

  // Quiescent flow without waves hits the velocity floor.
  CHECK(suggest_dt(g, d, 0.4, none) == doctest::Approx(0.4 * h / kVelocityFloor));

  WaveParams harm;
  harm.model = WaveModel::Harmonic;
  harm.alpha = 4.0;
  CHECK(suggest_dt(g, d, 0.4, harm) == doctest::Approx(0.2));
  CHECK_THROWS(suggest_dt(g, d, 0.0, none));
}
