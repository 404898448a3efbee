#include "wmfi/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

namespace wmfi {

namespace fs = std::filesystem;

CoupledState init_spinup(const GridSpec& g) {
  g.validate();
  const double pi = std::numbers::pi;
  CoupledState s;
  s.fluid.Z = Field::from_function(g, BcClass::PeriodicX_NeumannY, [&](double x, double y) {
    return std::sin(0.16 * pi * x) * std::sin(0.16 * pi * y) + 0.4 * std::cos(0.12 * pi * x) * std::cos(0.12 * pi * y) +
           0.3 * std::cos(0.2 * pi * x) * std::cos(0.08 * pi * y) + 0.02 * std::sin(0.04 * pi * y) +
           0.02 * std::sin(0.04 * pi * x);
  });
  s.fluid.rho = Field::from_function(g, BcClass::PeriodicX_NeumannY, [&](double x, double y) {
    return 1.0 + 0.2 * std::sin(0.04 * pi * x) * std::sin(0.04 * pi * y);
  });
  s.wave = WaveState::zeros(g);
  s.t = 0.0;
  return s;
}

CoupledState init_stage2(const GridSpec& g, const CoupledState& spun, bool zero_fluid_pv) {
  if (!(spun.grid() == g)) throw GridMismatch("init_stage2: spun-up state lives on a different grid");
  CoupledState s;
  s.fluid.rho = spun.fluid.rho;
  // The spun-up state carries no waves, so its Z is its Q_F; the new waves
  // start with b = 0 and hence Q_W = 0, so Z = Q_F again.
  s.fluid.Z = spun.fluid.Z;
  if (zero_fluid_pv) s.fluid.Z.fill(0.0);
  s.wave = WaveState::zeros(g);
  s.wave.first = Field::from_function(g, BcClass::PeriodicX_NeumannY, [](double x, double y) {
    return std::exp(-((x - 25.0) * (x - 25.0) + (y - 25.0) * (y - 25.0)));
  });
  s.t = 0.0;
  return s;
}

AsyncWriter::AsyncWriter() : worker_([this] { loop(); }) {}

AsyncWriter::~AsyncWriter() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

void AsyncWriter::submit(std::function<void()> job) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    queue_.push_back(std::move(job));
  }
  cv_.notify_one();
}

void AsyncWriter::flush() {
  std::unique_lock<std::mutex> lock(mu_);
  idle_.wait(lock, [this] { return queue_.empty() && !busy_; });
  if (error_) {
    std::exception_ptr e = error_;
    error_ = nullptr;
    std::rethrow_exception(e);
  }
}

void AsyncWriter::loop() {
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
    if (queue_.empty()) return;
    std::function<void()> job = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    try {
      job();
    } catch (...) {
      std::lock_guard<std::mutex> guard(mu_);
      if (!error_) error_ = std::current_exception();
    }
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_.notify_all();
  }
}

std::string csv_header() {
  std::string out;
  for (const std::string& c : DiagnosticsRecord::columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out + '\n';
}

std::string csv_row(const DiagnosticsRecord& r) {
  std::string out;
  char buf[40];
  for (double v : r.values()) {
    if (!out.empty()) out += ',';
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  }
  return out + '\n';
}

std::string stage_dir_name(const SimConfig& c, int index) {
  return "stage" + std::to_string(index) + "_" + to_string(c.stages.at(static_cast<std::size_t>(index)).type);
}

CoupledState enter_stage(const SimConfig& c, int index, const CoupledState* previous) {
  const StageSpec& spec = c.stages.at(static_cast<std::size_t>(index));
  const CoupledState base = previous ? *previous : init_spinup(c.grid);
  CoupledState s;
  if (spec.type == StageType::SpinUp) {
    s = base;
    s.wave = WaveState::zeros(c.grid);
    if (previous) {
      // Waves removed: the fluid keeps its Q_F, so Z takes Q_F's value.
      const Physics p = stage_physics(c, StageType::Coupled);
      s.fluid.Z = diagnose(*previous, p).Q_F;
      s.fluid.Z.set_bc(BcClass::PeriodicX_NeumannY);
    }
  } else {
    CoupledState spun = base;
    if (previous && previous->wave.first.max_abs() + previous->wave.second.max_abs() > 0.0) {
      const Physics p = stage_physics(c, StageType::Coupled);
      spun.fluid.Z = diagnose(*previous, p).Q_F;
      spun.fluid.Z.set_bc(BcClass::PeriodicX_NeumannY);
    }
    s = init_stage2(c.grid, spun, spec.zero_fluid_pv);
  }
  s.t = 0.0;
  return s;
}

namespace {

double stage_duration(const SimConfig& c, const StageSpec& s) {
  return s.type == StageType::SpinUp ? s.t_spin : c.t_end;
}

double next_multiple(double t, double h) {
  if (!(h > 0.0)) return std::numeric_limits<double>::infinity();
  const double k = std::floor(t / h + 1e-9);
  return (k + 1.0) * h;
}

bool on_multiple(double t, double h) {
  if (!(h > 0.0)) return false;
  const double k = std::round(t / h);
  return std::abs(t - k * h) <= 1e-9 * std::max(1.0, std::abs(t));
}

std::string snapshot_name(std::uint64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%08llu.wmfi", static_cast<unsigned long long>(step));
  return buf;
}

}  // namespace

StageResult run_stage(const SimConfig& c, int index, StageStart start, AsyncWriter* writer, const RunOptions& opts) {
  const StageSpec& spec = c.stages.at(static_cast<std::size_t>(index));
  const Physics physics = stage_physics(c, spec.type);
  const NoiseSpec noise = build_noise(c);
  noise.validate(c.grid);
  NoiseClock clock(noise.seed);
  const double T = stage_duration(c, spec);
  const GridSpec& g = c.grid;

  StageResult res;
  res.type = spec.type;
  res.index = index;
  if (opts.write_files && writer) {
    res.dir = (fs::path(c.output_dir) / stage_dir_name(c, index)).string();
    fs::create_directories(res.dir);
  }
  const bool files = !res.dir.empty();
  const std::string csv_path = files ? (fs::path(res.dir) / "diagnostics.csv").string() : std::string{};
  if (files) {
    writer->submit([csv_path] {
      std::ofstream out(csv_path, std::ios::trunc);
      out << csv_header();
      if (!out) throw std::runtime_error("cannot write '" + csv_path + "'");
    });
  }

  CoupledState state = std::move(start.state);
  std::uint64_t step = start.step;
  std::optional<MaterialLoop> loop = std::move(start.loop);
  if (!loop)
    loop = MaterialLoop::circle({c.loop.center_x, c.loop.center_y}, c.loop.radius,
                                static_cast<std::size_t>(c.loop.markers));
  const nlohmann::json config_json = to_json(c);

  auto make_snapshot = [&](const CoupledState& s, const Diagnosed& d) {
    Snapshot snap;
    snap.state = s;
    snap.step = step;
    snap.stage = to_string(spec.type);
    snap.stage_index = index;
    snap.wave_model = physics.wave.model;
    attach_diagnostics(snap, d, physics.wave);
    snap.loop = loop;
    snap.extra = {{"config", config_json}};
    return snap;
  };
  auto emit_snapshot = [&](const CoupledState& s, const Diagnosed& d) {
    if (!files) return;
    const std::string path = (fs::path(res.dir) / snapshot_name(step)).string();
    writer->submit([snap = make_snapshot(s, d), path] { write_snapshot(path, snap); });
  };
  auto emit_record = [&](const CoupledState& s, const Diagnosed& d) {
    DiagnosticsRecord r = record(s, d, physics, loop ? &*loop : nullptr);
    res.records.push_back(r);
    if (files)
      writer->submit([csv_path, row = csv_row(r)] {
        std::ofstream out(csv_path, std::ios::app);
        out << row;
      });
  };
  auto fail = [&](const CoupledState& last, const Diagnosed* d, const std::string& what) {
    if (files) {
      Snapshot snap;
      if (d) {
        snap = make_snapshot(last, *d);
      } else {
        snap.state = last;
        snap.step = step;
        snap.stage = to_string(spec.type);
        snap.stage_index = index;
        snap.wave_model = physics.wave.model;
        snap.loop = loop;
      }
      snap.extra["postmortem"] = true;
      snap.extra["error"] = what;
      const std::string path = (fs::path(res.dir) / "postmortem.wmfi").string();
      writer->submit([snap = std::move(snap), path] { write_snapshot(path, snap); });
      writer->flush();
    }
  };

  Diagnosed d;
  try {
    d = diagnose(state, physics);
  } catch (const NonPositiveDensity&) {
    fail(state, nullptr, "non-positive density in the initial state");
    throw NumericalBlowUp(state.t, 0);
  }
  emit_record(state, d);
  if (!start.resumed) emit_snapshot(state, d);

  StageVelocities velocities;
  StepHooks hooks;
  hooks.on_stage = [&](int k, double, const Diagnosed& sd) { velocities.store(k, sd.u, sd.v); };
  const double eps = 1e-12 * std::max(1.0, T);
  double report_at = 0.1 * T;

  while (T - state.t > eps) {
    const double target = std::min({T, next_multiple(state.t, c.diagnostics_interval),
                                    next_multiple(state.t, c.snapshot_interval)});
    double dt = c.dt_override ? *c.dt_override : suggest_dt(g, d, c.cfl, physics.wave);
    const double remaining = target - state.t;
    const double n = std::ceil(remaining / dt * (1.0 - 1e-12));
    const bool landing = n <= 1.0;
    dt = landing ? remaining : remaining / n;

    velocities.clear();
    hooks.initial = &d;
    CoupledState next;
    Diagnosed nd;
    try {
      if (c.noise)
        next = stratonovich_step(state, dt, noise, step + 1, clock, physics, hooks);
      else
        next = ssp_rk3_step(state, dt, physics, hooks);
      if (landing) next.t = target;
      nd = diagnose(next, physics);
    } catch (const NumericalBlowUp& e) {
      fail(state, &d, e.what());
      throw;
    } catch (const NonPositiveDensity&) {
      fail(state, &d, "non-positive density");
      throw NumericalBlowUp(state.t + dt, 3);
    } catch (const EllipticNotConverged& e) {
      fail(state, &d, e.what());
      throw NumericalBlowUp(state.t, 0);
    }
    if (loop) loop = advect_loop(*loop, velocities.sampler(dt), dt, g);
    ++step;
    ++res.steps;
    state = std::move(next);
    d = std::move(nd);

    const bool at_end = T - state.t <= eps;
    if (on_multiple(state.t, c.diagnostics_interval) || at_end) emit_record(state, d);
    if (on_multiple(state.t, c.snapshot_interval) || at_end) emit_snapshot(state, d);
    if (opts.log && state.t >= report_at) {
      *opts.log << "[" << to_string(spec.type) << "] t=" << state.t << "/" << T << " step " << step
                << " dt=" << dt << "\n";
      report_at += 0.1 * T;
    }
  }

  if (writer) writer->flush();
  res.final_state = std::move(state);
  res.last_step = step;
  res.loop = std::move(loop);
  return res;
}

RunResult run(const SimConfig& c, const RunOptions& opts) {
  c.validate();
  RunResult out;
  std::optional<AsyncWriter> writer;
  if (opts.write_files) {
    writer.emplace();
    fs::create_directories(c.output_dir);
    const std::string cfg_path = (fs::path(c.output_dir) / "config.json").string();
    std::ofstream(cfg_path) << to_json(c).dump(2) << '\n';
  }

  int first = 0;
  std::optional<StageStart> resume;
  if (c.restart) {
    Snapshot snap = read_snapshot(*c.restart);
    if (!(snap.state.grid() == c.grid)) throw ConfigError("restart snapshot grid differs from the config grid");
    if (snap.stage_index < 0 || snap.stage_index >= static_cast<int>(c.stages.size()) ||
        to_string(c.stages[static_cast<std::size_t>(snap.stage_index)].type) != snap.stage)
      throw ConfigError("restart snapshot stage '" + snap.stage + "' does not match the configured stages");
    first = snap.stage_index;
    resume = StageStart{std::move(snap.state), snap.step, std::move(snap.loop), true};
  }

  std::optional<CoupledState> previous;
  std::uint64_t step = 0;
  try {
    for (int k = first; k < static_cast<int>(c.stages.size()); ++k) {
      StageStart start;
      if (resume) {
        start = std::move(*resume);
        resume.reset();
      } else {
        start.state = enter_stage(c, k, previous ? &*previous : nullptr);
        start.step = step;
      }
      StageResult r = run_stage(c, k, std::move(start), writer ? &*writer : nullptr, opts);
      previous = r.final_state;
      step = r.last_step;
      out.stages.push_back(std::move(r));
    }
  } catch (const NumericalBlowUp& e) {
    if (writer) writer->flush();
    out.exit_code = 3;
    out.message = e.what();
    return out;
  }
  if (writer) writer->flush();
  return out;
}

}  // namespace wmfi
