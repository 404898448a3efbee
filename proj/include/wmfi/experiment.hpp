#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "wmfi/config.hpp"
#include "wmfi/diagnostics.hpp"
#include "wmfi/snapshot.hpp"

namespace wmfi {

/// Spin-up initial data: the multi-mode Q_F pattern, rho = 1 + 0.2 sin sin,
/// no waves, Z = Q_F.
CoupledState init_spinup(const GridSpec& g);

/// Second-stage initial data: Gaussian wave packet at (25, 25) in a (or zeta),
/// b = 0 (or w = 0), rho from the spun-up state, Q_F from it or zero.
CoupledState init_stage2(const GridSpec& g, const CoupledState& spun, bool zero_fluid_pv);

/// Background writer: jobs run in submission order on one thread so the
/// stepping loop never waits on the disk. The first job error is kept and
/// rethrown by flush().
class AsyncWriter {
 public:
  AsyncWriter();
  ~AsyncWriter();
  AsyncWriter(const AsyncWriter&) = delete;
  AsyncWriter& operator=(const AsyncWriter&) = delete;

  void submit(std::function<void()> job);
  /// Blocks until the queue is empty.
  void flush();

 private:
  void loop();

  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_;
  std::deque<std::function<void()>> queue_;
  bool busy_ = false;
  bool stop_ = false;
  std::exception_ptr error_;
  std::thread worker_;
};

/// Writes DiagnosticsRecord rows with 17 significant digits.
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& r);

struct StageResult {
  StageType type = StageType::SpinUp;
  int index = 0;
  /// Output directory of the stage ("" when files are disabled).
  std::string dir;
  CoupledState final_state;
  std::vector<DiagnosticsRecord> records;
  std::uint64_t steps = 0;
  std::uint64_t last_step = 0;
  std::optional<MaterialLoop> loop;
};

struct RunResult {
  /// 0 success, 3 numerical blow-up.
  int exit_code = 0;
  std::string message;
  std::vector<StageResult> stages;
};

struct RunOptions {
  bool write_files = true;
  /// Progress lines; null keeps quiet.
  std::ostream* log = nullptr;
};

/// State at the start of stage `index`: spin-up data for a leading SpinUp,
/// init_stage2 of the previous state otherwise.
CoupledState enter_stage(const SimConfig& c, int index, const CoupledState* previous);

/// Directory name of a stage inside the output directory, e.g. "stage0_SpinUp".
std::string stage_dir_name(const SimConfig& c, int index);

struct StageStart {
  CoupledState state;
  /// Global step counter of the last completed step (keys the noise).
  std::uint64_t step = 0;
  std::optional<MaterialLoop> loop;
  /// Continuing from a snapshot: do not rewrite the starting snapshot.
  bool resumed = false;
};

/// Integrates one stage from `start` to the stage duration. Throws
/// NumericalBlowUp after writing a post-mortem snapshot of the last finite state.
StageResult run_stage(const SimConfig& c, int index, StageStart start, AsyncWriter* writer, const RunOptions& opts);

/// Runs every stage in order (or resumes from c.restart).
RunResult run(const SimConfig& c, const RunOptions& opts = {});

}  // namespace wmfi
