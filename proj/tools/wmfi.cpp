// wmfi: command-line driver for the wave / mean-flow simulator.
//
//   wmfi spinup  [--config F] [--override k=v]... [--seed N] [--out DIR]
//   wmfi run     [--config F] [--override k=v]... [--seed N] [--out DIR]
//   wmfi nls     [--config F] [--override k=v]... [--seed N] [--out DIR]
//   wmfi inspect SNAPSHOT
//   wmfi diag    SNAPSHOT [--config F] [--override k=v]...
//
// Exit codes: 0 success, 2 bad input, 3 numerical blow-up.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wmfi/config.hpp"
#include "wmfi/experiment.hpp"
#include "wmfi/snapshot.hpp"

namespace {

using nlohmann::json;
using namespace wmfi;

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

SimConfig resolve(const CommonArgs& a, const char* forced_stage) {
  json j = a.config.empty() ? json::object() : to_json(load_config(a.config));
  if (forced_stage) j["stages"] = json::array({{{"type", forced_stage}}});
  if (forced_stage && !a.config.empty()) {
    // Keep the configured spin-up length when the stage list is replaced.
    const SimConfig base = load_config(a.config);
    for (const StageSpec& s : base.stages)
      if (s.type == StageType::SpinUp) j["stages"][0]["t_spin"] = s.t_spin;
  }
  for (const std::string& o : a.overrides) apply_override(j, o);
  if (a.seed) j["seed"] = *a.seed;
  if (!a.out.empty()) j["io"]["output_dir"] = a.out;
  return config_from_json(j);
}

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--override", a.overrides, "dotted key=value, repeatable (e.g. run.t_end=5)");
  cmd->add_option("--seed", a.seed, "noise seed");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_flag("-q,--quiet", a.quiet, "no progress lines");
}

int simulate(const CommonArgs& a, const char* forced_stage) {
  const SimConfig c = resolve(a, forced_stage);
  RunOptions opts;
  opts.log = a.quiet ? nullptr : &std::cerr;
  const RunResult r = run(c, opts);
  if (r.exit_code != 0) {
    std::cerr << "wmfi: " << r.message << " (post-mortem snapshot written)\n";
    return r.exit_code;
  }
  for (const StageResult& s : r.stages) {
    const DiagnosticsRecord& last = s.records.back();
    std::cout << to_string(s.type) << ": " << s.steps << " steps, t=" << last.t << ", E_total=" << last.E_total
              << ", int_N=" << last.int_N << ", max|Q_F|=" << last.max_QF << ", max|Q_W|=" << last.max_QW
              << " -> " << s.dir << "\n";
  }
  return 0;
}

int diag(const std::string& path, const CommonArgs& a) {
  const Snapshot snap = read_snapshot(path);
  SimConfig c;
  if (snap.extra.contains("config")) c = config_from_json(snap.extra["config"]);
  if (!a.config.empty() || !a.overrides.empty()) c = resolve(a, nullptr);
  Physics p;
  p.wave.kappa = c.kappa;
  p.wave.alpha = c.alpha;
  p.wave.model = snap.wave_model;
  p.elliptic.rel_tol = c.elliptic_tol;
  p.frozen_flow = snap.stage == "NlsOnly";
  const Diagnosed d = diagnose(snap.state, p);
  const DiagnosticsRecord r = record(snap.state, d, p, snap.loop ? &*snap.loop : nullptr);
  std::cout << csv_header() << csv_row(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave / mean-flow interaction simulator"};
  app.require_subcommand(1);

  CommonArgs spin_args, run_args, nls_args, diag_args;
  std::string inspect_path, diag_path;

  auto* spin = app.add_subcommand("spinup", "wave-free spin-up only");
  add_common(spin, spin_args);
  auto* runc = app.add_subcommand("run", "all configured stages");
  add_common(runc, run_args);
  auto* nls = app.add_subcommand("nls", "uncoupled NLS from the Gaussian packet (flow frozen at zero)");
  add_common(nls, nls_args);
  auto* insp = app.add_subcommand("inspect", "print a snapshot header without reading the payload");
  insp->add_option("snapshot", inspect_path)->required();
  auto* dg = app.add_subcommand("diag", "recompute the diagnostics record of a snapshot");
  dg->add_option("snapshot", diag_path)->required();
  dg->add_option("--config", diag_args.config, "JSON config file")->check(CLI::ExistingFile);
  dg->add_option("--override", diag_args.overrides, "dotted key=value, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*spin) return simulate(spin_args, "SpinUp");
    if (*runc) return simulate(run_args, nullptr);
    if (*nls) return simulate(nls_args, "NlsOnly");
    if (*insp) {
      std::cout << header_to_json(inspect_snapshot(inspect_path)).dump(2) << "\n";
      return 0;
    }
    if (*dg) return diag(diag_path, diag_args);
  } catch (const ConfigError& e) {
    std::cerr << "wmfi: config error: " << e.what() << "\n";
    return 2;
  } catch (const SnapshotError& e) {
    std::cerr << "wmfi: " << e.what() << "\n";
    return 2;
  } catch (const NumericalBlowUp& e) {
    std::cerr << "wmfi: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "wmfi: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
