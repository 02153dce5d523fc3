#ifndef SWITCHSIM_COMMANDS_HPP
#define SWITCHSIM_COMMANDS_HPP

// Subcommand bodies for the switchsim CLI. Each returns the process exit code:
// 0 success, 1 invalid input, 2 divergence.

#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "switchsim/analysis.hpp"
#include "switchsim/checks.hpp"
#include "switchsim/config.hpp"
#include "switchsim/integrate.hpp"
#include "switchsim/io.hpp"

namespace switchsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitDiverged = 2;

inline std::string sidecar_path(const std::string& out) { return out + ".convergence.json"; }

struct SimulateOptions {
  std::optional<std::string> out;  // overrides config.output.path
};

/// Runs the configured (switched) simulation, writes the trajectory and a
/// ConvergenceReport sidecar. On divergence both files still hold the partial run.
inline int cmd_simulate(const RunConfig& cfg, const SimulateOptions& opts, std::ostream& log) {
  const std::string out = opts.out.value_or(cfg.output.path);
  const double d = cfg.orbit_radius();

  Trajectory traj;
  std::optional<double> diverged_at;
  try {
    traj = simulate_switched(cfg.systems, cfg.effective_schedule(), cfg.initial_state, cfg.t_end,
                             cfg.integrator());
  } catch (const DivergenceError& e) {
    traj = e.partial();
    diverged_at = e.time();
  }

  {
    std::ofstream os(out);
    if (!os) {
      log << "error: cannot write " << out << "\n";
      return kExitInvalid;
    }
    if (cfg.output.format == OutputFormat::Csv) {
      write_trajectory_csv(os, traj, d);
    } else {
      os << trajectory_to_json(traj, d).dump(2) << '\n';
    }
  }

  auto report = convergence_report(traj, d, cfg.convergence);
  if (diverged_at) report.converged = false;
  nlohmann::json side = to_json(report);
  side["status"] = diverged_at ? "diverged" : "ok";
  if (diverged_at) side["diverged_at"] = *diverged_at;
  side["orbit_radius"] = d;
  side["samples"] = traj.samples.size();
  {
    std::ofstream os(sidecar_path(out));
    if (!os) {
      log << "error: cannot write " << sidecar_path(out) << "\n";
      return kExitInvalid;
    }
    os << side.dump(2) << '\n';
  }

  if (diverged_at) {
    log << "diverged at t=" << format_real(*diverged_at) << "; partial trajectory written to " << out
        << "\n";
    return kExitDiverged;
  }
  log << "wrote " << traj.samples.size() << " samples to " << out
      << " (converged=" << (report.converged ? "true" : "false") << ")\n";
  return kExitOk;
}

/// Dwells for analyze/sweep: explicit list, else the config's list, else the
/// schedule's nominal dwell.
inline std::vector<double> resolve_dwells(const RunConfig& cfg, std::span<const double> requested) {
  if (!requested.empty()) return {requested.begin(), requested.end()};
  if (!cfg.dwells.empty()) return cfg.dwells;
  return {cfg.schedule.nominal_dwell()};
}

inline nlohmann::json analyze_report(const RunConfig& cfg, std::span<const double> dwells) {
  nlohmann::json systems = nlohmann::json::array();
  for (const auto& f : cfg.systems) {
    systems.push_back({{"field", f.describe()},
                       {"stability", to_json(classify_orbit_stability(f))},
                       {"xoz", to_json(reduce_to_xoz(f))}});
  }
  const ModeField avg = make_equal_average(cfg.systems);
  nlohmann::json report = {
      {"systems", systems},
      {"average", {{"field", avg.describe()}, {"stability", to_json(classify_orbit_stability(avg))}}},
  };

  std::vector<FamilyParams> families;
  for (const auto& f : cfg.systems) {
    if (f.kind() == FieldKind::Family) families.push_back(f.params());
  }
  if (!families.empty() && families.size() == cfg.systems.size()) {
    report["average_condition"] = to_json(average_condition_check(families));
  }

  nlohmann::json floquet = nlohmann::json::array();
  for (double dw : dwells) {
    auto j = to_json(floquet_outer(cfg.systems, dw));
    j["dwell"] = dw;
    floquet.push_back(j);
  }
  report["floquet"] = floquet;
  return report;
}

inline int cmd_analyze(const RunConfig& cfg, std::span<const double> dwells, std::ostream& out) {
  out << analyze_report(cfg, resolve_dwells(cfg, dwells)).dump(2) << '\n';
  return kExitOk;
}

inline std::vector<SweepRow> sweep_rows(const RunConfig& cfg, std::span<const double> dwells) {
  SweepOptions opts;
  opts.schedule = cfg.effective_schedule();
  opts.convergence = cfg.convergence;
  return dwell_sweep(cfg.systems, dwells, cfg.initial_state, cfg.t_end, cfg.integrator(), opts);
}

/// Writes the sweep CSV to `out_path` when given, otherwise to `out`.
inline int cmd_sweep(const RunConfig& cfg, std::span<const double> dwells,
                     const std::optional<std::string>& out_path, std::ostream& out,
                     std::ostream& log) {
  const auto list = resolve_dwells(cfg, dwells);
  const auto rows = sweep_rows(cfg, list);
  if (out_path) {
    std::ofstream os(*out_path);
    if (!os) {
      log << "error: cannot write " << *out_path << "\n";
      return kExitInvalid;
    }
    write_sweep_csv(os, rows);
  } else {
    write_sweep_csv(out, rows);
  }
  return kExitOk;
}

inline int cmd_check(const CheckOptions& opts, std::ostream& out) {
  const auto results = run_checks(opts);
  for (const auto& r : results) {
    out << to_string(r.status) << "  " << r.name << "  " << r.detail << '\n';
  }
  const bool ok = all_passed(results);
  out << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  return ok ? kExitOk : kExitInvalid;
}

}  // namespace switchsim

#endif  // SWITCHSIM_COMMANDS_HPP
