#ifndef SWITCHSIM_IO_HPP
#define SWITCHSIM_IO_HPP

#include <charconv>
#include <ostream>
#include <span>
#include <string>

#include "json.hpp"
#include "switchsim/analysis.hpp"
#include "switchsim/integrate.hpp"

namespace switchsim {

/// 17 significant digits, locale-independent; enough to round-trip any double.
inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kTrajectoryCsvHeader = "t,x,y,z,r,theta,mode,dist";
inline constexpr const char* kSweepCsvHeader = "dwell,converged,final_distance,decay_rate,spectral_radius";

/// One row per sample; `d` is the orbit radius used for the dist column.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double d) {
  os << kTrajectoryCsvHeader << '\n';
  for (const auto& s : traj.samples) {
    const auto cyl = to_cylindrical(s.state);
    os << format_real(s.t) << ',' << format_real(s.state.x) << ',' << format_real(s.state.y) << ','
       << format_real(s.state.z) << ',' << format_real(cyl.r) << ',' << format_real(cyl.theta)
       << ',' << s.mode << ',' << format_real(orbit_distance(s.state, d)) << '\n';
  }
}

inline nlohmann::json trajectory_to_json(const Trajectory& traj, double d) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : traj.samples) {
    const auto cyl = to_cylindrical(s.state);
    samples.push_back({{"t", s.t},
                       {"x", s.state.x},
                       {"y", s.state.y},
                       {"z", s.state.z},
                       {"r", cyl.r},
                       {"theta", cyl.theta},
                       {"mode", s.mode},
                       {"dist", orbit_distance(s.state, d)}});
  }
  return {{"fields", traj.meta.fields}, {"step", traj.meta.config.step}, {"samples", samples}};
}

inline nlohmann::json to_json(const StabilityReport& r) {
  return {{"eigenvalues", r.eigenvalues},
          {"transverse_eigenvalues", r.transverse_eigenvalues},
          {"classification", std::string(to_string(r.classification))}};
}

inline nlohmann::json to_json(const ConvergenceReport& r) {
  return {{"converged", r.converged},
          {"final_distance", r.final_distance},
          {"initial_distance", r.initial_distance},
          {"decay_rate", r.decay_rate},
          {"threshold", r.threshold},
          {"window", r.window},
          {"resolution_floor", r.resolution_floor}};
}

inline nlohmann::json to_json(const FloquetResult& f) {
  return {{"multipliers", f.multipliers},
          {"spectral_radius", f.spectral_radius},
          {"period_map", f.period_map}};
}

inline nlohmann::json to_json(const AverageCondition& c) {
  return {{"sum_a", c.sum_a},
          {"sum_b", c.sum_b},
          {"sum_c", c.sum_c},
          {"satisfied", c.satisfied},
          {"average", to_json(c.average)}};
}

inline nlohmann::json to_json(const XozReduction& x) {
  return {{"outer", x.outer},
          {"inner", {{"rate", x.inner.rate}, {"z_coupling", x.inner.z_coupling}}},
          {"z_rate", x.z_rate},
          {"boundary", x.boundary}};
}

inline nlohmann::json to_json(const SweepRow& row) {
  nlohmann::json j = {{"dwell", row.dwell},
                      {"status", row.status == RowStatus::Ok ? "ok" : "diverged"},
                      {"convergence", to_json(row.convergence)},
                      {"floquet", to_json(row.floquet)}};
  if (row.diverged_at) j["diverged_at"] = *row.diverged_at;
  return j;
}

/// A diverged row reports `diverged` in the converged column.
inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << kSweepCsvHeader << '\n';
  for (const auto& row : rows) {
    const char* flag = row.status == RowStatus::Diverged ? "diverged"
                       : row.convergence.converged      ? "true"
                                                        : "false";
    os << format_real(row.dwell) << ',' << flag << ',' << format_real(row.convergence.final_distance)
       << ',' << format_real(row.convergence.decay_rate) << ','
       << format_real(row.floquet.spectral_radius) << '\n';
  }
}

}  // namespace switchsim

#endif  // SWITCHSIM_IO_HPP
