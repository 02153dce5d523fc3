#ifndef SWITCHSIM_CONFIG_HPP
#define SWITCHSIM_CONFIG_HPP

// JSON run configuration shared by the CLI subcommands.
//
//   {
//     "systems": [{"kind": "sys1"}, {"kind": "family", "a": -10, "b": -1, "c": 2, "d": 1},
//                 {"kind": "weighted", "members": [{"field": {"kind": "sys1"}, "weight": 0.5}, ...]}],
//     "schedule": {"kind": "periodic", "dwell": 0.5, "start_mode": 0},
//              or {"kind": "stochastic", "mean_dwell": 0.5, "seed": 7},
//     "initial_state": [1.2, 0, 0.3],
//     "t_end": 30, "step": 0.001, "seed": 7,
//     "output": {"path": "traj.csv", "format": "csv"},
//     "divergence_bound": 1e6,
//     "convergence": {"threshold": 0.05, "tail_fraction": 0.25, "resolution_floor": 1e-9},
//     "dwells": [0.25, 0.5, 1, 2, 4]
//   }
//
// Everything except "systems" is optional.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "switchsim/analysis.hpp"
#include "switchsim/fields.hpp"
#include "switchsim/integrate.hpp"

namespace switchsim {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : InvalidInput(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class OutputFormat { Csv, Json };

struct OutputConfig {
  std::string path = "trajectory.csv";
  OutputFormat format = OutputFormat::Csv;
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  std::vector<ModeField> systems;
  /// mode_count always equals systems.size() after parsing.
  SwitchSchedule schedule;
  CartesianState initial_state{1.2, 0.0, 0.3};
  double t_end = 30.0;
  double step = 1e-3;
  std::optional<std::uint64_t> seed;
  OutputConfig output;
  double divergence_bound = 1e6;
  ConvergenceOptions convergence;
  std::vector<double> dwells;

  /// Schedule with the top-level seed applied.
  SwitchSchedule effective_schedule() const {
    SwitchSchedule s = schedule;
    if (seed) {
      if (auto* st = std::get_if<StochasticDwell>(&s.law)) st->seed = *seed;
    }
    return s;
  }

  IntegratorConfig integrator() const { return {step, Method::RK4, divergence_bound}; }

  double orbit_radius() const { return systems.empty() ? 1.0 : systems.front().orbit_radius(); }

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.systems == b.systems && a.schedule == b.schedule &&
           a.initial_state == b.initial_state && a.t_end == b.t_end && a.step == b.step &&
           a.seed == b.seed && a.output == b.output && a.divergence_bound == b.divergence_bound &&
           a.convergence.threshold == b.convergence.threshold &&
           a.convergence.tail_fraction == b.convergence.tail_fraction &&
           a.convergence.resolution_floor == b.convergence.resolution_floor &&
           a.dwells == b.dwells;
  }
};

namespace detail {

using nlohmann::json;

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

inline void reject_unknown_keys(const json& j, const std::string& path,
                                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(path + "." + key, "unknown key");
  }
}

inline double get_real(const json& j, const std::string& key, const std::string& path) {
  const std::string p = path + "." + key;
  if (!j.contains(key)) throw ConfigError(p, "missing");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(p, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(p, "must be finite");
  return x;
}

inline double get_positive(const json& j, const std::string& key, const std::string& path,
                           double fallback) {
  if (!j.contains(key)) return fallback;
  const double x = get_real(j, key, path);
  if (!(x > 0.0)) throw ConfigError(path + "." + key, "must be positive");
  return x;
}

inline bool is_nonnegative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

inline std::uint64_t get_seed(const json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!is_nonnegative_integer(v)) {
    throw ConfigError(path + "." + key, "expected a nonnegative 64-bit integer");
  }
  return v.get<std::uint64_t>();
}

inline std::string kind_of(const json& j, const std::string& path) {
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError(path + ".kind", "missing or not a string");
  }
  return j.at("kind").get<std::string>();
}

inline ModeField parse_field(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "sys1") return ModeField::sys1();
    if (name == "sys2") return ModeField::sys2();
    if (name == "average") return ModeField::average();
    throw ConfigError(path, "unknown field kind '" + name + "'");
  }
  require_object(j, path);
  const auto kind = kind_of(j, path);
  if (kind == "sys1" || kind == "sys2" || kind == "average") {
    reject_unknown_keys(j, path, {"kind"});
    return parse_field(json(kind), path);
  }
  if (kind == "family") {
    reject_unknown_keys(j, path, {"kind", "a", "b", "c", "d"});
    FamilyParams p;
    p.a = get_real(j, "a", path);
    p.b = get_real(j, "b", path);
    p.c = get_real(j, "c", path);
    p.d = j.contains("d") ? get_real(j, "d", path) : 1.0;
    if (!(p.d > 0.0)) throw ConfigError(path + ".d", "orbit radius must be positive");
    return ModeField::family(p);
  }
  if (kind == "weighted") {
    reject_unknown_keys(j, path, {"kind", "members"});
    if (!j.contains("members") || !j.at("members").is_array() || j.at("members").empty()) {
      throw ConfigError(path + ".members", "expected a nonempty array");
    }
    std::vector<ModeField> fields;
    std::vector<double> weights;
    std::size_t i = 0;
    for (const auto& m : j.at("members")) {
      const std::string mp = path + ".members[" + std::to_string(i++) + "]";
      require_object(m, mp);
      reject_unknown_keys(m, mp, {"field", "weight"});
      if (!m.contains("field")) throw ConfigError(mp + ".field", "missing");
      fields.push_back(parse_field(m.at("field"), mp + ".field"));
      weights.push_back(get_real(m, "weight", mp));
    }
    try {
      return make_weighted_average(fields, weights);
    } catch (const InvalidInput& e) {
      throw ConfigError(path + ".members", e.what());
    }
  }
  throw ConfigError(path + ".kind", "unknown field kind '" + kind + "'");
}

inline json field_to_json(const ModeField& f) {
  switch (f.kind()) {
    case FieldKind::Sys1:
      return {{"kind", "sys1"}};
    case FieldKind::Sys2:
      return {{"kind", "sys2"}};
    case FieldKind::Average:
      return {{"kind", "average"}};
    case FieldKind::Family: {
      const auto& p = f.params();
      return {{"kind", "family"}, {"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}};
    }
    case FieldKind::WeightedAverage: {
      json members = json::array();
      for (const auto& m : f.members()) {
        members.push_back({{"field", field_to_json(m.field)}, {"weight", m.weight}});
      }
      return {{"kind", "weighted"}, {"members", members}};
    }
  }
  return {};
}

inline SwitchSchedule parse_schedule(const json& j, const std::string& path) {
  require_object(j, path);
  const auto kind = kind_of(j, path);
  SwitchSchedule s;
  if (kind == "periodic") {
    reject_unknown_keys(j, path, {"kind", "dwell", "start_mode"});
    s.law = PeriodicDwell{get_positive(j, "dwell", path, 0.5)};
  } else if (kind == "stochastic") {
    reject_unknown_keys(j, path, {"kind", "mean_dwell", "seed", "start_mode"});
    StochasticDwell st;
    st.mean_dwell = get_positive(j, "mean_dwell", path, 0.5);
    if (j.contains("seed")) st.seed = get_seed(j, "seed", path);
    s.law = st;
  } else {
    throw ConfigError(path + ".kind", "unknown schedule kind '" + kind + "'");
  }
  if (j.contains("start_mode")) {
    const auto& v = j.at("start_mode");
    if (!is_nonnegative_integer(v)) throw ConfigError(path + ".start_mode", "expected a nonnegative integer");
    s.start_mode = v.get<std::size_t>();
  }
  return s;
}

inline json schedule_to_json(const SwitchSchedule& s) {
  if (const auto* p = std::get_if<PeriodicDwell>(&s.law)) {
    return {{"kind", "periodic"}, {"dwell", p->dwell}, {"start_mode", s.start_mode}};
  }
  const auto& st = std::get<StochasticDwell>(s.law);
  return {{"kind", "stochastic"},
          {"mean_dwell", st.mean_dwell},
          {"seed", st.seed},
          {"start_mode", s.start_mode}};
}

}  // namespace detail

/// Parses and validates a run configuration.
inline RunConfig parse_run_config(const nlohmann::json& j) {
  const std::string root = "config";
  detail::require_object(j, root);
  detail::reject_unknown_keys(j, root,
                              {"systems", "schedule", "initial_state", "t_end", "step", "seed",
                               "output", "divergence_bound", "convergence", "dwells"});
  RunConfig cfg;

  if (!j.contains("systems") || !j.at("systems").is_array()) {
    throw ConfigError(root + ".systems", "expected an array of field configs");
  }
  std::size_t i = 0;
  for (const auto& f : j.at("systems")) {
    cfg.systems.push_back(detail::parse_field(f, root + ".systems[" + std::to_string(i++) + "]"));
  }
  if (cfg.systems.empty()) throw ConfigError(root + ".systems", "must not be empty");
  const double d = cfg.systems.front().orbit_radius();
  for (std::size_t k = 0; k < cfg.systems.size(); ++k) {
    if (std::fabs(cfg.systems[k].orbit_radius() - d) > 1e-12 * d) {
      throw ConfigError(root + ".systems[" + std::to_string(k) + "]",
                        "all systems must share the same orbit radius");
    }
  }

  if (j.contains("schedule")) cfg.schedule = detail::parse_schedule(j.at("schedule"), root + ".schedule");
  cfg.schedule.mode_count = cfg.systems.size();
  if (cfg.schedule.start_mode >= cfg.schedule.mode_count) {
    throw ConfigError(root + ".schedule.start_mode", "must be less than the number of systems");
  }

  if (j.contains("initial_state")) {
    const auto& s = j.at("initial_state");
    if (!s.is_array() || s.size() != 3) {
      throw ConfigError(root + ".initial_state", "expected [x, y, z]");
    }
    double v[3];
    for (std::size_t k = 0; k < 3; ++k) {
      if (!s[k].is_number() || !std::isfinite(s[k].get<double>())) {
        throw ConfigError(root + ".initial_state[" + std::to_string(k) + "]", "expected a finite number");
      }
      v[k] = s[k].get<double>();
    }
    cfg.initial_state = {v[0], v[1], v[2]};
  }

  cfg.t_end = detail::get_positive(j, "t_end", root, cfg.t_end);
  cfg.step = detail::get_positive(j, "step", root, cfg.step);
  cfg.divergence_bound = detail::get_positive(j, "divergence_bound", root, cfg.divergence_bound);
  if (j.contains("seed")) cfg.seed = detail::get_seed(j, "seed", root);

  if (j.contains("output")) {
    const auto& o = j.at("output");
    const std::string op = root + ".output";
    detail::require_object(o, op);
    detail::reject_unknown_keys(o, op, {"path", "format"});
    if (o.contains("path")) {
      if (!o.at("path").is_string()) throw ConfigError(op + ".path", "expected a string");
      cfg.output.path = o.at("path").get<std::string>();
    }
    if (o.contains("format")) {
      const auto fmt = o.at("format").is_string() ? o.at("format").get<std::string>() : "";
      if (fmt == "csv") {
        cfg.output.format = OutputFormat::Csv;
      } else if (fmt == "json") {
        cfg.output.format = OutputFormat::Json;
      } else {
        throw ConfigError(op + ".format", "expected \"csv\" or \"json\"");
      }
    }
  }

  if (j.contains("convergence")) {
    const auto& c = j.at("convergence");
    const std::string cp = root + ".convergence";
    detail::require_object(c, cp);
    detail::reject_unknown_keys(c, cp, {"threshold", "tail_fraction", "resolution_floor"});
    cfg.convergence.threshold = detail::get_positive(c, "threshold", cp, cfg.convergence.threshold);
    cfg.convergence.tail_fraction =
        detail::get_positive(c, "tail_fraction", cp, cfg.convergence.tail_fraction);
    if (cfg.convergence.tail_fraction > 1.0) {
      throw ConfigError(cp + ".tail_fraction", "must lie in (0, 1]");
    }
    cfg.convergence.resolution_floor =
        detail::get_positive(c, "resolution_floor", cp, cfg.convergence.resolution_floor);
  }

  if (j.contains("dwells")) {
    const auto& dw = j.at("dwells");
    if (!dw.is_array()) throw ConfigError(root + ".dwells", "expected an array");
    for (std::size_t k = 0; k < dw.size(); ++k) {
      const std::string p = root + ".dwells[" + std::to_string(k) + "]";
      if (!dw[k].is_number()) throw ConfigError(p, "expected a number");
      const double x = dw[k].get<double>();
      if (!std::isfinite(x) || !(x > 0.0)) throw ConfigError(p, "must be positive");
      cfg.dwells.push_back(x);
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, std::string("malformed JSON: ") + e.what());
  }
  return parse_run_config(j);
}

inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json systems = nlohmann::json::array();
  for (const auto& f : cfg.systems) systems.push_back(detail::field_to_json(f));
  nlohmann::json j = {
      {"systems", systems},
      {"schedule", detail::schedule_to_json(cfg.schedule)},
      {"initial_state", {cfg.initial_state.x, cfg.initial_state.y, cfg.initial_state.z}},
      {"t_end", cfg.t_end},
      {"step", cfg.step},
      {"output",
       {{"path", cfg.output.path}, {"format", cfg.output.format == OutputFormat::Csv ? "csv" : "json"}}},
      {"divergence_bound", cfg.divergence_bound},
      {"convergence",
       {{"threshold", cfg.convergence.threshold},
        {"tail_fraction", cfg.convergence.tail_fraction},
        {"resolution_floor", cfg.convergence.resolution_floor}}},
  };
  if (cfg.seed) j["seed"] = *cfg.seed;
  if (!cfg.dwells.empty()) j["dwells"] = cfg.dwells;
  return j;
}

}  // namespace switchsim

#endif  // SWITCHSIM_CONFIG_HPP
