#ifndef SWITCHSIM_INTEGRATE_HPP
#define SWITCHSIM_INTEGRATE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "switchsim/fields.hpp"
#include "switchsim/state.hpp"

namespace switchsim {

struct PeriodicDwell {
  double dwell = 0.5;
  friend bool operator==(const PeriodicDwell&, const PeriodicDwell&) = default;
};

/// Exponentially distributed dwells with the given mean.
struct StochasticDwell {
  double mean_dwell = 0.5;
  std::uint64_t seed = 0;
  friend bool operator==(const StochasticDwell&, const StochasticDwell&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Uniform on the open interval (0, 1) as a pure function of (seed, counter).
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ (counter * 0xD1B54A32D192ED03ULL));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Round-robin switching law: modes are visited start_mode, start_mode+1, ...
/// modulo mode_count; only the dwell lengths depend on the kind.
struct SwitchSchedule {
  std::variant<PeriodicDwell, StochasticDwell> law = PeriodicDwell{};
  std::size_t start_mode = 0;
  std::size_t mode_count = 1;

  friend bool operator==(const SwitchSchedule&, const SwitchSchedule&) = default;

  static SwitchSchedule periodic(double dwell, std::size_t mode_count, std::size_t start_mode = 0) {
    SwitchSchedule s{PeriodicDwell{dwell}, start_mode, mode_count};
    s.validate();
    return s;
  }

  static SwitchSchedule stochastic(double mean_dwell, std::uint64_t seed, std::size_t mode_count,
                                   std::size_t start_mode = 0) {
    SwitchSchedule s{StochasticDwell{mean_dwell, seed}, start_mode, mode_count};
    s.validate();
    return s;
  }

  bool is_periodic() const { return std::holds_alternative<PeriodicDwell>(law); }

  /// Nominal dwell: the fixed dwell or the mean.
  double nominal_dwell() const {
    if (const auto* p = std::get_if<PeriodicDwell>(&law)) return p->dwell;
    return std::get<StochasticDwell>(law).mean_dwell;
  }

  void validate() const {
    const double dwell = nominal_dwell();
    if (!std::isfinite(dwell) || !(dwell > 0.0)) throw InvalidInput("dwell must be positive");
    if (mode_count < 1) throw InvalidInput("mode_count must be at least 1");
  }

  /// Duration of the k-th dwell interval (k = 0 is the first).
  double dwell(std::size_t k) const {
    if (const auto* p = std::get_if<PeriodicDwell>(&law)) return p->dwell;
    const auto& s = std::get<StochasticDwell>(law);
    return -s.mean_dwell * std::log(detail::counter_uniform(s.seed, k));
  }

  /// Mode active during the k-th interval.
  std::size_t mode(std::size_t k) const { return (start_mode + k) % mode_count; }
};

enum class Method { RK4 };

struct IntegratorConfig {
  double step = 1e-3;
  Method method = Method::RK4;
  /// Runs stop with DivergenceError once the state norm exceeds this.
  double divergence_bound = 1e6;

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;

  void validate() const {
    if (!std::isfinite(step) || !(step > 0.0)) throw InvalidInput("step must be positive");
    if (!(divergence_bound > 0.0)) throw InvalidInput("divergence bound must be positive");
  }
};

struct Sample {
  double t = 0.0;
  CartesianState state;
  std::size_t mode = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct TrajectoryMeta {
  std::vector<std::string> fields;
  std::optional<SwitchSchedule> schedule;
  IntegratorConfig config;
};

struct Trajectory {
  std::vector<Sample> samples;
  TrajectoryMeta meta;

  bool empty() const { return samples.empty(); }
  const Sample& back() const { return samples.back(); }
};

/// A run left the finite region or exceeded the divergence bound. Carries the
/// failure time and the trajectory computed up to it.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double t, Trajectory partial)
      : std::runtime_error("trajectory diverged at t=" + std::to_string(t)),
        time_(t),
        partial_(std::move(partial)) {}

  double time() const { return time_; }
  const Trajectory& partial() const { return partial_; }

 private:
  double time_;
  Trajectory partial_;
};

/// Classical RK4 step for any autonomous field `f(CartesianState) -> CartesianState`.
/// Throws DivergenceError (with time `t` and an empty partial trajectory) when
/// a stage becomes non-finite.
template <class VectorField>
CartesianState rk4_step(const VectorField& f, const CartesianState& s, double h, double t = 0.0) {
  auto check = [t](const CartesianState& v) {
    if (!v.finite()) throw DivergenceError(t, {});
  };
  const CartesianState k1 = f(s);
  check(k1);
  const CartesianState s2 = s + (0.5 * h) * k1;
  check(s2);
  const CartesianState k2 = f(s2);
  check(k2);
  const CartesianState s3 = s + (0.5 * h) * k2;
  check(s3);
  const CartesianState k3 = f(s3);
  check(k3);
  const CartesianState s4 = s + h * k3;
  check(s4);
  const CartesianState k4 = f(s4);
  check(k4);
  const CartesianState next = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  check(next);
  return next;
}

inline CartesianState step_rk4(const ModeField& field, const CartesianState& s, double h,
                               double t = 0.0) {
  if (!std::isfinite(h) || !(h > 0.0)) throw InvalidInput("step must be positive");
  if (!s.finite()) throw InvalidInput("state must be finite");
  // rk4_step rejects non-finite stages before they reach eval_cartesian
  return rk4_step([&field](const CartesianState& v) { return eval_cartesian(field, v); }, s, h, t);
}

namespace detail {

/// Number of equal steps of size <= step covering `span`; the relative slack
/// keeps e.g. 0.5 / 1e-3 from rounding up to 501.
inline std::size_t step_count(double span, double step) {
  const double n = std::ceil(span / step * (1.0 - 1e-12));
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

/// Integrates `field` over [t0, t1] with nominal step h, appending samples
/// after each step. Every step but the last has size exactly h and sample
/// times are t0 + j*h; the last step lands on t1.
inline CartesianState advance(const ModeField& field, CartesianState s, double t0, double t1,
                              double h, std::size_t mode, const IntegratorConfig& config,
                              Trajectory& traj) {
  const std::size_t n = step_count(t1 - t0, h);
  double t = t0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double next_t = j == n ? t1 : t0 + static_cast<double>(j) * h;
    try {
      s = step_rk4(field, s, j == n ? t1 - t : h, t);
    } catch (const DivergenceError&) {
      throw DivergenceError(t, std::move(traj));
    }
    t = next_t;
    traj.samples.push_back({t, s, mode});
    if (s.norm() > config.divergence_bound) throw DivergenceError(t, std::move(traj));
  }
  return s;
}

inline void require_run_args(const CartesianState& s0, double t_end, const IntegratorConfig& config) {
  config.validate();
  if (!s0.finite()) throw InvalidInput("initial state must be finite");
  if (!std::isfinite(t_end) || !(t_end > 0.0)) throw InvalidInput("t_end must be positive");
}

}  // namespace detail

/// Single-field run sampled at every step, mode 0 throughout.
inline Trajectory integrate(const ModeField& field, const CartesianState& s0, double t_end,
                            const IntegratorConfig& config = {}) {
  detail::require_run_args(s0, t_end, config);
  Trajectory traj;
  traj.meta.fields = {field.describe()};
  traj.meta.config = config;
  traj.samples.reserve(detail::step_count(t_end, config.step) + 1);
  traj.samples.push_back({0.0, s0, 0});
  detail::advance(field, s0, 0.0, t_end, config.step, 0, config, traj);
  return traj;
}

/// Switched run. Each dwell interval is split into ceil(dwell/step) equal
/// steps so switch times are hit exactly; the state is carried across
/// switches unchanged. A sample taken at a switch time carries the new mode.
inline Trajectory simulate_switched(std::span<const ModeField> fields, const SwitchSchedule& schedule,
                                    const CartesianState& s0, double t_end,
                                    const IntegratorConfig& config = {}) {
  detail::require_run_args(s0, t_end, config);
  schedule.validate();
  if (fields.size() != schedule.mode_count) {
    throw InvalidInput("number of fields does not match schedule mode_count");
  }
  if (schedule.start_mode >= schedule.mode_count) throw InvalidInput("start_mode out of range");

  Trajectory traj;
  for (const auto& f : fields) traj.meta.fields.push_back(f.describe());
  traj.meta.schedule = schedule;
  traj.meta.config = config;

  if (schedule.mode_count == 1) {
    // no switch times at all
    traj.samples.reserve(detail::step_count(t_end, config.step) + 1);
    traj.samples.push_back({0.0, s0, 0});
    detail::advance(fields[0], s0, 0.0, t_end, config.step, 0, config, traj);
    return traj;
  }

  traj.samples.push_back({0.0, s0, schedule.mode(0)});
  CartesianState s = s0;
  double start = 0.0;
  for (std::size_t k = 0; start < t_end; ++k) {
    const double dwell = schedule.dwell(k);
    // periodic switch times are k*dwell rather than a running sum
    const double nominal_end =
        schedule.is_periodic() ? static_cast<double>(k + 1) * dwell : start + dwell;
    const double end = nominal_end < t_end ? nominal_end : t_end;
    const std::size_t mode = schedule.mode(k);
    const double h = dwell / static_cast<double>(detail::step_count(dwell, config.step));
    if (end > start) {
      s = detail::advance(fields[mode], s, start, end, h, mode, config, traj);
      if (end < t_end) traj.samples.back().mode = schedule.mode(k + 1);
    }
    start = end;
  }
  return traj;
}

inline Trajectory simulate_switched(std::initializer_list<ModeField> fields,
                                    const SwitchSchedule& schedule, const CartesianState& s0,
                                    double t_end, const IntegratorConfig& config = {}) {
  return simulate_switched(std::span<const ModeField>(fields.begin(), fields.size()), schedule, s0,
                           t_end, config);
}

/// Closed-form z(t) for fields with decoupled z' = c_i z: z0 * exp(sum c_i tau_i)
/// with tau_i the dwell intervals clipped to [0, t].
inline double exact_z(double z0, std::span<const ModeField> fields, const SwitchSchedule& schedule,
                      double t) {
  if (z0 == 0.0 || t <= 0.0) return z0;
  if (schedule.mode_count == 1) return z0 * std::exp(z_rate(fields[0]) * t);
  double exponent = 0.0;
  double start = 0.0;
  for (std::size_t k = 0; start < t; ++k) {
    const double dwell = schedule.dwell(k);
    const double nominal_end =
        schedule.is_periodic() ? static_cast<double>(k + 1) * dwell : start + dwell;
    const double end = nominal_end < t ? nominal_end : t;
    exponent += z_rate(fields[schedule.mode(k)]) * (end - start);
    start = end;
  }
  return z0 * std::exp(exponent);
}

inline double exact_z(double z0, std::initializer_list<ModeField> fields,
                      const SwitchSchedule& schedule, double t) {
  return exact_z(z0, std::span<const ModeField>(fields.begin(), fields.size()), schedule, t);
}

}  // namespace switchsim

#endif  // SWITCHSIM_INTEGRATE_HPP
