#ifndef SWITCHSIM_ANALYSIS_HPP
#define SWITCHSIM_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "switchsim/fields.hpp"
#include "switchsim/integrate.hpp"
#include "switchsim/state.hpp"

namespace switchsim {

using Matrix2 = std::array<std::array<double, 2>, 2>;
using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Euclidean distance from `s` to the circle r = d, z = 0.
inline double orbit_distance(const CartesianState& s, double d) {
  if (!(d > 0.0)) throw InvalidInput("orbit radius must be positive");
  return std::hypot(std::hypot(s.x, s.y) - d, s.z);
}

/// Outer-region dynamics written as (r', theta', z') = M (r-d, theta, z) + (0, 1, 0).
struct OuterLinearization {
  Matrix3 matrix{};
  std::array<double, 3> affine_shift{0.0, 1.0, 0.0};

  /// Rows/columns (r, z).
  Matrix2 transverse_block() const {
    return {{{matrix[0][0], matrix[0][2]}, {matrix[2][0], matrix[2][2]}}};
  }
};

inline OuterLinearization linearize_outer(const ModeField& f) {
  OuterLinearization lin;
  auto& m = lin.matrix;
  switch (f.kind()) {
    case FieldKind::Sys1:
      m = {{{-10.0, 0.0, -1.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 2.0}}};
      break;
    case FieldKind::Sys2:
      m = {{{2.0, 0.0, 1.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, -10.0}}};
      break;
    case FieldKind::Average:
      m = {{{-4.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, -4.0}}};
      break;
    case FieldKind::Family: {
      const auto& p = f.params();
      m = {{{p.a, 0.0, p.b}, {0.0, 0.0, 0.0}, {0.0, 0.0, p.c}}};
      break;
    }
    case FieldKind::WeightedAverage:
      for (const auto& member : f.members()) {
        const auto part = linearize_outer(member.field).matrix;
        for (std::size_t i = 0; i < 3; ++i) {
          for (std::size_t j = 0; j < 3; ++j) m[i][j] += member.weight * part[i][j];
        }
      }
      break;
  }
  return lin;
}

inline constexpr double kTriangularTolerance = 1e-12;

/// Eigenvalues of an upper-triangular matrix (its diagonal), ascending.
inline std::array<double, 3> eigenvalues_upper_triangular(const Matrix3& m) {
  if (std::fabs(m[1][0]) > kTriangularTolerance || std::fabs(m[2][0]) > kTriangularTolerance ||
      std::fabs(m[2][1]) > kTriangularTolerance) {
    throw InvalidInput("matrix is not upper triangular");
  }
  std::array<double, 3> ev{m[0][0], m[1][1], m[2][2]};
  std::sort(ev.begin(), ev.end());
  return ev;
}

enum class Classification { OrbitStable, OrbitUnstable, Marginal };

inline std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::OrbitStable:
      return "OrbitStable";
    case Classification::OrbitUnstable:
      return "OrbitUnstable";
    case Classification::Marginal:
      return "Marginal";
  }
  return "Marginal";
}

struct StabilityReport {
  std::array<double, 3> eigenvalues{};
  /// (r, z) eigenvalues; the theta eigenvalue is always 0 and is ignored.
  std::array<double, 2> transverse_eigenvalues{};
  Classification classification = Classification::Marginal;

  friend bool operator==(const StabilityReport&, const StabilityReport&) = default;
};

inline StabilityReport classify_linearization(const OuterLinearization& lin) {
  StabilityReport rep;
  rep.eigenvalues = eigenvalues_upper_triangular(lin.matrix);
  rep.transverse_eigenvalues = {lin.matrix[0][0], lin.matrix[2][2]};
  const auto [er, ez] = rep.transverse_eigenvalues;
  if (er < 0.0 && ez < 0.0) {
    rep.classification = Classification::OrbitStable;
  } else if (er > 0.0 || ez > 0.0) {
    rep.classification = Classification::OrbitUnstable;
  } else {
    rep.classification = Classification::Marginal;
  }
  return rep;
}

inline StabilityReport classify_orbit_stability(const ModeField& f) {
  return classify_linearization(linearize_outer(f));
}

/// Restriction to the half-plane y = 0, x >= 0. In the inner strip
/// x' = x (rate + z_coupling z); in the outer strip (x', z') = outer (x-d, z).
struct XozReduction {
  Matrix2 outer{};
  InnerRadialLaw inner;
  double z_rate = 0.0;
  double boundary = 0.5;
};

inline XozReduction reduce_to_xoz(const ModeField& f) {
  return {linearize_outer(f).transverse_block(), inner_radial_law(f), z_rate(f),
          f.boundary_radius()};
}

struct AverageCondition {
  double sum_a = 0.0;
  double sum_b = 0.0;
  double sum_c = 0.0;
  /// sum_a < -1, sum_c < -1 and sum_b == 0 (to 1e-12).
  bool satisfied = false;
  /// Reported independently of `satisfied`.
  StabilityReport average;
};

inline AverageCondition average_condition_check(std::span<const FamilyParams> families) {
  if (families.empty()) throw InvalidInput("average condition needs at least one family");
  const double d = families.front().d;
  std::vector<ModeField> fields;
  AverageCondition out;
  for (const auto& p : families) {
    if (std::fabs(p.d - d) > 1e-12 * d) throw InvalidInput("families have different orbit radii");
    fields.push_back(ModeField::family(p));
    out.sum_a += p.a;
    out.sum_b += p.b;
    out.sum_c += p.c;
  }
  out.satisfied = out.sum_a < -1.0 && out.sum_c < -1.0 && std::fabs(out.sum_b) <= 1e-12;
  out.average = classify_orbit_stability(make_equal_average(fields));
  return out;
}

/// exp(tau * M) for upper-triangular 2x2 M.
inline Matrix2 expm_upper_triangular(const Matrix2& m, double tau) {
  const double a = m[0][0];
  const double b = m[0][1];
  const double c = m[1][1];
  const double ea = std::exp(a * tau);
  const double ec = std::exp(c * tau);
  double off = 0.0;
  if (std::fabs(a - c) < 1e-9) {
    // confluent limit, centered on the mean eigenvalue
    off = b * tau * std::exp(0.5 * (a + c) * tau);
  } else {
    off = b * (ea - ec) / (a - c);
  }
  return {{{ea, off}, {0.0, ec}}};
}

inline Matrix2 multiply(const Matrix2& x, const Matrix2& y) {
  Matrix2 out{};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
  }
  return out;
}

struct FloquetResult {
  /// Transverse (r, z) period map over one full switching cycle.
  Matrix2 period_map{};
  std::array<double, 2> multipliers{};
  double spectral_radius = 0.0;
};

/// Period map of the outer linearization under round-robin switching with a
/// fixed dwell: exp(A_{n-1} dwell) ... exp(A_0 dwell).
inline FloquetResult floquet_outer(std::span<const ModeField> fields, double dwell) {
  if (fields.empty()) throw InvalidInput("floquet analysis needs at least one field");
  if (!std::isfinite(dwell) || !(dwell > 0.0)) throw InvalidInput("dwell must be positive");
  const double d = fields.front().orbit_radius();
  FloquetResult out;
  out.period_map = {{{1.0, 0.0}, {0.0, 1.0}}};
  for (const auto& f : fields) {
    if (std::fabs(f.orbit_radius() - d) > 1e-12 * d) {
      throw InvalidInput("fields have different orbit radii");
    }
    const Matrix2 block = linearize_outer(f).transverse_block();
    out.period_map = multiply(expm_upper_triangular(block, dwell), out.period_map);
  }
  // triangular product: the diagonal holds the multipliers
  out.multipliers = {out.period_map[0][0], out.period_map[1][1]};
  out.spectral_radius = std::fmax(std::fabs(out.multipliers[0]), std::fabs(out.multipliers[1]));
  return out;
}

inline FloquetResult floquet_outer(std::initializer_list<ModeField> fields, double dwell) {
  return floquet_outer(std::span<const ModeField>(fields.begin(), fields.size()), dwell);
}

struct ConvergenceOptions {
  double threshold = 0.05;
  double tail_fraction = 0.25;
  /// Distances at or below this are treated as numerically unresolved and are
  /// excluded from the decay-rate fit.
  double resolution_floor = 1e-9;
};

struct ConvergenceReport {
  bool converged = false;
  /// Mean orbit distance over the tail window.
  double final_distance = 0.0;
  double initial_distance = 0.0;
  /// Least-squares slope of ln(distance) against t.
  double decay_rate = 0.0;
  double threshold = 0.05;
  double window = 0.25;
  double resolution_floor = 1e-9;
};

namespace detail {

inline double log_slope(std::span<const double> ts, std::span<const double> ds) {
  const auto n = static_cast<double>(ts.size());
  double mt = 0.0;
  double ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += std::log(ds[i]);
  }
  mt /= n;
  ml /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double dt = ts[i] - mt;
    sxy += dt * (std::log(ds[i]) - ml);
    sxx += dt * dt;
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace detail

/// Tail statistics of the orbit distance along a trajectory.
///
/// final_distance averages the last `tail_fraction` of the time span. The
/// decay rate is fitted over the last `tail_fraction` of the resolved horizon,
/// i.e. up to the last sample whose distance exceeds `resolution_floor`; a
/// converging RK4 run settles on a numerical orbit O(h^4) away from the exact
/// one, and log-distances below that carry no information. The rate is 0 when
/// nothing is resolved.
inline ConvergenceReport convergence_report(const Trajectory& traj, double d,
                                            const ConvergenceOptions& opts = {}) {
  if (traj.empty()) throw InvalidInput("trajectory is empty");
  if (!(opts.tail_fraction > 0.0) || opts.tail_fraction > 1.0) {
    throw InvalidInput("tail_fraction must lie in (0, 1]");
  }
  const auto& samples = traj.samples;
  std::vector<double> dist(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) dist[i] = orbit_distance(samples[i].state, d);

  ConvergenceReport rep;
  rep.threshold = opts.threshold;
  rep.window = opts.tail_fraction;
  rep.resolution_floor = opts.resolution_floor;
  rep.initial_distance = dist.front();

  const double t0 = samples.front().t;
  const double tail_start = samples.back().t - opts.tail_fraction * (samples.back().t - t0);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].t >= tail_start) {
      sum += dist[i];
      ++count;
    }
  }
  rep.final_distance = sum / static_cast<double>(count);
  rep.converged = rep.final_distance < opts.threshold;

  std::optional<std::size_t> last_resolved;
  for (std::size_t i = samples.size(); i-- > 0;) {
    if (dist[i] > opts.resolution_floor) {
      last_resolved = i;
      break;
    }
  }
  if (last_resolved) {
    const double horizon = samples[*last_resolved].t;
    const double fit_start = horizon - opts.tail_fraction * (horizon - t0);
    std::vector<double> ts;
    std::vector<double> ds;
    for (std::size_t i = 0; i <= *last_resolved; ++i) {
      if (samples[i].t >= fit_start && dist[i] > opts.resolution_floor) {
        ts.push_back(samples[i].t);
        ds.push_back(dist[i]);
      }
    }
    if (ts.size() >= 2) rep.decay_rate = detail::log_slope(ts, ds);
  }
  return rep;
}

enum class RowStatus { Ok, Diverged };

struct SweepRow {
  double dwell = 0.0;
  RowStatus status = RowStatus::Ok;
  std::optional<double> diverged_at;
  /// Judged on the partial run when the row diverged.
  ConvergenceReport convergence;
  FloquetResult floquet;
};

struct SweepOptions {
  /// Kind, seed and start mode are taken from here; the dwell (or mean dwell)
  /// is replaced per row.
  SwitchSchedule schedule;
  ConvergenceOptions convergence;
  bool parallel = true;
};

inline SwitchSchedule with_dwell(SwitchSchedule s, double dwell) {
  if (auto* p = std::get_if<PeriodicDwell>(&s.law)) {
    p->dwell = dwell;
  } else {
    std::get<StochasticDwell>(s.law).mean_dwell = dwell;
  }
  return s;
}

/// One row per dwell, in input order. Rows are independent and may run
/// concurrently; the result is identical to the sequential sweep.
inline std::vector<SweepRow> dwell_sweep(std::span<const ModeField> fields,
                                         std::span<const double> dwells, const CartesianState& s0,
                                         double t_end, const IntegratorConfig& config,
                                         const SweepOptions& opts = {}) {
  if (fields.empty()) throw InvalidInput("sweep needs at least one field");
  if (dwells.empty()) throw InvalidInput("sweep needs at least one dwell");
  for (double dw : dwells) {
    if (!std::isfinite(dw) || !(dw > 0.0)) throw InvalidInput("dwells must be positive");
  }
  const double d = fields.front().orbit_radius();
  SwitchSchedule base = opts.schedule;
  base.mode_count = fields.size();
  if (base.start_mode >= base.mode_count) base.start_mode = 0;

  auto run_row = [&](double dwell) {
    SweepRow row;
    row.dwell = dwell;
    row.floquet = floquet_outer(fields, dwell);
    const SwitchSchedule schedule = with_dwell(base, dwell);
    try {
      const auto traj = simulate_switched(fields, schedule, s0, t_end, config);
      row.convergence = convergence_report(traj, d, opts.convergence);
    } catch (const DivergenceError& e) {
      row.status = RowStatus::Diverged;
      row.diverged_at = e.time();
      row.convergence = convergence_report(e.partial(), d, opts.convergence);
      row.convergence.converged = false;
    }
    return row;
  };

  std::vector<SweepRow> rows;
  rows.reserve(dwells.size());
  if (opts.parallel && dwells.size() > 1) {
    std::vector<std::future<SweepRow>> pending;
    pending.reserve(dwells.size());
    for (double dw : dwells) pending.push_back(std::async(std::launch::async, run_row, dw));
    for (auto& f : pending) rows.push_back(f.get());
  } else {
    for (double dw : dwells) rows.push_back(run_row(dw));
  }
  return rows;
}

}  // namespace switchsim

#endif  // SWITCHSIM_ANALYSIS_HPP
