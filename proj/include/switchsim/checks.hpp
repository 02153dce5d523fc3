#ifndef SWITCHSIM_CHECKS_HPP
#define SWITCHSIM_CHECKS_HPP

// Built-in invariant suite behind `switchsim check`.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "switchsim/fields.hpp"
#include "switchsim/integrate.hpp"
#include "switchsim/io.hpp"

namespace switchsim {

enum class CheckStatus { Pass, Fail, Skip };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "PASS";
    case CheckStatus::Fail:
      return "FAIL";
    case CheckStatus::Skip:
      return "SKIP";
  }
  return "FAIL";
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
  double value = 0.0;  // worst observed error
};

inline std::vector<ModeField> default_check_systems() {
  const ModeField s1 = ModeField::sys1();
  const ModeField s2 = ModeField::sys2();
  return {s1,
          s2,
          ModeField::average(),
          ModeField::family(sys1_as_family()),
          ModeField::family({-1.5, 0.7, -2.0, 2.5}),
          make_weighted_average({s1, s2}, {0.25, 0.75})};
}

struct CheckOptions {
  std::vector<ModeField> systems = default_check_systems();
  int samples = 1000;
  std::uint64_t seed = 20240601;
};

/// Family member that uses the unscaled inner coupling 2 b z r with d = 2; its
/// boundary mismatch is |b z| (largest at the ends of the z range).
inline ModeField literal_coupling_family() {
  return ModeField::family({-1.0, 1.5, -1.0, 2.0, InnerCoupling::Literal});
}

namespace detail {

inline CheckResult judge(std::string name, double worst, double tol) {
  CheckResult r;
  r.name = std::move(name);
  r.value = worst;
  r.status = worst <= tol ? CheckStatus::Pass : CheckStatus::Fail;
  r.detail = "max_error=" + shortest(worst) + " tol=" + shortest(tol);
  return r;
}

inline CheckResult skipped(std::string name, std::string why) {
  return {std::move(name), CheckStatus::Skip, std::move(why), 0.0};
}

}  // namespace detail

inline std::vector<CheckResult> run_checks(const CheckOptions& opts = {}) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = opts.samples < 1 ? 1 : opts.samples;

  const char* needs_systems = "no systems configured";
  if (opts.systems.empty()) {
    out.push_back(detail::skipped("continuity", needs_systems));
    out.push_back(detail::skipped("orbit_invariance", needs_systems));
    out.push_back(detail::skipped("coordinate_consistency", needs_systems));
  }

  for (const auto& f : opts.systems) {
    out.push_back(detail::judge("continuity[" + f.describe() + "]",
                                boundary_continuity_check(f, n), 1e-12));
  }

  for (const auto& f : opts.systems) {
    const double d = f.orbit_radius();
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      const double theta = kTwoPi * unit(rng);
      const auto v = eval_cylindrical(f, {d, theta, 0.0});
      worst = std::fmax(worst, std::fabs(v.dr));
      worst = std::fmax(worst, std::fabs(v.dtheta - 1.0));
      worst = std::fmax(worst, std::fabs(v.dz));
    }
    out.push_back(detail::judge("orbit_invariance[" + f.describe() + "]", worst, 1e-12));
  }

  for (const auto& f : opts.systems) {
    const double d = f.orbit_radius();
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      const CylindricalState c{d * (0.05 + 2.95 * unit(rng)), kTwoPi * unit(rng),
                               -1.0 + 2.0 * unit(rng)};
      const auto rate = eval_cylindrical(f, c);
      const double ct = std::cos(c.theta);
      const double st = std::sin(c.theta);
      const CartesianState pushed{rate.dr * ct - c.r * st * rate.dtheta,
                                  rate.dr * st + c.r * ct * rate.dtheta, rate.dz};
      worst = std::fmax(worst, max_abs_diff(pushed, eval_cartesian(f, to_cartesian(c))));
    }
    out.push_back(detail::judge("coordinate_consistency[" + f.describe() + "]", worst, 1e-9));
  }

  {
    const std::pair<ModeField, FamilyParams> pairs[] = {
        {ModeField::sys1(), sys1_as_family()},
        {ModeField::sys2(), sys2_as_family()},
        {ModeField::average(), average_as_family()}};
    for (const auto& [concrete, params] : pairs) {
      const auto fam = ModeField::family(params);
      double worst = 0.0;
      for (int k = 0; k < n; ++k) {
        const CylindricalState c{3.0 * unit(rng), kTwoPi * unit(rng), -2.0 + 4.0 * unit(rng)};
        const auto a = eval_cylindrical(concrete, c);
        const auto b = eval_cylindrical(fam, c);
        worst = std::fmax(worst, std::fmax(std::fabs(a.dr - b.dr), std::fabs(a.dz - b.dz)));
        worst = std::fmax(worst, std::fabs(a.dtheta - b.dtheta));
      }
      out.push_back(detail::judge("family_specialization[" + concrete.describe() + "]", worst, 1e-12));
    }
  }

  if (opts.systems.empty()) {
    out.push_back(detail::skipped("z_oracle", needs_systems));
  } else {
    const double d = opts.systems.front().orbit_radius();
    double worst = 0.0;
    bool diverged = false;
    for (const double dwell : {0.1, 0.37, 1.0}) {
      const auto schedule = SwitchSchedule::periodic(dwell, opts.systems.size());
      const CartesianState s0{1.1 * d, 0.0, 0.05};
      const double t_end = 3.0;
      try {
        const auto traj = simulate_switched(opts.systems, schedule, s0, t_end);
        const double expect = exact_z(s0.z, opts.systems, schedule, t_end);
        worst = std::fmax(worst, std::fabs(traj.back().state.z - expect) / std::fabs(expect));
      } catch (const DivergenceError&) {
        diverged = true;
      }
    }
    auto r = detail::judge("z_oracle", worst, 1e-5);
    if (diverged) {
      r.status = CheckStatus::Fail;
      r.detail += " (run diverged)";
    }
    out.push_back(r);
  }
  return out;
}

inline bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    if (r.status == CheckStatus::Fail) return false;
  }
  return true;
}

}  // namespace switchsim

#endif  // SWITCHSIM_CHECKS_HPP
