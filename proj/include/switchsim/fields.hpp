#ifndef SWITCHSIM_FIELDS_HPP
#define SWITCHSIM_FIELDS_HPP

// Piecewise vector fields sharing the invariant circle r = d, z = 0.
//
// Every field is rotationally symmetric with theta' = 1 and decoupled linear
// z-dynamics z' = c z. The radial rate has two branches split at the cylinder
// r = d/2:
//
//   inner (r <  d/2):  r' = r * (rate + coupling * z)
//   outer (r >= d/2):  r' = a (r - d) + b z
//
// The three concrete systems (Sys1, Sys2 and their equal-weight Average) are
// written out explicitly in both coordinate systems; the parameterized family
// and weighted averages are evaluated through the generic laws above.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "switchsim/state.hpp"

namespace switchsim {

enum class FieldKind { Sys1, Sys2, Average, Family, WeightedAverage };

/// How the inner-region r-z coupling scales with the orbit radius.
///
/// Scaled uses (2b/d) z r, which is continuous across r = d/2 for every d.
/// Literal uses 2 b z r, which only matches the outer branch when d = 1; it is
/// kept so the self-check can demonstrate the discontinuity.
enum class InnerCoupling { Scaled, Literal };

struct FamilyParams {
  double a = 0.0;  // outer radial eigenvalue
  double b = 0.0;  // outer r-z coupling
  double c = 0.0;  // z eigenvalue
  double d = 1.0;  // orbit radius
  InnerCoupling coupling = InnerCoupling::Scaled;

  friend bool operator==(const FamilyParams&, const FamilyParams&) = default;

  void validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d)) {
      throw InvalidInput("family parameters must be finite");
    }
    if (!(d > 0.0)) throw InvalidInput("family orbit radius d must be positive");
  }
};

enum class Branch { Inner, Outer };

/// Inner radial law r' = r * (rate + z_coupling * z).
struct InnerRadialLaw {
  double rate = 0.0;
  double z_coupling = 0.0;
};

struct WeightedMember;

class ModeField {
 public:
  static ModeField sys1() { return ModeField(FieldKind::Sys1); }
  static ModeField sys2() { return ModeField(FieldKind::Sys2); }
  static ModeField average() { return ModeField(FieldKind::Average); }
  static ModeField family(const FamilyParams& p) {
    p.validate();
    ModeField f(FieldKind::Family);
    f.params_ = p;
    return f;
  }

  FieldKind kind() const { return kind_; }

  const FamilyParams& params() const {
    if (kind_ != FieldKind::Family) throw InvalidInput("field is not a family member");
    return params_;
  }

  const std::vector<WeightedMember>& members() const { return members_; }

  /// Radius d of the invariant circle.
  double orbit_radius() const;
  /// Radius of the inner/outer split; the outer branch owns r == boundary_radius().
  double boundary_radius() const { return 0.5 * orbit_radius(); }

  std::string describe() const;

  friend bool operator==(const ModeField& a, const ModeField& b);

  friend ModeField make_weighted_average(std::span<const ModeField> fields,
                                         std::span<const double> weights);

 private:
  explicit ModeField(FieldKind k) : kind_(k) {}

  FieldKind kind_;
  FamilyParams params_{};
  std::vector<WeightedMember> members_;
};

struct WeightedMember {
  ModeField field;
  double weight = 0.0;

  friend bool operator==(const WeightedMember&, const WeightedMember&) = default;
};

inline bool operator==(const ModeField& a, const ModeField& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case FieldKind::Family:
      return a.params_ == b.params_;
    case FieldKind::WeightedAverage:
      return a.members_ == b.members_;
    default:
      return true;
  }
}

inline double ModeField::orbit_radius() const {
  switch (kind_) {
    case FieldKind::Family:
      return params_.d;
    case FieldKind::WeightedAverage:
      return members_.front().field.orbit_radius();
    default:
      return 1.0;
  }
}

inline std::string ModeField::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case FieldKind::Sys1:
      return "sys1";
    case FieldKind::Sys2:
      return "sys2";
    case FieldKind::Average:
      return "average";
    case FieldKind::Family:
      os << "family(a=" << shortest(params_.a) << ",b=" << shortest(params_.b)
         << ",c=" << shortest(params_.c) << ",d=" << shortest(params_.d);
      if (params_.coupling == InnerCoupling::Literal) os << ",literal";
      os << ")";
      return os.str();
    case FieldKind::WeightedAverage:
      os << "weighted[";
      for (std::size_t i = 0; i < members_.size(); ++i) {
        if (i) os << ", ";
        os << shortest(members_[i].weight) << "*" << members_[i].field.describe();
      }
      os << "]";
      return os.str();
  }
  return "unknown";
}

inline constexpr double kWeightSumTolerance = 1e-12;

/// Convex combination of fields. Evaluating the result at any state gives the
/// weighted sum of the member evaluations.
inline ModeField make_weighted_average(std::span<const ModeField> fields,
                                       std::span<const double> weights) {
  if (fields.empty()) throw InvalidInput("weighted average needs at least one field");
  if (fields.size() != weights.size()) {
    throw InvalidInput("weighted average: fields and weights differ in length");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidInput("weights must be finite and nonnegative");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::fabs(total - 1.0) > kWeightSumTolerance) {
    throw InvalidInput("weights must sum to 1");
  }
  const double radius = fields.front().boundary_radius();
  for (const auto& f : fields) {
    if (std::fabs(f.boundary_radius() - radius) > 1e-12 * radius) {
      throw InvalidInput("weighted average members have different boundary radii");
    }
  }
  ModeField out(FieldKind::WeightedAverage);
  out.members_.reserve(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) out.members_.push_back({fields[i], weights[i]});
  return out;
}

inline ModeField make_weighted_average(std::initializer_list<ModeField> fields,
                                       std::initializer_list<double> weights) {
  return make_weighted_average(std::span<const ModeField>(fields.begin(), fields.size()),
                               std::span<const double>(weights.begin(), weights.size()));
}

/// Equal-weight average, the limit of round-robin switching with equal dwells.
inline ModeField make_equal_average(std::span<const ModeField> fields) {
  std::vector<double> w(fields.size(), 1.0 / static_cast<double>(fields.size()));
  // 1/n summed n times can miss 1 by more than an ulp for some n; push the
  // remainder into the last weight.
  if (!w.empty()) {
    const double head = std::accumulate(w.begin(), w.end() - 1, 0.0);
    w.back() = 1.0 - head;
  }
  return make_weighted_average(fields, w);
}

/// Coefficient c of z' = c z.
inline double z_rate(const ModeField& f) {
  switch (f.kind()) {
    case FieldKind::Sys1:
      return 2.0;
    case FieldKind::Sys2:
      return -10.0;
    case FieldKind::Average:
      return -4.0;
    case FieldKind::Family:
      return f.params().c;
    case FieldKind::WeightedAverage: {
      double c = 0.0;
      for (const auto& m : f.members()) c += m.weight * z_rate(m.field);
      return c;
    }
  }
  return 0.0;
}

inline InnerRadialLaw inner_radial_law(const ModeField& f) {
  switch (f.kind()) {
    case FieldKind::Sys1:
      return {10.0, -2.0};
    case FieldKind::Sys2:
      return {-2.0, 2.0};
    case FieldKind::Average:
      return {4.0, 0.0};
    case FieldKind::Family: {
      const auto& p = f.params();
      const double coupling = p.coupling == InnerCoupling::Scaled ? 2.0 * p.b / p.d : 2.0 * p.b;
      return {-p.a, coupling};
    }
    case FieldKind::WeightedAverage: {
      InnerRadialLaw law;
      for (const auto& m : f.members()) {
        const auto l = inner_radial_law(m.field);
        law.rate += m.weight * l.rate;
        law.z_coupling += m.weight * l.z_coupling;
      }
      return law;
    }
  }
  return {};
}

namespace detail {

inline void require_finite(const CartesianState& s) {
  if (!s.finite()) throw InvalidInput("state must be finite");
}

inline void require_valid(const CylindricalState& s) {
  if (!std::isfinite(s.r) || !std::isfinite(s.theta) || !std::isfinite(s.z)) {
    throw InvalidInput("state must be finite");
  }
  if (s.r < 0.0) throw InvalidInput("cylindrical radius must be nonnegative");
}

}  // namespace detail

/// Radial and z rates of one branch, evaluated regardless of which region the
/// state lies in (used for continuity checks).
inline CylindricalRate eval_cylindrical_branch(const ModeField& f, const CylindricalState& s,
                                               Branch branch) {
  const double r = s.r;
  const double z = s.z;
  const bool inner = branch == Branch::Inner;
  switch (f.kind()) {
    case FieldKind::Sys1:
      return {inner ? 10.0 * r - 2.0 * r * z : -10.0 * (r - 1.0) - z, 1.0, 2.0 * z};
    case FieldKind::Sys2:
      return {inner ? -2.0 * r + 2.0 * r * z : 2.0 * (r - 1.0) + z, 1.0, -10.0 * z};
    case FieldKind::Average:
      return {inner ? 4.0 * r : -4.0 * (r - 1.0), 1.0, -4.0 * z};
    case FieldKind::Family: {
      const auto& p = f.params();
      if (inner) {
        const auto law = inner_radial_law(f);
        return {r * (law.rate + law.z_coupling * z), 1.0, p.c * z};
      }
      return {p.a * (r - p.d) + p.b * z, 1.0, p.c * z};
    }
    case FieldKind::WeightedAverage: {
      CylindricalRate out{0.0, 1.0, 0.0};
      for (const auto& m : f.members()) {
        const auto v = eval_cylindrical_branch(m.field, s, branch);
        out.dr += m.weight * v.dr;
        out.dz += m.weight * v.dz;
      }
      return out;
    }
  }
  return {};
}

inline CylindricalRate eval_cylindrical(const ModeField& f, const CylindricalState& s) {
  detail::require_valid(s);
  return eval_cylindrical_branch(f, s, s.r < f.boundary_radius() ? Branch::Inner : Branch::Outer);
}

/// Cartesian form of one branch. Inner branches use the polynomial form
/// x' = x k(z) - y, which is finite on the z-axis.
inline CartesianState eval_cartesian_branch(const ModeField& f, const CartesianState& s,
                                            Branch branch) {
  const double x = s.x;
  const double y = s.y;
  const double z = s.z;
  const bool inner = branch == Branch::Inner;

  if (f.kind() == FieldKind::WeightedAverage) {
    CartesianState out;
    for (const auto& m : f.members()) out = out + m.weight * eval_cartesian_branch(m.field, s, branch);
    return out;
  }

  if (inner) {
    double k = 0.0;
    switch (f.kind()) {
      case FieldKind::Sys1:
        k = 10.0 - 2.0 * z;
        break;
      case FieldKind::Sys2:
        k = -2.0 + 2.0 * z;
        break;
      case FieldKind::Average:
        k = 4.0;
        break;
      default: {
        const auto law = inner_radial_law(f);
        k = law.rate + law.z_coupling * z;
      }
    }
    return {x * k - y, y * k + x, z_rate(f) * z};
  }

  const double rho = std::hypot(x, y);
  double radial = 0.0;  // r' on the outer branch
  switch (f.kind()) {
    case FieldKind::Sys1:
      radial = -10.0 * rho - z + 10.0;
      break;
    case FieldKind::Sys2:
      radial = 2.0 * rho + z - 2.0;
      break;
    case FieldKind::Average:
      radial = -4.0 * rho + 4.0;
      break;
    default: {
      const auto& p = f.params();
      radial = p.a * (rho - p.d) + p.b * z;
    }
  }
  // outer branch is only ever evaluated at rho >= d/2 > 0, except by callers
  // probing the branch off-region
  const double cx = rho > 0.0 ? x / rho : 0.0;
  const double cy = rho > 0.0 ? y / rho : 0.0;
  return {cx * radial - y, cy * radial + x, z_rate(f) * z};
}

inline CartesianState eval_cartesian(const ModeField& f, const CartesianState& s) {
  detail::require_finite(s);
  const double rho = std::hypot(s.x, s.y);
  return eval_cartesian_branch(f, s, rho < f.boundary_radius() ? Branch::Inner : Branch::Outer);
}

struct ContinuityOptions {
  double z_min = -1.0;
  double z_max = 1.0;
};

/// Largest component-wise gap between the inner and outer formulas over
/// `n_samples` points of the boundary cylinder. Both the cylindrical and the
/// Cartesian forms are compared.
inline double boundary_continuity_check(const ModeField& f, int n_samples,
                                        const ContinuityOptions& opts = {}) {
  if (n_samples < 1) throw InvalidInput("n_samples must be at least 1");
  const double radius = f.boundary_radius();
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double worst = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(n_samples);
    const double frac = std::fmod(static_cast<double>(k) * golden, 1.0);
    const double z = opts.z_min + (opts.z_max - opts.z_min) * frac;
    const CylindricalState cyl{radius, theta, z};

    const auto ci = eval_cylindrical_branch(f, cyl, Branch::Inner);
    const auto co = eval_cylindrical_branch(f, cyl, Branch::Outer);
    worst = std::fmax(worst, std::fabs(ci.dr - co.dr));
    worst = std::fmax(worst, std::fabs(ci.dtheta - co.dtheta));
    worst = std::fmax(worst, std::fabs(ci.dz - co.dz));

    const auto cart = to_cartesian(cyl);
    worst = std::fmax(worst, max_abs_diff(eval_cartesian_branch(f, cart, Branch::Inner),
                                          eval_cartesian_branch(f, cart, Branch::Outer)));
  }
  return worst;
}

/// The parameterized-family members that reproduce the concrete systems.
inline FamilyParams sys1_as_family() { return {-10.0, -1.0, 2.0, 1.0}; }
inline FamilyParams sys2_as_family() { return {2.0, 1.0, -10.0, 1.0}; }
inline FamilyParams average_as_family() { return {-4.0, 0.0, -4.0, 1.0}; }

}  // namespace switchsim

#endif  // SWITCHSIM_FIELDS_HPP
