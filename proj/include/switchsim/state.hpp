#ifndef SWITCHSIM_STATE_HPP
#define SWITCHSIM_STATE_HPP

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace switchsim {

/// Raised for malformed arguments (non-finite states, negative radii,
/// inconsistent weights, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Point (or tangent vector) in R^3. Vector-field evaluations return the
/// derivative in the same type, which lets the integrators do arithmetic on it.
struct CartesianState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr CartesianState operator+(CartesianState a, const CartesianState& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend constexpr CartesianState operator-(CartesianState a, const CartesianState& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend constexpr CartesianState operator*(double s, const CartesianState& a) {
    return {s * a.x, s * a.y, s * a.z};
  }
  friend constexpr bool operator==(const CartesianState&, const CartesianState&) = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double max_abs_diff(const CartesianState& a, const CartesianState& b) {
  return std::fmax(std::fabs(a.x - b.x), std::fmax(std::fabs(a.y - b.y), std::fabs(a.z - b.z)));
}

/// (r, theta, z) with r >= 0 and theta in [0, 2*pi).
struct CylindricalState {
  double r = 0.0;
  double theta = 0.0;
  double z = 0.0;

  friend constexpr bool operator==(const CylindricalState&, const CylindricalState&) = default;
};

/// Time derivative in cylindrical coordinates.
struct CylindricalRate {
  double dr = 0.0;
  double dtheta = 0.0;
  double dz = 0.0;

  friend constexpr bool operator==(const CylindricalRate&, const CylindricalRate&) = default;
};

/// Shortest decimal text that round-trips `v`, for labels and diagnostics.
inline std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into [0, 2*pi).
inline double normalize_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  // fmod + shift can land exactly on 2*pi through rounding
  if (t >= kTwoPi) t = 0.0;
  return t;
}

inline CylindricalState to_cylindrical(const CartesianState& s) {
  const double r = std::hypot(s.x, s.y);
  if (r == 0.0) return {0.0, 0.0, s.z};
  return {r, normalize_angle(std::atan2(s.y, s.x)), s.z};
}

inline CartesianState to_cartesian(const CylindricalState& s) {
  return {s.r * std::cos(s.theta), s.r * std::sin(s.theta), s.z};
}

}  // namespace switchsim

#endif  // SWITCHSIM_STATE_HPP
