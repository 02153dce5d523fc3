#ifndef SWITCHSIM_TESTS_ORACLES_HPP
#define SWITCHSIM_TESTS_ORACLES_HPP

// Independent reference computations used to freeze expected values. None of
// these call into the code paths they check.

#include <array>
#include <cmath>

#include "switchsim/state.hpp"

namespace oracle {

/// RK4 applied to y' = lambda y is exactly the quartic Taylor polynomial of exp.
inline double rk4_linear_factor(double lambda_h) {
  const double x = lambda_h;
  return 1.0 + x + x * x / 2.0 + x * x * x / 6.0 + x * x * x * x / 24.0;
}

using M2 = std::array<std::array<double, 2>, 2>;

inline M2 mul(const M2& a, const M2& b) {
  M2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

/// exp(tau M) by scaling and squaring of a 30-term Taylor series; valid for
/// any 2x2 matrix, not just triangular ones.
inline M2 expm_series(const M2& m, double tau) {
  int squarings = 0;
  double norm = 0.0;
  for (const auto& row : m)
    for (double v : row) norm = std::fmax(norm, std::fabs(v * tau));
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const double s = tau / std::ldexp(1.0, squarings);
  M2 a{{{m[0][0] * s, m[0][1] * s}, {m[1][0] * s, m[1][1] * s}}};
  M2 sum{{{1.0, 0.0}, {0.0, 1.0}}};
  M2 term = sum;
  for (int k = 1; k <= 30; ++k) {
    term = mul(term, a);
    for (auto& row : term)
      for (double& v : row) v /= k;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) sum[i][j] += term[i][j];
  }
  for (int k = 0; k < squarings; ++k) sum = mul(sum, sum);
  return sum;
}

/// Cartesian velocity of a cylindrical motion (r', theta', z') at (r, theta, z).
inline switchsim::CartesianState push_forward(double r, double theta, double dr, double dtheta,
                                              double dz) {
  return {dr * std::cos(theta) - r * std::sin(theta) * dtheta,
          dr * std::sin(theta) + r * std::cos(theta) * dtheta, dz};
}

/// Central finite difference of a scalar function.
template <class F>
double central_diff(F f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle

#endif  // SWITCHSIM_TESTS_ORACLES_HPP
