#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "switchsim/fields.hpp"

using namespace switchsim;

namespace {

constexpr double kPi = std::numbers::pi;

void expect_state_near(const CartesianState& got, const CartesianState& want, double tol) {
  EXPECT_NEAR(got.x, want.x, tol);
  EXPECT_NEAR(got.y, want.y, tol);
  EXPECT_NEAR(got.z, want.z, tol);
}

std::vector<ModeField> bundled_fields() {
  const auto s1 = ModeField::sys1();
  const auto s2 = ModeField::sys2();
  return {s1,
          s2,
          ModeField::average(),
          ModeField::family({-1.0, 0.3, 0.5, 1.7}),
          ModeField::family({3.0, -2.0, -6.0, 0.4}),
          make_weighted_average({s1, s2}, {0.3, 0.7})};
}

}  // namespace

TEST(EvalCartesian, Sys1OnOrbitIsPureRotation) {
  const auto v = eval_cartesian(ModeField::sys1(), {1.0, 0.0, 0.0});
  EXPECT_EQ(v, (CartesianState{0.0, 1.0, 0.0}));
}

TEST(EvalCartesian, Sys1InnerRegion) {
  // radial speed r (10 - 2z) = 0.25 * 9.8
  expect_state_near(eval_cartesian(ModeField::sys1(), {0.25, 0.0, 0.1}), {2.45, 0.25, 0.2}, 1e-15);
}

TEST(EvalCartesian, Sys2OuterRegion) {
  // radial 2*2 + 0.5 - 2 = 2.5, z' = -10 * 0.5
  expect_state_near(eval_cartesian(ModeField::sys2(), {2.0, 0.0, 0.5}), {2.5, 2.0, -5.0}, 1e-15);
}

TEST(EvalCartesian, OriginIsFinite) {
  for (const auto& f : bundled_fields()) {
    const auto v = eval_cartesian(f, {0.0, 0.0, 0.7});
    EXPECT_TRUE(v.finite()) << f.describe();
    EXPECT_EQ(v.x, 0.0);
    EXPECT_EQ(v.y, 0.0);
  }
}

TEST(EvalCartesian, RejectsNonFiniteState) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(eval_cartesian(ModeField::sys1(), {nan, 0.0, 0.0}), InvalidInput);
  EXPECT_THROW(eval_cartesian(ModeField::sys2(), {0.0, inf, 0.0}), InvalidInput);
  EXPECT_THROW(eval_cartesian(ModeField::average(), {0.0, 0.0, -inf}), InvalidInput);
}

TEST(EvalCartesian, OuterBranchOwnsTheBoundary) {
  // z != 0 so the two branches could only agree through continuity; on the
  // circle r = 1/2 exactly the outer formula is used
  const CartesianState s{0.5, 0.0, 0.3};
  EXPECT_EQ(eval_cartesian(ModeField::sys1(), s),
            eval_cartesian_branch(ModeField::sys1(), s, Branch::Outer));
  EXPECT_EQ(eval_cylindrical(ModeField::sys1(), {0.5, 0.0, 0.3}),
            eval_cylindrical_branch(ModeField::sys1(), {0.5, 0.0, 0.3}, Branch::Outer));
}

TEST(EvalCylindrical, Examples) {
  const auto a = eval_cylindrical(ModeField::sys2(), {0.25, 0.0, 0.1});
  EXPECT_NEAR(a.dr, -0.45, 1e-15);
  EXPECT_EQ(a.dtheta, 1.0);
  EXPECT_NEAR(a.dz, -1.0, 1e-15);

  const auto b = eval_cylindrical(ModeField::sys1(), {1.5, 0.0, 0.2});
  EXPECT_NEAR(b.dr, -5.2, 1e-15);
  EXPECT_EQ(b.dtheta, 1.0);
  EXPECT_NEAR(b.dz, 0.4, 1e-15);

  EXPECT_EQ(eval_cylindrical(ModeField::average(), {1.0, kPi, 0.0}), (CylindricalRate{0.0, 1.0, 0.0}));
}

TEST(EvalCylindrical, RejectsNegativeRadius) {
  EXPECT_THROW(eval_cylindrical(ModeField::sys1(), {-0.1, 0.0, 0.0}), InvalidInput);
  EXPECT_THROW(eval_cylindrical(ModeField::sys1(), {std::nan(""), 0.0, 0.0}), InvalidInput);
}

TEST(WeightedAverage, Examples) {
  const auto s1 = ModeField::sys1();
  const auto s2 = ModeField::sys2();
  const auto avg = make_weighted_average({s1, s2}, {0.5, 0.5});

  // (-5.2 + 1.2) / 2, matching the averaged outer law -4 (r - 1)
  EXPECT_NEAR(eval_cylindrical(avg, {1.5, 0.0, 0.2}).dr, -2.0, 1e-15);
  // (10 * 0.25 - 2 * 0.25) / 2 = 4 * 0.25
  EXPECT_NEAR(eval_cylindrical(avg, {0.25, 0.0, 0.0}).dr, 1.0, 1e-15);

  const auto single = make_weighted_average({s1}, {1.0});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const CartesianState s{u(rng), u(rng), u(rng)};
    EXPECT_EQ(eval_cartesian(single, s), eval_cartesian(s1, s));
  }
}

TEST(WeightedAverage, EqualWeightsOfSys1Sys2MatchAverage) {
  const auto s1 = ModeField::sys1();
  const auto s2 = ModeField::sys2();
  const auto avg = make_weighted_average({s1, s2}, {0.5, 0.5});
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const CartesianState s{u(rng), u(rng), u(rng)};
    expect_state_near(eval_cartesian(avg, s), eval_cartesian(ModeField::average(), s), 1e-12);
  }
}

TEST(WeightedAverage, Errors) {
  const auto s1 = ModeField::sys1();
  const auto s2 = ModeField::sys2();
  EXPECT_THROW(make_weighted_average({s1, s2}, {1.0}), InvalidInput);
  EXPECT_THROW(make_weighted_average({s1, s2}, {0.5, 0.6}), InvalidInput);
  EXPECT_THROW(make_weighted_average({s1, s2}, {1.5, -0.5}), InvalidInput);
  EXPECT_THROW(make_weighted_average({s1, ModeField::family({-1.0, 0.0, -1.0, 2.0})}, {0.5, 0.5}),
               InvalidInput);
  // 1e-13 off is inside the tolerance
  EXPECT_NO_THROW(make_weighted_average({s1, s2}, {0.5, 0.5 + 1e-13}));
}

TEST(WeightedAverage, LinearityProperty) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  const auto fields = bundled_fields();
  const std::vector<ModeField> unit_d = {fields[0], fields[1], fields[2], fields[5]};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> weights;
    double total = 0.0;
    for (std::size_t k = 0; k < unit_d.size(); ++k) {
      weights.push_back(w(rng));
      total += weights.back();
    }
    for (double& x : weights) x /= total;
    const auto avg = make_weighted_average(unit_d, weights);
    for (int i = 0; i < 20; ++i) {
      const CartesianState s{u(rng), u(rng), u(rng)};
      CartesianState expect;
      for (std::size_t k = 0; k < unit_d.size(); ++k) {
        expect = expect + weights[k] * eval_cartesian(unit_d[k], s);
      }
      expect_state_near(eval_cartesian(avg, s), expect, 1e-12);
    }
  }
}

TEST(Coordinates, Examples) {
  const auto a = to_cylindrical({0.0, 1.0, 3.0});
  EXPECT_NEAR(a.r, 1.0, 1e-15);
  EXPECT_NEAR(a.theta, kPi / 2.0, 1e-15);
  EXPECT_EQ(a.z, 3.0);

  const auto b = to_cartesian({2.0, kPi, -1.0});
  EXPECT_NEAR(b.x, -2.0, 1e-15);
  EXPECT_NEAR(b.y, 0.0, 1e-15);
  EXPECT_EQ(b.z, -1.0);

  EXPECT_EQ(to_cylindrical({0.0, 0.0, 5.0}), (CylindricalState{0.0, 0.0, 5.0}));
  // negative zero x would give atan2 = pi; the origin convention wins
  EXPECT_EQ(to_cylindrical({-0.0, 0.0, 5.0}).theta, 0.0);
}

TEST(Coordinates, RoundTripAndNormalization) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const CartesianState s{u(rng), u(rng), u(rng)};
    const auto c = to_cylindrical(s);
    EXPECT_GE(c.theta, 0.0);
    EXPECT_LT(c.theta, kTwoPi);
    expect_state_near(to_cartesian(c), s, 1e-12);
  }
  EXPECT_EQ(normalize_angle(kTwoPi), 0.0);
  EXPECT_NEAR(normalize_angle(-kPi / 2.0), 1.5 * kPi, 1e-15);
  EXPECT_LT(normalize_angle(-1e-18), kTwoPi);
}

TEST(Continuity, BundledFields) {
  EXPECT_LE(boundary_continuity_check(ModeField::sys1(), 100), 1e-12);
  EXPECT_LE(boundary_continuity_check(ModeField::sys2(), 100), 1e-12);
  EXPECT_LE(boundary_continuity_check(ModeField::family(sys1_as_family()), 100), 1e-12);
  for (const auto& f : bundled_fields()) {
    EXPECT_LE(boundary_continuity_check(f, 1000), 1e-12) << f.describe();
  }
  EXPECT_THROW(boundary_continuity_check(ModeField::sys1(), 0), InvalidInput);
}

TEST(Continuity, LiteralCouplingBreaksForRadiusOtherThanOne) {
  // mismatch on the boundary is |b z (d - 1)|; z spans [-1, 1]
  const double b = 0.8;
  const auto literal = ModeField::family({-1.0, b, -1.0, 3.0, InnerCoupling::Literal});
  const double gap = boundary_continuity_check(literal, 1000);
  EXPECT_GT(gap, 0.99 * std::fabs(b * 2.0));
  EXPECT_LE(gap, std::fabs(b * 2.0) + 1e-12);

  const auto literal_unit = ModeField::family({-1.0, b, -1.0, 1.0, InnerCoupling::Literal});
  EXPECT_LE(boundary_continuity_check(literal_unit, 1000), 1e-12);
}

TEST(Continuity, RandomFamiliesProperty) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> p(-12.0, 12.0);
  std::uniform_real_distribution<double> radius(0.1, 5.0);
  for (int i = 0; i < 200; ++i) {
    const auto f = ModeField::family({p(rng), p(rng), p(rng), radius(rng)});
    EXPECT_LE(boundary_continuity_check(f, 200), 1e-12) << f.describe();
  }
}

TEST(OrbitInvariance, Property) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  for (const auto& f : bundled_fields()) {
    const double d = f.orbit_radius();
    for (int i = 0; i < 200; ++i) {
      const double theta = angle(rng);
      const auto v = eval_cylindrical(f, {d, theta, 0.0});
      EXPECT_LE(std::fabs(v.dr), 1e-12);
      EXPECT_EQ(v.dtheta, 1.0);
      EXPECT_LE(std::fabs(v.dz), 1e-12);
      // Cartesian: tangent rotation only
      const auto s = to_cartesian({d, theta, 0.0});
      expect_state_near(eval_cartesian(f, s), {-s.y, s.x, 0.0}, 1e-12);
    }
  }
}

TEST(CoordinateConsistency, CartesianMatchesPushedForwardCylindrical) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ur(0.05, 3.0);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> uz(-2.0, 2.0);
  for (const auto& f : bundled_fields()) {
    for (int i = 0; i < 1000; ++i) {
      const CylindricalState c{ur(rng) * f.orbit_radius(), angle(rng), uz(rng)};
      const auto rate = eval_cylindrical(f, c);
      const auto pushed = oracle::push_forward(c.r, c.theta, rate.dr, rate.dtheta, rate.dz);
      expect_state_near(eval_cartesian(f, to_cartesian(c)), pushed, 1e-9);
    }
  }
}

TEST(FamilySpecialization, ReproducesConcreteSystems) {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> ur(0.0, 3.0);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> uz(-2.0, 2.0);
  const std::pair<ModeField, FamilyParams> pairs[] = {{ModeField::sys1(), {-10.0, -1.0, 2.0, 1.0}},
                                                      {ModeField::sys2(), {2.0, 1.0, -10.0, 1.0}},
                                                      {ModeField::average(), {-4.0, 0.0, -4.0, 1.0}}};
  for (const auto& [concrete, params] : pairs) {
    const auto fam = ModeField::family(params);
    for (int i = 0; i < 1000; ++i) {
      const CylindricalState c{ur(rng), angle(rng), uz(rng)};
      const auto a = eval_cylindrical(concrete, c);
      const auto b = eval_cylindrical(fam, c);
      EXPECT_NEAR(a.dr, b.dr, 1e-12);
      EXPECT_EQ(a.dtheta, b.dtheta);
      EXPECT_NEAR(a.dz, b.dz, 1e-12);
    }
  }
}

TEST(ModeField, FamilyValidation) {
  EXPECT_THROW(ModeField::family({1.0, 0.0, 1.0, 0.0}), InvalidInput);
  EXPECT_THROW(ModeField::family({1.0, 0.0, 1.0, -2.0}), InvalidInput);
  EXPECT_THROW(ModeField::family({std::nan(""), 0.0, 1.0, 1.0}), InvalidInput);
  EXPECT_THROW(ModeField::sys1().params(), InvalidInput);
  EXPECT_EQ(ModeField::family({1.0, 0.0, 1.0, 3.0}).boundary_radius(), 1.5);
  EXPECT_EQ(ModeField::sys2().boundary_radius(), 0.5);
}
