#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "atomgw/spacetime.hpp"

using namespace atomgw;
using std::numbers::pi;

TEST(Constants, ExactSpeedOfLight) {
  EXPECT_EQ(PhysicalConstants::c, 299792458.0);
  EXPECT_EQ(PhysicalConstants::hbar, 1.054571817e-34);
}

TEST(StrainAt, ClosedForm) {
  EXPECT_EQ(strain_at({0.0, 1.0, 0.3}, 12.0), 0.0);
  EXPECT_DOUBLE_EQ(strain_at({1e-3, two_pi * 0.01, pi / 2}, 0.0), 1e-3);
  EXPECT_NEAR(strain_at({1e-3, two_pi * 0.01, 0.0}, 25.0), 1e-3, 1e-18);
}

TEST(StrainAt, PeriodicInTime) {
  const GravitationalWave gw{1e-6, 0.37, 0.2};
  const double period = two_pi / gw.omega;
  for (double t : {0.0, 1.3, 7.7}) EXPECT_NEAR(strain_at(gw, t + period), strain_at(gw, t), 1e-20);
}

TEST(GravitationalWave, RejectsNonLinearStrain) {
  EXPECT_THROW((GravitationalWave{1e-3, 1.0, 0.0}.validate()), ValidationError);
  EXPECT_THROW((GravitationalWave{-1e-9, 1.0, 0.0}.validate()), ValidationError);
  EXPECT_THROW((GravitationalWave{1e-9, 0.0, 0.0}.validate()), ValidationError);
  EXPECT_NO_THROW((GravitationalWave{9.99e-4, 1.0, 0.0}.validate()));
}

TEST(Environment, GravityBound) {
  EXPECT_NO_THROW(Environment{-100.0}.validate());
  EXPECT_THROW(Environment{100.5}.validate(), ValidationError);
}

TEST(DetectorGeometry, Invariants) {
  DetectorGeometry g;
  g.x1 = 0.0;
  g.x2 = g.L;
  EXPECT_NO_THROW(g.validate());
  g.x2 = g.x1;
  EXPECT_THROW(g.validate(), ValidationError);
  EXPECT_NO_THROW(g.validate(false));
  g.x2 = 2.0 * g.L;
  EXPECT_THROW(g.validate(false), ValidationError);
}

TEST(LightTravelTime, FlatSpace) {
  EXPECT_EQ(light_travel_time({0.0, 1.0, 0.0}, 0.0, 1e6, 3.0), 1e6 / c_light);
  EXPECT_NEAR(light_travel_time({0.0, 1.0, 0.0}, 0.0, 1e6, 3.0), 3.3356e-3, 1e-7);
  EXPECT_THROW(light_travel_time({0.0, 1.0, 0.0}, 5.0, 5.0, 0.0), ValidationError);
}

TEST(LightTravelTime, StaticStrainLimit) {
  // omega -> 0, phi0 = pi/2: strain ~ h over the flight.
  const double h = 1e-6;
  const double L = 1e6;
  const GravitationalWave gw{h, 1e-9, pi / 2};
  const double expected = L / c_light * (1.0 + h / 2.0);
  EXPECT_NEAR(light_travel_time(gw, 0.0, L, 0.0) / expected - 1.0, 0.0, 1e-9);
  // Exact sqrt(1+h) vs the first-order (1 + h/2): the difference is O(h^2).
  const double exact = L / c_light * std::sqrt(1.0 + h);
  EXPECT_NEAR(light_travel_time(gw, 0.0, L, 0.0) / exact - 1.0, 0.0, 1e-14);
}

TEST(LightTravelTime, MidpointStrainApproximation) {
  const double h = 1e-6;
  const double L = 1e5;
  const GravitationalWave gw{h, 1.0, 0.4};  // omega L / c ~ 3e-4
  for (double t : {0.0, 0.7, 2.1}) {
    const double approx = L / c_light * (1.0 + strain_at(gw, t) / 2.0);
    const double got = light_travel_time(gw, 0.0, L, t);
    EXPECT_LT(std::abs(got - approx), L / c_light * h * gw.omega * L / c_light);
  }
}

TEST(LightTravelTime, ReversibleAndPeriodic) {
  const GravitationalWave gw{1e-7, 2.0, 0.1};
  const double L = 1e5;
  const double period = two_pi / gw.omega;
  for (double t : {0.0, 0.5, 1.1}) {
    const double ab = light_travel_time(gw, 0.0, L, t);
    const double ba = light_travel_time(gw, L, 0.0, t);
    EXPECT_EQ(ab, ba);  // 1D propagation depends on |dx| only
    EXPECT_NEAR(light_travel_time(gw, 0.0, L, t + period), ab, 1e-18);
  }
}

TEST(LightTravelTime, FirstOrderLinearInStrain) {
  const double L = 1e5;
  const double flat = L / c_light;
  const double t = 0.3;
  double reference = 0.0;
  for (double h : {1e-9, 1e-8, 1e-7, 1e-6}) {
    const double slope = (light_travel_time({h, 1.0, 0.5}, 0.0, L, t) - flat) / h;
    if (reference == 0.0) reference = slope;
    EXPECT_NEAR(slope / reference, 1.0, 1e-3) << "h = " << h;
  }
}

TEST(LightTravelTime, LinearPropagationMatchesExactToSecondOrder) {
  const GravitationalWave gw{1e-6, 1.0, 0.2};
  const double exact = light_travel_time(gw, 0.0, 1e5, 0.0, Propagation::exact);
  const double linear = light_travel_time(gw, 0.0, 1e5, 0.0, Propagation::linear);
  EXPECT_LT(std::abs(exact - linear), 1e-5 * 1e-6 * 1e5 / c_light);
}

TEST(FrontLag, MatchesClosedFormAtFirstOrder) {
  const GravitationalWave gw{1e-12, 0.3, 0.9};
  const double q = front_lag(gw, 0.0, 40.0);
  const double q1 = front_lag_linear(gw, 0.0, 40.0);
  EXPECT_NEAR(q / q1, 1.0, 1e-10);
}

TEST(AtomWorldline, Kinematics) {
  static_assert(atom_worldline_position(0.0, 0.0, 0.0, 0.0, 10.0) == 0.0);
  EXPECT_DOUBLE_EQ(atom_worldline_position(0.0, 0.0, 1e-2, 0.0, 50.0), 0.5);
  EXPECT_DOUBLE_EQ(atom_worldline_position(0.0, 0.0, 0.0, 9.8, 1.0), 4.9);
  EXPECT_DOUBLE_EQ(atom_worldline_position(2.0, 1.0, 1.0, 2.0, 3.0), 3.0);
}

TEST(Platforms, NominalPositions) {
  const auto p = Platforms::nominal(1e6);
  EXPECT_EQ(p[LaserId::primary].position(4.0), 0.0);
  EXPECT_EQ(p[LaserId::secondary].position(4.0), 1e6);
  EXPECT_TRUE(p.primary.perturbation.is_static());
}

TEST(PlatformTrajectory, PiecewiseConstantAcceleration) {
  const PlatformTrajectory tr({0.0, 1.0, 3.0}, {2.0, -1.0});
  EXPECT_EQ(tr.offset(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(tr.offset(1.0), 1.0);                        // a t^2 / 2
  EXPECT_DOUBLE_EQ(tr.offset(2.0), 1.0 + 2.0 * 1.0 - 0.5);      // continues with v = 2, a = -1
  EXPECT_DOUBLE_EQ(tr.offset(4.0), 3.0);                        // at rest after the last knot
  EXPECT_THROW(PlatformTrajectory({1.0, 0.0}, {1.0}), ValidationError);
  EXPECT_THROW(PlatformTrajectory({0.0, 1.0}, {1.0, 2.0}), ValidationError);
}
