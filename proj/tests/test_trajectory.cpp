#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fieldgen/trajectory.hpp"

using namespace fieldgen;

TEST_CASE("minimum jerk boundary conditions") {
  const Vec2 start(0.0, 0.0), goal(0.0, 0.1);
  const double T = 0.375;
  const auto at0 = min_jerk(start, goal, T, 0.0);
  CHECK((at0.p - start).norm() == 0.0);
  CHECK(at0.v.norm() == 0.0);
  CHECK(at0.a.norm() == 0.0);
  const auto atT = min_jerk(start, goal, T, T);
  CHECK((atT.p - goal).norm() == 0.0);
  CHECK(atT.v.norm() == 0.0);
  CHECK(atT.a.norm() == 0.0);
  // the profile holds its endpoints outside [0, T]
  CHECK((min_jerk(start, goal, T, -0.1).p - start).norm() == 0.0);
  CHECK((min_jerk(start, goal, T, T + 0.1).p - goal).norm() == 0.0);
}

TEST_CASE("minimum jerk midpoint speed is 15/8 D/T") {
  const double D = 0.10, T = 0.375;
  const auto mid = min_jerk(Vec2::Zero(), Vec2(D, 0.0), T, T / 2.0);
  CHECK(mid.v.norm() == doctest::Approx(15.0 / 8.0 * D / T).epsilon(1e-12));
  CHECK(mid.v.norm() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("minimum jerk derivatives match finite differences") {
  const Vec2 start(0.02, -0.01), goal(-0.06, 0.08);
  const double T = 0.4, h = 1e-6;
  for (double t : {0.05, 0.13, 0.2, 0.31, 0.39}) {
    const auto c = min_jerk(start, goal, T, t);
    const auto fwd = min_jerk(start, goal, T, t + h);
    const auto bwd = min_jerk(start, goal, T, t - h);
    CHECK(((fwd.p - bwd.p) / (2 * h) - c.v).norm() < 1e-6);
    CHECK(((fwd.v - bwd.v) / (2 * h) - c.a).norm() < 1e-5);
  }
}

TEST_CASE("bump plan peaks at the signed lateral offset") {
  const Vec2 start(0.0, 0.0), goal(0.1, 0.0);
  const double T = 0.375, pe = 0.008;
  BumpPlan plan(start, goal, T, pe);
  // lateral peak of +pe to the CCW-left at mid-progress
  const Vec2 n = rot90_ccw((goal - start).normalized());
  double max_lat = 0.0;
  for (double t = 0.0; t <= T; t += 1e-3)
    max_lat = std::max(max_lat, n.dot(plan.at(t).p - start));
  CHECK(max_lat == doctest::Approx(pe).epsilon(1e-6));
  CHECK((plan.at(0.0).p - start).norm() == 0.0);
  CHECK((plan.at(T).p - goal).norm() < 1e-12);

  // negative peak error bends the other way
  BumpPlan cw(start, goal, T, -pe);
  double min_lat = 0.0;
  for (double t = 0.0; t <= T; t += 1e-3)
    min_lat = std::min(min_lat, n.dot(cw.at(t).p - start));
  CHECK(min_lat == doctest::Approx(-pe).epsilon(1e-6));
}

TEST_CASE("bump plan derivatives match finite differences") {
  BumpPlan plan(Vec2(0, 0), Vec2(0.07, 0.07), 0.375, 0.01);
  const double h = 1e-6;
  for (double t : {0.04, 0.11, 0.19, 0.27, 0.36}) {
    const auto c = plan.at(t);
    const auto fwd = plan.at(t + h);
    const auto bwd = plan.at(t - h);
    CHECK(((fwd.p - bwd.p) / (2 * h) - c.v).norm() < 1e-6);
    CHECK(((fwd.v - bwd.v) / (2 * h) - c.a).norm() < 1e-4);
  }
}

TEST_CASE("desired trajectory keeps joint and Cartesian series consistent") {
  ArmParams arm;
  arm.base = solve_base_for_home(arm, Vec2::Zero(),
                                 Vec2(deg2rad(45), deg2rad(90)));
  const BumpPlan plan(Vec2::Zero(), Vec2(0.1 / std::sqrt(2.0), 0.1 / std::sqrt(2.0)),
                      0.375, 0.006);
  const DesiredTrajectory traj(plan, arm, 0.5, 2.5e-4);
  CHECK(traj.size() == 2001);
  for (std::size_t i = 0; i < traj.size(); i += 37) {
    const auto& s = traj[i];
    CHECK((forward_kinematics(arm, s.q) - s.p).norm() < 1e-8);
    CHECK((jacobian(arm, s.q) * s.qd - s.v).norm() < 1e-8);
    const Mat2 J = jacobian(arm, s.q);
    const Mat2 Jd = jacobian_dot(arm, s.q, s.qd);
    CHECK((J * s.qdd + Jd * s.qd - s.a).norm() < 1e-8);
  }
  // at() snaps to the sampled grid
  CHECK(&traj.at(10.0 * 2.5e-4) == &traj[10]);
  CHECK(&traj.at(-1.0) == &traj[0]);
  CHECK(&traj.at(9.9) == &traj[traj.size() - 1]);
}

TEST_CASE("sampled plan reproduces smooth trajectories") {
  // sample a bump plan at 1 kHz, rebuild through the Hermite
  // interpolant, compare off-grid
  BumpPlan plan(Vec2(0, 0), Vec2(0.1, 0), 0.375, 0.004);
  std::vector<double> t;
  std::vector<Vec2> p, v, a;
  for (int i = 0; i <= 500; ++i) {
    const double ti = i * 1e-3;
    const auto pt = plan.at(ti);
    t.push_back(ti);
    p.push_back(pt.p);
    v.push_back(pt.v);
    a.push_back(pt.a);
  }
  SampledPlan sampled(t, p, v, a);
  for (double ti = 0.0004; ti < 0.49; ti += 0.0173) {
    const auto exact = plan.at(ti);
    const auto interp = sampled.at(ti);
    CHECK((interp.p - exact.p).norm() < 1e-8);
    CHECK((interp.v - exact.v).norm() < 1e-5);
  }
}

TEST_CASE("degenerate plans are rejected") {
  CHECK_THROWS_AS(BumpPlan(Vec2::Zero(), Vec2::Zero(), 0.375, 0.004),
                  std::invalid_argument);
  CHECK_THROWS_AS(MinJerkPlan(Vec2::Zero(), Vec2(0.1, 0), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(min_jerk(Vec2::Zero(), Vec2(0.1, 0), -1.0, 0.0),
                  std::invalid_argument);
}
