#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fieldgen/arm.hpp"

using namespace fieldgen;

namespace {

ArmParams test_arm() {
  ArmParams arm;
  arm.base = solve_base_for_home(arm, Vec2::Zero(),
                                 Vec2(deg2rad(45.0), deg2rad(90.0)));
  return arm;
}

// Link-wise kinetic energy, independent of the inertia-matrix route:
// translational energy of each link COM plus rotational energy about it.
double energy_oracle(const ArmParams& arm, const Vec2& q, const Vec2& qd) {
  const double w1 = qd[0], w12 = qd[0] + qd[1];
  const Vec2 v_com1 =
      arm.r1 * w1 * Vec2(-std::sin(q[0]), std::cos(q[0]));
  const Vec2 v_elbow =
      arm.l1 * w1 * Vec2(-std::sin(q[0]), std::cos(q[0]));
  const Vec2 v_com2 =
      v_elbow + arm.r2 * w12 * Vec2(-std::sin(q[0] + q[1]), std::cos(q[0] + q[1]));
  return 0.5 * arm.m1 * v_com1.squaredNorm() + 0.5 * arm.i1 * w1 * w1 +
         0.5 * arm.m2 * v_com2.squaredNorm() + 0.5 * arm.i2 * w12 * w12;
}

}  // namespace

TEST_CASE("forward kinematics of stretched and rotated arm") {
  ArmParams arm;  // base at origin
  CHECK((forward_kinematics(arm, Vec2(0, 0)) - Vec2(0.67, 0)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK((forward_kinematics(arm, Vec2(deg2rad(90), 0)) - Vec2(0, 0.67)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("home posture lands on the workspace center") {
  const ArmParams arm = test_arm();
  const Vec2 p = forward_kinematics(arm, Vec2(deg2rad(45), deg2rad(90)));
  CHECK(p.norm() < 1e-12);
}

TEST_CASE("jacobian at the right-angle posture") {
  ArmParams arm;
  const Mat2 J = jacobian(arm, Vec2(0, deg2rad(90)));
  CHECK(J(0, 0) == doctest::Approx(-arm.l2));
  CHECK(J(0, 1) == doctest::Approx(-arm.l2));
  CHECK(J(1, 0) == doctest::Approx(arm.l1));
  CHECK(J(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("jacobian matches central differences of forward kinematics") {
  const ArmParams arm = test_arm();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> elbow(deg2rad(10), deg2rad(170));
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 q(angle(rng), elbow(rng));
    const Mat2 J = jacobian(arm, q);
    for (int col = 0; col < 2; ++col) {
      Vec2 dq = Vec2::Zero();
      dq[col] = h;
      const Vec2 fd =
          (forward_kinematics(arm, q + dq) - forward_kinematics(arm, q - dq)) /
          (2 * h);
      CHECK((J.col(col) - fd).norm() <= 1e-6 * std::max(1.0, J.col(col).norm()));
    }
  }
}

TEST_CASE("fully extended arm is singular") {
  ArmParams arm;
  CHECK(jacobian(arm, Vec2(0, 0)).determinant() == doctest::Approx(0.0));
}

TEST_CASE("inverse kinematics round trip on a workspace grid") {
  const ArmParams arm = test_arm();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> elbow(deg2rad(5), deg2rad(175));
  for (int i = 0; i < 100; ++i) {
    const Vec2 q_true(angle(rng), elbow(rng));
    const Vec2 p = forward_kinematics(arm, q_true);
    const Vec2 q = inverse_kinematics(arm, p);
    CHECK(q[1] > 0.0);
    CHECK(q[1] < kPi);
    CHECK((forward_kinematics(arm, q) - p).norm() < 1e-10);
    CHECK(std::abs(wrap_deg(rad2deg(q[0] - q_true[0]))) < 1e-7);
    CHECK(std::abs(q[1] - q_true[1]) < 1e-9);
  }
}

TEST_CASE("inverse kinematics of the home point is the standard posture") {
  const ArmParams arm = test_arm();
  const Vec2 q = inverse_kinematics(arm, Vec2::Zero());
  CHECK(rad2deg(q[0]) == doctest::Approx(45.0).epsilon(1e-9));
  CHECK(rad2deg(q[1]) == doctest::Approx(90.0).epsilon(1e-9));
}

TEST_CASE("unreachable targets are rejected") {
  const ArmParams arm = test_arm();
  const Vec2 outside = arm.base + Vec2(arm.l1 + arm.l2 + 0.01, 0.0);
  CHECK_THROWS_AS((void)inverse_kinematics(arm, outside), UnreachableTargetError);
  CHECK_THROWS_AS((void)inverse_kinematics(arm, arm.base), UnreachableTargetError);
}

TEST_CASE("inertia matrix is symmetric positive definite") {
  const ArmParams arm = test_arm();
  for (double q2_deg = 10.0; q2_deg <= 170.0; q2_deg += 5.0) {
    const Vec2 q(0.3, deg2rad(q2_deg));
    const Mat2 I = inertia_matrix(arm, q);
    CHECK(I(0, 1) == I(1, 0));
    const Eigen::SelfAdjointEigenSolver<Mat2> eig(I);
    CHECK(eig.eigenvalues().minCoeff() > 1e-4);
    // planar arm inertia depends only on the elbow angle
    const Mat2 I2 = inertia_matrix(arm, Vec2(-1.1, deg2rad(q2_deg)));
    CHECK((I - I2).norm() == 0.0);
  }
}

TEST_CASE("kinetic energy matches the link-wise oracle") {
  const ArmParams arm = test_arm();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> speed(-6.0, 6.0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 q(angle(rng), angle(rng));
    const Vec2 qd(speed(rng), speed(rng));
    CHECK(kinetic_energy(arm, q, qd) ==
          doctest::Approx(energy_oracle(arm, q, qd)).epsilon(1e-9));
  }
}

TEST_CASE("coriolis matrix vanishes at rest and keeps dI/dt - 2C skew") {
  const ArmParams arm = test_arm();
  CHECK((coriolis_matrix(arm, Vec2(0.4, 1.0), Vec2::Zero()) * Vec2::Zero()).norm() ==
        0.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> speed(-8.0, 8.0);
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 q(angle(rng), angle(rng));
    const Vec2 qd(speed(rng), speed(rng));
    // dI/dt along the trajectory by central differences
    const Mat2 dIdt = (inertia_matrix(arm, q + h * qd) -
                       inertia_matrix(arm, q - h * qd)) /
                      (2 * h);
    const Mat2 N = dIdt - 2.0 * coriolis_matrix(arm, q, qd);
    CHECK(std::abs(qd.dot(N * qd)) < 1e-9 * std::max(1.0, qd.squaredNorm()));
  }
}

TEST_CASE("forward dynamics identities") {
  const ArmParams arm = test_arm();
  JointState state;
  state.q = Vec2(0.7, 1.3);
  state.qd = Vec2(1.5, -2.0);

  SUBCASE("exact Coriolis compensation gives zero acceleration") {
    const Vec2 tau = coriolis_matrix(arm, state.q, state.qd) * state.qd;
    CHECK(forward_dynamics(arm, state, tau, Vec2::Zero()).norm() < 1e-12);
  }
  SUBCASE("static force map") {
    state.qd = Vec2::Zero();
    const Vec2 f(1.0, 0.0);
    const Vec2 qdd = forward_dynamics(arm, state, Vec2::Zero(), f);
    const Vec2 expected = inertia_matrix(arm, state.q).inverse() *
                          jacobian(arm, state.q).transpose() * f;
    CHECK((qdd - expected).norm() < 1e-12);
  }
}

TEST_CASE("unforced ballistic motion conserves kinetic energy") {
  const ArmParams arm = test_arm();
  // local RK4 over the unforced dynamics; gravity-free planar model
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> elbow(deg2rad(40), deg2rad(140));
  std::uniform_real_distribution<double> speed(-3.0, 3.0);
  struct State {
    Vec2 q, qd;
  };
  auto f = [&](const State& s) {
    JointState js;
    js.q = s.q;
    js.qd = s.qd;
    return State{s.qd, forward_dynamics(arm, js, Vec2::Zero(), Vec2::Zero())};
  };
  for (int trial = 0; trial < 5; ++trial) {
    State s{Vec2(0.5, elbow(rng)), Vec2(speed(rng), speed(rng))};
    const double e0 = kinetic_energy(arm, s.q, s.qd);
    const double dt = 1e-4;
    for (int i = 0; i < 5000; ++i) {
      const State k1 = f(s);
      const State k2 = f({s.q + dt / 2 * k1.q, s.qd + dt / 2 * k1.qd});
      const State k3 = f({s.q + dt / 2 * k2.q, s.qd + dt / 2 * k2.qd});
      const State k4 = f({s.q + dt * k3.q, s.qd + dt * k3.qd});
      s.q += dt / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
      s.qd += dt / 6 * (k1.qd + 2 * k2.qd + 2 * k3.qd + k4.qd);
    }
    CHECK(std::abs(kinetic_energy(arm, s.q, s.qd) - e0) <= 1e-6 * e0);
  }
}

TEST_CASE("parameter validation") {
  ArmParams arm;
  arm.m1 = 0.0;
  CHECK_THROWS_AS(arm.validate(), std::invalid_argument);
  arm = ArmParams{};
  arm.r1 = arm.l1 + 0.01;
  CHECK_THROWS_AS(arm.validate(), std::invalid_argument);
  CHECK_NOTHROW(ArmParams{}.validate());
}
