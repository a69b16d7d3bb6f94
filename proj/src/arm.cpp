#include "fieldgen/arm.hpp"

#include <sstream>

namespace fieldgen {

void ArmParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("ArmParams: " + msg); };
  if (!(m1 > 0.0 && m2 > 0.0)) fail("link masses must be strictly positive");
  if (!(l1 > 0.0 && l2 > 0.0)) fail("link lengths must be strictly positive");
  if (!(r1 > 0.0 && r2 > 0.0)) fail("COM distances must be strictly positive");
  if (!(i1 > 0.0 && i2 > 0.0)) fail("link inertias must be strictly positive");
  if (r1 > l1 || r2 > l2) fail("COM distance exceeds link length");
  if (!base.allFinite()) fail("base must be finite");
}

Vec2 forward_kinematics(const ArmParams& arm, const Vec2& q) {
  const double c1 = std::cos(q[0]), s1 = std::sin(q[0]);
  const double c12 = std::cos(q[0] + q[1]), s12 = std::sin(q[0] + q[1]);
  return arm.base + Vec2(arm.l1 * c1 + arm.l2 * c12, arm.l1 * s1 + arm.l2 * s12);
}

Mat2 jacobian(const ArmParams& arm, const Vec2& q) {
  const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
  const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
  Mat2 J;
  J << -arm.l1 * s1 - arm.l2 * s12, -arm.l2 * s12,
       arm.l1 * c1 + arm.l2 * c12, arm.l2 * c12;
  return J;
}

Mat2 jacobian_dot(const ArmParams& arm, const Vec2& q, const Vec2& qd) {
  const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
  const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
  const double w1 = qd[0], w12 = qd[0] + qd[1];
  Mat2 Jd;
  Jd << -arm.l1 * c1 * w1 - arm.l2 * c12 * w12, -arm.l2 * c12 * w12,
        -arm.l1 * s1 * w1 - arm.l2 * s12 * w12, -arm.l2 * s12 * w12;
  return Jd;
}

Vec2 inverse_kinematics(const ArmParams& arm, const Vec2& p) {
  const Vec2 r = p - arm.base;
  const double d = r.norm();
  const double dmin = std::abs(arm.l1 - arm.l2);
  const double dmax = arm.l1 + arm.l2;
  if (!(d > dmin && d < dmax)) {
    std::ostringstream oss;
    oss << "inverse_kinematics: target (" << p.x() << ", " << p.y()
        << ") at distance " << d << " m from shoulder lies outside the reachable annulus ("
        << dmin << ", " << dmax << ")";
    throw UnreachableTargetError(oss.str());
  }
  double c2 = (d * d - arm.l1 * arm.l1 - arm.l2 * arm.l2) / (2.0 * arm.l1 * arm.l2);
  c2 = std::clamp(c2, -1.0, 1.0);
  const double q2 = std::acos(c2);  // elbow branch: q2 in (0, pi)
  const double q1 = std::atan2(r.y(), r.x()) -
                    std::atan2(arm.l2 * std::sin(q2), arm.l1 + arm.l2 * c2);
  return Vec2(q1, q2);
}

Mat2 inertia_matrix(const ArmParams& arm, const Vec2& q) {
  const double a = arm.i1 + arm.i2 + arm.m1 * arm.r1 * arm.r1 +
                   arm.m2 * (arm.l1 * arm.l1 + arm.r2 * arm.r2);
  const double b = arm.m2 * arm.l1 * arm.r2;
  const double d = arm.i2 + arm.m2 * arm.r2 * arm.r2;
  const double c2 = std::cos(q[1]);
  Mat2 I;
  I << a + 2.0 * b * c2, d + b * c2,
       d + b * c2, d;
  return I;
}

Mat2 coriolis_matrix(const ArmParams& arm, const Vec2& q, const Vec2& qd) {
  const double b = arm.m2 * arm.l1 * arm.r2;
  const double h = -b * std::sin(q[1]);
  Mat2 C;
  C << h * qd[1], h * (qd[0] + qd[1]),
       -h * qd[0], 0.0;
  return C;
}

Vec2 forward_dynamics(const ArmParams& arm, const JointState& state,
                      const Vec2& tau, const Vec2& f_hand) {
  const Mat2 I = inertia_matrix(arm, state.q);
  const Mat2 C = coriolis_matrix(arm, state.q, state.qd);
  const Mat2 J = jacobian(arm, state.q);
  const Vec2 rhs = tau + J.transpose() * f_hand - C * state.qd;
  return I.ldlt().solve(rhs);
}

double kinetic_energy(const ArmParams& arm, const Vec2& q, const Vec2& qd) {
  const Mat2 I = inertia_matrix(arm, q);
  return 0.5 * qd.dot(I * qd);
}

Vec2 solve_base_for_home(const ArmParams& arm, const Vec2& home,
                         const Vec2& q_home_rad) {
  ArmParams zero_base = arm;
  zero_base.base = Vec2::Zero();
  return home - forward_kinematics(zero_base, q_home_rad);
}

}  // namespace fieldgen
