#pragma once

#include "fieldgen/common.hpp"

namespace fieldgen {

/// Physical description of the planar two-link arm.
///
/// Masses, lengths, center-of-mass offsets and link inertias use the
/// average adult values reported in the reaching literature; inertias
/// default to uniform-rod approximations (m*l^2/12). The shoulder base
/// is normally solved from the home posture, see solve_base_for_home().
struct ArmParams {
  double m1 = 1.93;   // upper-arm mass (kg)
  double m2 = 1.52;   // forearm+hand mass (kg)
  double l1 = 0.33;   // upper-arm length (m)
  double l2 = 0.34;   // forearm length (m)
  double r1 = 0.165;  // shoulder -> upper-arm COM (m)
  double r2 = 0.19;   // elbow -> forearm COM (m)
  double i1 = 1.93 * 0.33 * 0.33 / 12.0;  // link inertias about COM (kg m^2)
  double i2 = 1.52 * 0.34 * 0.34 / 12.0;
  Vec2 base = Vec2::Zero();  // shoulder position in workspace coordinates (m)

  void validate() const;
};

/// Joint-space state. q = (shoulder, elbow), elbow angle relative to the
/// upper arm; the elbow stays in (0, pi) (single IK branch, no
/// hyperextension).
struct JointState {
  Vec2 q = Vec2::Zero();    // rad
  Vec2 qd = Vec2::Zero();   // rad/s
  Vec2 qdd = Vec2::Zero();  // rad/s^2
};

/// Cartesian state of the hand.
struct HandState {
  Vec2 p = Vec2::Zero();  // m
  Vec2 v = Vec2::Zero();  // m/s
  Vec2 a = Vec2::Zero();  // m/s^2
};

/// Hand position for joint angles q.
Vec2 forward_kinematics(const ArmParams& arm, const Vec2& q);

/// End-point Jacobian dp/dq (m/rad). Singular configurations are legal
/// output; callers decide how to handle det(J) ~ 0.
Mat2 jacobian(const ArmParams& arm, const Vec2& q);

/// Time derivative of the Jacobian along (q, qd).
Mat2 jacobian_dot(const ArmParams& arm, const Vec2& q, const Vec2& qd);

/// Joint angles reaching hand position p on the elbow-up branch
/// (q2 in (0, pi)). Throws UnreachableTargetError if |p - base| is not
/// strictly inside the reachable annulus.
Vec2 inverse_kinematics(const ArmParams& arm, const Vec2& p);

/// Inertia matrix I(q); symmetric positive definite, depends on the
/// elbow angle only.
Mat2 inertia_matrix(const ArmParams& arm, const Vec2& q);

/// Coriolis/centripetal matrix from Christoffel symbols, so that
/// dI/dt - 2C is skew-symmetric along any trajectory.
Mat2 coriolis_matrix(const ArmParams& arm, const Vec2& q, const Vec2& qd);

/// Joint accelerations from I(q) qdd + C(q,qd) qd = tau + J^T f_hand.
/// f_hand is the external force applied to the hand by the environment.
Vec2 forward_dynamics(const ArmParams& arm, const JointState& state,
                      const Vec2& tau, const Vec2& f_hand);

/// Kinetic energy 0.5 qd^T I(q) qd of the arm.
double kinetic_energy(const ArmParams& arm, const Vec2& q, const Vec2& qd);

/// Shoulder position such that the posture q_home places the hand at
/// `home`. The experiment fixes the posture (45 deg, 90 deg) at the
/// workspace center rather than the shoulder location.
Vec2 solve_base_for_home(const ArmParams& arm, const Vec2& home,
                         const Vec2& q_home_rad);

}  // namespace fieldgen
