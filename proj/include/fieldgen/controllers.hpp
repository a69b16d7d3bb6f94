#pragma once

#include <memory>
#include <optional>
#include <string>

#include "fieldgen/trajectory.hpp"

namespace fieldgen {

enum class ModelKind { Standard, Impedance };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Learned representation of the force field: a Gaussian-like tuning of
/// estimated field strength over reach direction. The standard model
/// allows an offset mu relative to the training direction; the impedance
/// model is centered on it (mu fixed at zero).
struct RepresentationParams {
  ModelKind model = ModelKind::Standard;
  double amplitude = 1.0;     // A, fraction of the true field gain
  double sigma_deg = 30.0;    // tuning width (deg)
  double mu_deg = 0.0;        // center offset (deg); standard model only
  double theta_train_deg = 0.0;

  void validate() const;

  /// Dimensionless tuning A*exp(-delta^2 / 2 sigma^2) at reach direction
  /// theta; delta is wrapped to (-180, 180] before the exponent.
  double tuning(double theta_deg) const;
};

/// Scale factors applied to the nominal joint stiffness and damping.
struct ImpedanceScaling {
  double alpha_k = 1.0;
  double alpha_b = 1.0;

  void validate() const;

  Mat2 stiffness() const;  // alpha_k * K_nominal (N m / rad)
  Mat2 damping() const;    // alpha_b * B_nominal (N m s / rad)
};

/// Nominal joint stiffness [32 16; 16 21] N m/rad.
Mat2 nominal_stiffness();
/// Nominal joint damping [5 3; 3 4] N m s/rad.
Mat2 nominal_damping();

/// Estimated field gain (N s/m) at reach direction theta.
double representation_strength(const RepresentationParams& rep,
                               double theta_deg, double alpha_true);

/// Arm matrices at one state, shared between controller and dynamics
/// evaluations inside the integrator hot loop.
struct ArmMatrices {
  Mat2 I;  // inertia
  Mat2 C;  // Coriolis/centripetal
  Mat2 J;  // end-point Jacobian

  static ArmMatrices at(const ArmParams& arm, const JointState& state);
};

/// Feed-forward torque: inverse dynamics of the desired state plus the
/// compensation for the estimated field, evaluated at the actual state.
/// The compensation enters as J^T * (-alpha_hat * [0 1; -1 0] * v) so
/// the limb opposes the estimated field at the actual hand velocity v.
Vec2 feedforward_torque(const ArmParams& arm,
                        const DesiredTrajectory::Sample& des,
                        const JointState& state, const Vec2& hand_velocity,
                        double alpha_hat);

/// Same, with the arm matrices already evaluated at the actual state.
Vec2 feedforward_torque(const ArmMatrices& m,
                        const DesiredTrajectory::Sample& des,
                        const Vec2& hand_velocity, double alpha_hat);

/// Feedback torque restoring the limb toward the desired trajectory:
/// -(K (q - q_des) + B (qd - qd_des)) with K, B the scaled nominals.
Vec2 feedback_torque(const JointState& state,
                     const DesiredTrajectory::Sample& des,
                     const ImpedanceScaling& scaling);

/// Self-generated torque policy for one trial. Policies are immutable
/// and safe to evaluate concurrently.
class TorquePolicy {
 public:
  virtual ~TorquePolicy() = default;
  /// m must hold the arm matrices evaluated at `state`.
  virtual Vec2 torque(double t, const JointState& state, const HandState& hand,
                      const ArmMatrices& m) const = 0;
  virtual const DesiredTrajectory& desired() const = 0;
};

/// Standard-model controller: feed-forward only, straight minimum-jerk
/// desired trajectory. Feedback terms would not influence a straight
/// plan inside the channel and are not included.
class StandardController final : public TorquePolicy {
 public:
  StandardController(ArmParams arm, std::shared_ptr<const DesiredTrajectory> plan,
                     double alpha_hat);
  Vec2 torque(double t, const JointState& state, const HandState& hand,
              const ArmMatrices& m) const override;
  const DesiredTrajectory& desired() const override { return *plan_; }

 private:
  ArmParams arm_;
  std::shared_ptr<const DesiredTrajectory> plan_;
  double alpha_hat_;
};

/// Impedance-model controller: feed-forward plus impedance feedback.
/// The feed-forward inverse dynamics transport the limb along the
/// straight reach; the (possibly curved) baseline movement is the
/// equilibrium trajectory of the feedback term, so plan curvature
/// loads the channel walls only through the limb's impedance.
class ImpedanceController final : public TorquePolicy {
 public:
  ImpedanceController(ArmParams arm,
                      std::shared_ptr<const DesiredTrajectory> transport,
                      std::shared_ptr<const DesiredTrajectory> baseline,
                      double alpha_hat, ImpedanceScaling scaling);
  Vec2 torque(double t, const JointState& state, const HandState& hand,
              const ArmMatrices& m) const override;
  const DesiredTrajectory& desired() const override { return *baseline_; }

 private:
  ArmParams arm_;
  std::shared_ptr<const DesiredTrajectory> transport_;
  std::shared_ptr<const DesiredTrajectory> baseline_;
  double alpha_hat_;
  ImpedanceScaling scaling_;
};

}  // namespace fieldgen
