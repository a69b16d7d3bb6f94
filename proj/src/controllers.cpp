#include "fieldgen/controllers.hpp"

#include "fieldgen/environment.hpp"

namespace fieldgen {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::Standard ? "standard" : "impedance";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "standard") return ModelKind::Standard;
  if (s == "impedance") return ModelKind::Impedance;
  throw SchemaError("unknown model kind '" + s + "'");
}

void RepresentationParams::validate() const {
  if (!(sigma_deg > 0.0))
    throw std::invalid_argument("RepresentationParams: sigma must be > 0");
  if (model == ModelKind::Impedance && mu_deg != 0.0)
    throw std::invalid_argument(
        "RepresentationParams: the impedance representation is centered on "
        "the training direction (mu must be 0)");
  if (!std::isfinite(amplitude) || !std::isfinite(mu_deg) ||
      !std::isfinite(theta_train_deg))
    throw std::invalid_argument("RepresentationParams: parameters must be finite");
}

double RepresentationParams::tuning(double theta_deg) const {
  const double delta = wrap_deg(theta_deg - theta_train_deg - mu_deg);
  return amplitude * std::exp(-delta * delta / (2.0 * sigma_deg * sigma_deg));
}

void ImpedanceScaling::validate() const {
  if (alpha_k < 0.0 || alpha_b < 0.0)
    throw std::invalid_argument("ImpedanceScaling: scale factors must be >= 0");
}

Mat2 nominal_stiffness() {
  Mat2 K;
  K << 32.0, 16.0, 16.0, 21.0;
  return K;
}

Mat2 nominal_damping() {
  Mat2 B;
  B << 5.0, 3.0, 3.0, 4.0;
  return B;
}

Mat2 ImpedanceScaling::stiffness() const { return alpha_k * nominal_stiffness(); }
Mat2 ImpedanceScaling::damping() const { return alpha_b * nominal_damping(); }

double representation_strength(const RepresentationParams& rep,
                               double theta_deg, double alpha_true) {
  return rep.tuning(theta_deg) * alpha_true;
}

ArmMatrices ArmMatrices::at(const ArmParams& arm, const JointState& state) {
  return ArmMatrices{inertia_matrix(arm, state.q),
                     coriolis_matrix(arm, state.q, state.qd),
                     fieldgen::jacobian(arm, state.q)};
}

Vec2 feedforward_torque(const ArmMatrices& m,
                        const DesiredTrajectory::Sample& des,
                        const Vec2& hand_velocity, double alpha_hat) {
  const Vec2 field_estimate = curl_force(alpha_hat, hand_velocity);
  return m.I * des.qdd + m.C * des.qd - m.J.transpose() * field_estimate;
}

Vec2 feedforward_torque(const ArmParams& arm,
                        const DesiredTrajectory::Sample& des,
                        const JointState& state, const Vec2& hand_velocity,
                        double alpha_hat) {
  return feedforward_torque(ArmMatrices::at(arm, state), des, hand_velocity,
                            alpha_hat);
}

Vec2 feedback_torque(const JointState& state,
                     const DesiredTrajectory::Sample& des,
                     const ImpedanceScaling& scaling) {
  const Vec2 eq = state.q - des.q;
  const Vec2 eqd = state.qd - des.qd;
  return -(scaling.stiffness() * eq + scaling.damping() * eqd);
}

StandardController::StandardController(
    ArmParams arm, std::shared_ptr<const DesiredTrajectory> plan,
    double alpha_hat)
    : arm_(std::move(arm)), plan_(std::move(plan)), alpha_hat_(alpha_hat) {
  if (!plan_) throw std::invalid_argument("StandardController: null plan");
}

Vec2 StandardController::torque(double t, const JointState& state,
                                const HandState& hand,
                                const ArmMatrices& m) const {
  (void)state;
  return feedforward_torque(m, plan_->at(t), hand.v, alpha_hat_);
}

ImpedanceController::ImpedanceController(
    ArmParams arm, std::shared_ptr<const DesiredTrajectory> transport,
    std::shared_ptr<const DesiredTrajectory> baseline, double alpha_hat,
    ImpedanceScaling scaling)
    : arm_(std::move(arm)),
      transport_(std::move(transport)),
      baseline_(std::move(baseline)),
      alpha_hat_(alpha_hat),
      scaling_(scaling) {
  if (!transport_) throw std::invalid_argument("ImpedanceController: null plan");
  if (!baseline_)
    throw MissingBaselineError("ImpedanceController: no baseline trajectory");
}

Vec2 ImpedanceController::torque(double t, const JointState& state,
                                 const HandState& hand,
                                 const ArmMatrices& m) const {
  return feedforward_torque(m, transport_->at(t), hand.v, alpha_hat_) +
         feedback_torque(state, baseline_->at(t), scaling_);
}

}  // namespace fieldgen
