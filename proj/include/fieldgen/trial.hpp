#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fieldgen/controllers.hpp"
#include "fieldgen/environment.hpp"

namespace fieldgen {

enum class TrialKind {
  BaselineNull,
  BaselineClamp,
  AdaptField,
  AdaptClamp,
  TestClamp,
  TrainField,
  TrainClamp,
};

std::string to_string(TrialKind kind);
TrialKind trial_kind_from_string(const std::string& s);

/// True if the trial renders the error-clamp channel.
bool is_clamp(TrialKind kind);

enum class Phase { Baseline, Adaptation, Test };

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& s);

/// Analysis phase a trial kind belongs to. Train-target clamp trials in
/// the test block count as test-phase measurements (they provide the
/// zero-offset entry of the generalization curves).
Phase phase_of(TrialKind kind);

/// Controller selection plus its parameters for one trial.
struct ControllerSpec {
  ModelKind kind = ModelKind::Standard;
  RepresentationParams rep;
  ImpedanceScaling scaling;  // impedance model only
};

/// Complete description of one simulated trial.
struct TrialSpec {
  double direction_deg = 0.0;
  FieldSpec field;
  ControllerSpec controller;
  TrialKind kind = TrialKind::BaselineNull;
  bool feedback = true;       // visual feedback flag; logged, not simulated
  double duration_s = 0.5;    // total simulated time
  double step_s = 5e-4;       // integrator step (2 kHz control rate)
  double log_rate_hz = 1000;  // storage rate
  int trial_index = -1;       // position in the protocol, -1 if standalone
  int block = 0;

  void validate(double plan_duration_s) const;
};

/// Logged time series of one simulated reach. f is the force the hand
/// applies to the environment (= -force on the hand), sample-wise.
struct TrialRecord {
  std::vector<double> t;
  std::vector<Vec2> p;   // hand position (m)
  std::vector<Vec2> v;   // hand velocity (m/s)
  std::vector<Vec2> f;   // applied handle force (N)
  std::vector<Vec2> q;   // joint angles (rad)
  std::vector<Vec2> qd;  // joint velocities (rad/s)
  TrialSpec spec;        // condition echo

  std::size_t size() const { return t.size(); }
  double sample_rate_hz() const { return spec.log_rate_hz; }
};

/// Per-direction baseline plans (the impedance model's desired
/// movements), with a memoized sampling per integrator grid so repeated
/// simulations do not re-run inverse kinematics.
class BaselineSet {
 public:
  void set(double direction_deg, std::shared_ptr<const CartesianPlan> plan);
  bool has(double direction_deg) const;

  /// Sampled joint-space image for this direction; throws
  /// MissingBaselineError when the direction has no baseline.
  std::shared_ptr<const DesiredTrajectory> sampled(double direction_deg,
                                                   const ArmParams& arm,
                                                   double t_end,
                                                   double dt) const;

  std::vector<double> directions() const;

 private:
  static int key(double direction_deg);
  mutable std::mutex mutex_;
  std::map<int, std::shared_ptr<const CartesianPlan>> plans_;
  mutable std::map<std::tuple<int, long long, long long>,
                   std::shared_ptr<const DesiredTrajectory>>
      cache_;
};

/// Shared context for simulating trials: the arm (base already solved),
/// workspace geometry, the trained field gain, the channel rendered in
/// clamp trials, and optional baselines. Treat as immutable once trials
/// have been simulated (plan samplings are memoized internally).
struct SimSetup {
  ArmParams arm;
  Vec2 home = Vec2::Zero();
  double reach_distance = 0.10;  // m, home -> target
  double plan_duration = 0.375;  // s, desired-trajectory duration
  double alpha_true = 15.0;      // N s/m, gain the representation scales
  ChannelGeometry channel;       // template; origin/target set per trial
  std::shared_ptr<BaselineSet> baselines;  // impedance model only

  // memoized straight minimum-jerk plans, keyed by direction
  std::shared_ptr<BaselineSet> straight_plans = std::make_shared<BaselineSet>();

  Vec2 target(double direction_deg) const {
    return home + reach_distance * unit_from_deg(direction_deg);
  }
};

/// Default SimSetup: paper arm parameters with the shoulder solved so
/// the (45, 90) deg posture puts the hand at the origin.
SimSetup default_setup();

/// Make `spec.field`'s channel run from home to the trial target.
void align_channel(TrialSpec& spec, const SimSetup& setup);

/// Fixed-step RK4 simulation of arm + controller + environment from
/// rest at the home posture. Throws IntegrationDivergedError if a joint
/// speed exceeds 50 rad/s (a sign/gain mistake, not physiology).
TrialRecord simulate_trial(const TrialSpec& spec, const SimSetup& setup);

/// Step-halving convergence report for one trial spec.
struct ConvergenceReport {
  double max_position_discrepancy_m = 0.0;
  double max_force_discrepancy_n = 0.0;
};

ConvergenceReport halve_step_check(const TrialSpec& spec, const SimSetup& setup);

}  // namespace fieldgen
