#include "fieldgen/trial.hpp"

#include <cmath>

namespace fieldgen {

std::string to_string(TrialKind kind) {
  switch (kind) {
    case TrialKind::BaselineNull: return "baseline-null";
    case TrialKind::BaselineClamp: return "baseline-clamp";
    case TrialKind::AdaptField: return "adapt-field";
    case TrialKind::AdaptClamp: return "adapt-clamp";
    case TrialKind::TestClamp: return "test-clamp";
    case TrialKind::TrainField: return "train-field";
    case TrialKind::TrainClamp: return "train-clamp";
  }
  return "baseline-null";
}

TrialKind trial_kind_from_string(const std::string& s) {
  if (s == "baseline-null") return TrialKind::BaselineNull;
  if (s == "baseline-clamp") return TrialKind::BaselineClamp;
  if (s == "adapt-field") return TrialKind::AdaptField;
  if (s == "adapt-clamp") return TrialKind::AdaptClamp;
  if (s == "test-clamp") return TrialKind::TestClamp;
  if (s == "train-field") return TrialKind::TrainField;
  if (s == "train-clamp") return TrialKind::TrainClamp;
  throw SchemaError("unknown trial kind '" + s + "'");
}

bool is_clamp(TrialKind kind) {
  return kind == TrialKind::BaselineClamp || kind == TrialKind::AdaptClamp ||
         kind == TrialKind::TestClamp || kind == TrialKind::TrainClamp;
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Baseline: return "baseline";
    case Phase::Adaptation: return "adaptation";
    case Phase::Test: return "test";
  }
  return "baseline";
}

Phase phase_from_string(const std::string& s) {
  if (s == "baseline") return Phase::Baseline;
  if (s == "adaptation") return Phase::Adaptation;
  if (s == "test") return Phase::Test;
  throw SchemaError("unknown phase '" + s + "'");
}

Phase phase_of(TrialKind kind) {
  switch (kind) {
    case TrialKind::BaselineNull:
    case TrialKind::BaselineClamp:
      return Phase::Baseline;
    case TrialKind::AdaptField:
    case TrialKind::AdaptClamp:
    case TrialKind::TrainField:
      return Phase::Adaptation;
    case TrialKind::TestClamp:
    case TrialKind::TrainClamp:
      return Phase::Test;
  }
  return Phase::Baseline;
}

void TrialSpec::validate(double plan_duration_s) const {
  field.validate();
  controller.rep.validate();
  controller.scaling.validate();
  if (!(step_s > 0.0)) throw std::invalid_argument("TrialSpec: step must be > 0");
  if (!(duration_s >= plan_duration_s))
    throw std::invalid_argument("TrialSpec: duration shorter than the desired trajectory");
  if (!(log_rate_hz > 0.0) || log_rate_hz > 1.0 / step_s + 1e-9)
    throw std::invalid_argument("TrialSpec: log rate must be in (0, 1/step]");
}

void BaselineSet::set(double direction_deg,
                      std::shared_ptr<const CartesianPlan> plan) {
  std::lock_guard lock(mutex_);
  plans_[key(direction_deg)] = std::move(plan);
  cache_.clear();
}

bool BaselineSet::has(double direction_deg) const {
  std::lock_guard lock(mutex_);
  return plans_.count(key(direction_deg)) > 0;
}

std::vector<double> BaselineSet::directions() const {
  std::lock_guard lock(mutex_);
  std::vector<double> out;
  out.reserve(plans_.size());
  for (const auto& [k, _] : plans_) out.push_back(k / 100.0);
  return out;
}

int BaselineSet::key(double direction_deg) {
  return static_cast<int>(std::llround(wrap_deg(direction_deg) * 100.0));
}

std::shared_ptr<const DesiredTrajectory> BaselineSet::sampled(
    double direction_deg, const ArmParams& arm, double t_end, double dt) const {
  std::lock_guard lock(mutex_);
  const auto it = plans_.find(key(direction_deg));
  if (it == plans_.end())
    throw MissingBaselineError("no baseline trajectory for direction " +
                               std::to_string(direction_deg) + " deg");
  const auto cache_key = std::make_tuple(key(direction_deg),
                                         std::llround(t_end * 1e9),
                                         std::llround(dt * 1e9));
  auto cached = cache_.find(cache_key);
  if (cached == cache_.end()) {
    auto traj = std::make_shared<const DesiredTrajectory>(*it->second, arm, t_end, dt);
    cached = cache_.emplace(cache_key, std::move(traj)).first;
  }
  return cached->second;
}

SimSetup default_setup() {
  SimSetup setup;
  setup.arm.base = solve_base_for_home(setup.arm, setup.home,
                                       Vec2(deg2rad(45.0), deg2rad(90.0)));
  // Idealized stiff channel for simulations; the hardware values
  // (1 mm width, 5 kN/m, 5 N s/m) stay the ChannelGeometry defaults and
  // remain a config choice. See README on channel stiffness.
  setup.channel.k_wall = 100000.0;
  setup.channel.b_wall = 400.0;
  setup.channel.half_width = 1e-5;
  return setup;
}

void align_channel(TrialSpec& spec, const SimSetup& setup) {
  spec.field.channel = setup.channel;
  spec.field.channel.origin = setup.home;
  spec.field.channel.target = setup.target(spec.direction_deg);
}

namespace {

std::shared_ptr<const TorquePolicy> make_policy(const TrialSpec& spec,
                                                const SimSetup& setup,
                                                double dt_des) {
  const double alpha_hat = representation_strength(
      spec.controller.rep, spec.direction_deg, setup.alpha_true);
  if (!setup.straight_plans->has(spec.direction_deg)) {
    setup.straight_plans->set(
        spec.direction_deg,
        std::make_shared<MinJerkPlan>(setup.home, setup.target(spec.direction_deg),
                                      setup.plan_duration));
  }
  auto straight = setup.straight_plans->sampled(spec.direction_deg, setup.arm,
                                                spec.duration_s, dt_des);
  if (spec.controller.kind == ModelKind::Standard)
    return std::make_shared<StandardController>(setup.arm, std::move(straight),
                                                alpha_hat);
  if (!setup.baselines)
    throw MissingBaselineError("impedance controller requires baseline trajectories");
  auto baseline = setup.baselines->sampled(spec.direction_deg, setup.arm,
                                           spec.duration_s, dt_des);
  return std::make_shared<ImpedanceController>(setup.arm, std::move(straight),
                                               std::move(baseline), alpha_hat,
                                               spec.controller.scaling);
}

struct StageDerivative {
  Vec2 qd;
  Vec2 qdd;
};

StageDerivative derivative(const TrialSpec& spec, const SimSetup& setup,
                           const TorquePolicy& policy, double t, const Vec2& q,
                           const Vec2& qd) {
  JointState js;
  js.q = q;
  js.qd = qd;
  const ArmMatrices m = ArmMatrices::at(setup.arm, js);
  HandState hs;
  hs.p = forward_kinematics(setup.arm, q);
  hs.v = m.J * qd;
  const Vec2 tau = policy.torque(t, js, hs, m);
  const Vec2 f_env = environment_force(spec.field, hs.p, hs.v);
  const Vec2 rhs = tau + m.J.transpose() * f_env - m.C * qd;
  // closed-form SPD 2x2 solve
  const double a = m.I(0, 0), b = m.I(0, 1), d = m.I(1, 1);
  const double det = a * d - b * b;
  const Vec2 qdd((d * rhs[0] - b * rhs[1]) / det,
                 (a * rhs[1] - b * rhs[0]) / det);
  return {qd, qdd};
}

}  // namespace

TrialRecord simulate_trial(const TrialSpec& spec, const SimSetup& setup) {
  spec.validate(setup.plan_duration);
  const double h = spec.step_s;
  const auto policy = make_policy(spec, setup, h / 2.0);

  const long long n_steps = std::llround(spec.duration_s / h);
  const long long log_stride =
      std::max<long long>(1, std::llround(1.0 / (spec.log_rate_hz * h)));

  TrialRecord rec;
  rec.spec = spec;
  const std::size_t n_logs = static_cast<std::size_t>(n_steps / log_stride) + 1;
  rec.t.reserve(n_logs);
  rec.p.reserve(n_logs);
  rec.v.reserve(n_logs);
  rec.f.reserve(n_logs);
  rec.q.reserve(n_logs);
  rec.qd.reserve(n_logs);

  Vec2 q = inverse_kinematics(setup.arm, setup.home);
  Vec2 qd = Vec2::Zero();

  auto log_sample = [&](double t) {
    const Vec2 p = forward_kinematics(setup.arm, q);
    const Vec2 v = jacobian(setup.arm, q) * qd;
    rec.t.push_back(t);
    rec.p.push_back(p);
    rec.v.push_back(v);
    rec.f.push_back(-environment_force(spec.field, p, v));
    rec.q.push_back(q);
    rec.qd.push_back(qd);
  };

  log_sample(0.0);
  for (long long i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * h;
    const auto k1 = derivative(spec, setup, *policy, t, q, qd);
    const auto k2 = derivative(spec, setup, *policy, t + h / 2,
                               q + (h / 2) * k1.qd, qd + (h / 2) * k1.qdd);
    const auto k3 = derivative(spec, setup, *policy, t + h / 2,
                               q + (h / 2) * k2.qd, qd + (h / 2) * k2.qdd);
    const auto k4 = derivative(spec, setup, *policy, t + h, q + h * k3.qd,
                               qd + h * k3.qdd);
    q += (h / 6.0) * (k1.qd + 2.0 * k2.qd + 2.0 * k3.qd + k4.qd);
    qd += (h / 6.0) * (k1.qdd + 2.0 * k2.qdd + 2.0 * k3.qdd + k4.qdd);

    if (qd.cwiseAbs().maxCoeff() > 50.0)
      throw IntegrationDivergedError(
          "joint speed exceeded 50 rad/s at t=" + std::to_string(t + h) +
          " s in a " + to_string(spec.kind) + " trial");

    if ((i + 1) % log_stride == 0) log_sample(static_cast<double>(i + 1) * h);
  }
  return rec;
}

ConvergenceReport halve_step_check(const TrialSpec& spec, const SimSetup& setup) {
  TrialSpec half = spec;
  half.step_s = spec.step_s / 2.0;
  const TrialRecord coarse = simulate_trial(spec, setup);
  const TrialRecord fine = simulate_trial(half, setup);

  ConvergenceReport report;
  const std::size_t n = std::min(coarse.size(), fine.size());
  for (std::size_t i = 0; i < n; ++i) {
    report.max_position_discrepancy_m = std::max(
        report.max_position_discrepancy_m, (coarse.p[i] - fine.p[i]).norm());
    report.max_force_discrepancy_n = std::max(
        report.max_force_discrepancy_n, (coarse.f[i] - fine.f[i]).norm());
  }
  return report;
}

}  // namespace fieldgen
