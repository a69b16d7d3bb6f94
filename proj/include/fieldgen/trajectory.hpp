#pragma once

#include <memory>
#include <vector>

#include "fieldgen/arm.hpp"

namespace fieldgen {

/// Desired Cartesian state at one instant.
struct PlanPoint {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  Vec2 a = Vec2::Zero();
};

/// Minimum-jerk progress profile: s(0)=0, s(T)=1 with zero boundary
/// velocity and acceleration. Returns (s, sdot, sddot); clamps outside
/// [0, T] to the resting endpoints.
struct MinJerkProfile {
  double duration = 0.375;  // s

  double s(double t) const;
  double sdot(double t) const;
  double sddot(double t) const;
};

/// Straight-line minimum-jerk reach from start to goal over T seconds.
/// Holds the endpoints with zero velocity/acceleration outside [0, T].
PlanPoint min_jerk(const Vec2& start, const Vec2& goal, double T, double t);

/// Continuous source of desired hand states.
class CartesianPlan {
 public:
  virtual ~CartesianPlan() = default;
  virtual PlanPoint at(double t) const = 0;
  virtual double duration() const = 0;
};

/// Straight minimum-jerk plan.
class MinJerkPlan final : public CartesianPlan {
 public:
  MinJerkPlan(const Vec2& start, const Vec2& goal, double T);
  PlanPoint at(double t) const override;
  double duration() const override { return profile_.duration; }

 private:
  Vec2 start_, goal_;
  MinJerkProfile profile_;
};

/// Minimum-jerk plan with a lateral half-sine bump: the desired path
/// deviates by peak_error * sin(pi * s) to the CCW-left of the straight
/// line (peak_error signed, CCW-positive). Used to synthesize curved
/// baseline movements spanning the observed perpendicular errors.
class BumpPlan final : public CartesianPlan {
 public:
  BumpPlan(const Vec2& start, const Vec2& goal, double T, double peak_error_m);
  PlanPoint at(double t) const override;
  double duration() const override { return profile_.duration; }

 private:
  Vec2 start_, goal_, axis_, normal_;
  double distance_;
  double peak_;
  MinJerkProfile profile_;
};

/// Plan backed by uniformly sampled (p, v, a) series, interpolated with
/// cubic Hermite segments (position from velocity slopes, velocity from
/// acceleration slopes). Used for imported baseline trajectories.
class SampledPlan final : public CartesianPlan {
 public:
  SampledPlan(std::vector<double> t, std::vector<Vec2> p, std::vector<Vec2> v,
              std::vector<Vec2> a);
  PlanPoint at(double t) const override;
  double duration() const override { return t_.back(); }

 private:
  std::vector<double> t_;
  std::vector<Vec2> p_, v_, a_;
};

/// A plan sampled on a uniform grid together with its joint-space image
/// under the arm's inverse kinematics. Joint velocities/accelerations
/// come from the Jacobian chain rule, not numerical differencing, so
/// Cartesian and joint series stay consistent under FK to ~1e-8 m.
class DesiredTrajectory {
 public:
  /// Sample `plan` every dt seconds on [0, t_end] for the given arm.
  DesiredTrajectory(const CartesianPlan& plan, const ArmParams& arm,
                    double t_end, double dt);

  struct Sample {
    Vec2 p, v, a;     // Cartesian
    Vec2 q, qd, qdd;  // joint-space image
  };

  /// Desired state at time t; t is clamped onto the sampled range and
  /// snapped to the nearest grid point (the trial integrator only ever
  /// queries on-grid stage times).
  const Sample& at(double t) const;

  double dt() const { return dt_; }
  double t_end() const { return t_end_; }
  std::size_t size() const { return samples_.size(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

 private:
  double dt_;
  double t_end_;
  std::vector<Sample> samples_;
};

}  // namespace fieldgen
