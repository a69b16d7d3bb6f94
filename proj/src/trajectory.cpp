#include "fieldgen/trajectory.hpp"

#include <algorithm>

namespace fieldgen {

double MinJerkProfile::s(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= duration) return 1.0;
  const double u = t / duration;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double MinJerkProfile::sdot(double t) const {
  if (t <= 0.0 || t >= duration) return 0.0;
  const double u = t / duration;
  return u * u * (30.0 + u * (-60.0 + 30.0 * u)) / duration;
}

double MinJerkProfile::sddot(double t) const {
  if (t <= 0.0 || t >= duration) return 0.0;
  const double u = t / duration;
  return u * (60.0 + u * (-180.0 + 120.0 * u)) / (duration * duration);
}

PlanPoint min_jerk(const Vec2& start, const Vec2& goal, double T, double t) {
  if (!(T > 0.0)) throw std::invalid_argument("min_jerk: duration must be > 0");
  const MinJerkProfile prof{T};
  const Vec2 d = goal - start;
  PlanPoint out;
  out.p = start + prof.s(t) * d;
  out.v = prof.sdot(t) * d;
  out.a = prof.sddot(t) * d;
  return out;
}

MinJerkPlan::MinJerkPlan(const Vec2& start, const Vec2& goal, double T)
    : start_(start), goal_(goal), profile_{T} {
  if (!(T > 0.0)) throw std::invalid_argument("MinJerkPlan: duration must be > 0");
}

PlanPoint MinJerkPlan::at(double t) const {
  const Vec2 d = goal_ - start_;
  PlanPoint out;
  out.p = start_ + profile_.s(t) * d;
  out.v = profile_.sdot(t) * d;
  out.a = profile_.sddot(t) * d;
  return out;
}

BumpPlan::BumpPlan(const Vec2& start, const Vec2& goal, double T,
                   double peak_error_m)
    : start_(start), goal_(goal), peak_(peak_error_m), profile_{T} {
  if (!(T > 0.0)) throw std::invalid_argument("BumpPlan: duration must be > 0");
  const Vec2 d = goal - start;
  distance_ = d.norm();
  if (distance_ <= 0.0) throw std::invalid_argument("BumpPlan: start and goal coincide");
  axis_ = d / distance_;
  normal_ = rot90_ccw(axis_);
}

PlanPoint BumpPlan::at(double t) const {
  const double s = profile_.s(t);
  const double sd = profile_.sdot(t);
  const double sdd = profile_.sddot(t);
  const double ps = kPi * s;
  // lateral offset h(s) = peak * sin(pi s); chain rule in time
  const double h = peak_ * std::sin(ps);
  const double hd = peak_ * kPi * std::cos(ps) * sd;
  const double hdd = peak_ * kPi * (std::cos(ps) * sdd - kPi * std::sin(ps) * sd * sd);
  PlanPoint out;
  out.p = start_ + s * distance_ * axis_ + h * normal_;
  out.v = sd * distance_ * axis_ + hd * normal_;
  out.a = sdd * distance_ * axis_ + hdd * normal_;
  return out;
}

SampledPlan::SampledPlan(std::vector<double> t, std::vector<Vec2> p,
                         std::vector<Vec2> v, std::vector<Vec2> a)
    : t_(std::move(t)), p_(std::move(p)), v_(std::move(v)), a_(std::move(a)) {
  if (t_.size() < 2 || t_.size() != p_.size() || t_.size() != v_.size() ||
      t_.size() != a_.size())
    throw std::invalid_argument("SampledPlan: need >= 2 consistent samples");
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (!(t_[i] > t_[i - 1]))
      throw std::invalid_argument("SampledPlan: time must be strictly increasing");
}

PlanPoint SampledPlan::at(double t) const {
  PlanPoint out;
  if (t <= t_.front()) {
    out.p = p_.front();
    return out;  // at rest before the movement
  }
  if (t >= t_.back()) {
    out.p = p_.back();
    return out;  // hold the endpoint
  }
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  const double h = t_[i + 1] - t_[i];
  const double u = (t - t_[i]) / h;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  out.p = h00 * p_[i] + h * h10 * v_[i] + h01 * p_[i + 1] + h * h11 * v_[i + 1];
  out.v = h00 * v_[i] + h * h10 * a_[i] + h01 * v_[i + 1] + h * h11 * a_[i + 1];
  out.a = (1.0 - u) * a_[i] + u * a_[i + 1];
  return out;
}

DesiredTrajectory::DesiredTrajectory(const CartesianPlan& plan,
                                     const ArmParams& arm, double t_end,
                                     double dt)
    : dt_(dt), t_end_(t_end) {
  if (!(dt > 0.0) || !(t_end > 0.0))
    throw std::invalid_argument("DesiredTrajectory: dt and t_end must be > 0");
  const std::size_t n = static_cast<std::size_t>(std::llround(t_end / dt)) + 1;
  samples_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const PlanPoint pt = plan.at(t);
    Sample s;
    s.p = pt.p;
    s.v = pt.v;
    s.a = pt.a;
    s.q = inverse_kinematics(arm, pt.p);
    const Mat2 J = jacobian(arm, s.q);
    s.qd = J.partialPivLu().solve(pt.v);
    const Mat2 Jd = jacobian_dot(arm, s.q, s.qd);
    s.qdd = J.partialPivLu().solve(pt.a - Jd * s.qd);
    samples_.push_back(s);
  }
}

const DesiredTrajectory::Sample& DesiredTrajectory::at(double t) const {
  const auto idx = static_cast<std::ptrdiff_t>(std::llround(t / dt_));
  const auto clamped = std::clamp<std::ptrdiff_t>(
      idx, 0, static_cast<std::ptrdiff_t>(samples_.size()) - 1);
  return samples_[static_cast<std::size_t>(clamped)];
}

}  // namespace fieldgen
