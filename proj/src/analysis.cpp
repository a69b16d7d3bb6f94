#include "fieldgen/analysis.hpp"

#include <algorithm>
#include <complex>
#include <map>

namespace fieldgen {

ButterworthLowpass ButterworthLowpass::design(double cutoff_hz,
                                              double sample_rate_hz) {
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0))
    throw std::invalid_argument("ButterworthLowpass: cutoff must be in (0, fs/2)");
  const double w = std::tan(kPi * cutoff_hz / sample_rate_hz);  // prewarped
  const double norm = 1.0 + std::sqrt(2.0) * w + w * w;
  ButterworthLowpass f{};
  f.b0 = w * w / norm;
  f.b1 = 2.0 * f.b0;
  f.b2 = f.b0;
  f.a1 = 2.0 * (w * w - 1.0) / norm;
  f.a2 = (1.0 - std::sqrt(2.0) * w + w * w) / norm;
  return f;
}

double ButterworthLowpass::magnitude(double f_hz, double sample_rate_hz) const {
  const std::complex<double> z =
      std::exp(std::complex<double>(0.0, -2.0 * kPi * f_hz / sample_rate_hz));
  const std::complex<double> num = b0 + b1 * z + b2 * z * z;
  const std::complex<double> den = 1.0 + a1 * z + a2 * z * z;
  return std::abs(num / den);
}

std::vector<double> ButterworthLowpass::filter(std::span<const double> x) const {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  // steady state for a constant input equal to the first sample
  double x1 = x[0], x2 = x[0], y1 = x[0], y2 = x[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double yi = b0 * x[i] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x[i];
    y2 = y1;
    y1 = yi;
    y[i] = yi;
  }
  return y;
}

std::vector<double> ButterworthLowpass::filtfilt(std::span<const double> x) const {
  std::vector<double> fwd = filter(x);
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = filter(fwd);
  std::reverse(bwd.begin(), bwd.end());
  return bwd;
}

std::vector<double> central_difference(std::span<const double> x, double dt) {
  if (x.size() < 2) throw TooShortSeriesError("central_difference: need >= 2 samples");
  std::vector<double> d(x.size());
  d.front() = (x[1] - x[0]) / dt;
  for (std::size_t i = 1; i + 1 < x.size(); ++i)
    d[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
  d.back() = (x[x.size() - 1] - x[x.size() - 2]) / dt;
  return d;
}

std::vector<Vec2> filtered_velocity(std::span<const Vec2> position,
                                    double sample_rate_hz) {
  if (!(sample_rate_hz > 100.0))
    throw std::invalid_argument("filtered_velocity: sample rate must exceed 100 Hz");
  if (position.size() < 20)
    throw TooShortSeriesError("filtered_velocity: need >= 20 samples, got " +
                              std::to_string(position.size()));
  const double dt = 1.0 / sample_rate_hz;
  std::vector<double> x(position.size()), y(position.size());
  for (std::size_t i = 0; i < position.size(); ++i) {
    x[i] = position[i].x();
    y[i] = position[i].y();
  }
  const auto filt = ButterworthLowpass::design(50.0, sample_rate_hz);
  const auto vx = filt.filtfilt(central_difference(x, dt));
  const auto vy = filt.filtfilt(central_difference(y, dt));
  std::vector<Vec2> v(position.size());
  for (std::size_t i = 0; i < position.size(); ++i) v[i] = Vec2(vx[i], vy[i]);
  return v;
}

MovementWindow movement_window(std::span<const Vec2> velocity,
                               double sample_rate_hz) {
  const double dt = 1.0 / sample_rate_hz;
  std::size_t i_start = velocity.size();
  for (std::size_t i = 0; i < velocity.size(); ++i) {
    if (velocity[i].norm() > kStartSpeed) {
      i_start = i;
      break;
    }
  }
  if (i_start == velocity.size())
    throw NoMovementError("speed never exceeded 5 cm/s");

  std::size_t i_peak = i_start;
  double peak = 0.0;
  for (std::size_t i = i_start; i < velocity.size(); ++i) {
    const double s = velocity[i].norm();
    if (s > peak) {
      peak = s;
      i_peak = i;
    }
  }
  std::size_t i_stop = velocity.size() - 1;
  for (std::size_t i = i_peak; i < velocity.size(); ++i) {
    if (velocity[i].norm() < kStopSpeed) {
      i_stop = i;
      break;
    }
  }
  MovementWindow w;
  w.i_start = i_start;
  w.i_stop = i_stop;
  w.t_start = static_cast<double>(i_start) * dt;
  w.t_stop = static_cast<double>(i_stop) * dt;
  return w;
}

double perpendicular_error(const TrialRecord& record, const Vec2& target) {
  const auto vel = filtered_velocity(record.p, record.sample_rate_hz());
  const auto win = movement_window(vel, record.sample_rate_hz());
  const Vec2 start = record.p[win.i_start];
  const Vec2 line = target - start;
  if (line.norm() <= 0.0)
    throw std::invalid_argument("perpendicular_error: start coincides with target");
  const Vec2 n = rot90_ccw(line.normalized());
  double best = 0.0;
  for (std::size_t i = win.i_start; i <= win.i_stop; ++i) {
    const double d = n.dot(record.p[i] - start);
    if (std::abs(d) > std::abs(best)) best = d;
  }
  return best * 1000.0;  // mm
}

AdaptationIndex adaptation_index(const TrialRecord& record, double alpha_true) {
  if (!is_clamp(record.spec.kind))
    throw std::invalid_argument("adaptation_index: not an error-clamp trial");
  const auto vel = filtered_velocity(record.p, record.sample_rate_hz());
  const auto win = movement_window(vel, record.sample_rate_hz());

  const ChannelGeometry& chan = record.spec.field.channel;
  const Vec2 u = chan.axis();
  const Vec2 n = chan.normal();

  // OLS with intercept: measured lateral wall force against the ideal
  // field's lateral force profile alpha_true * v_parallel.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto count = static_cast<double>(win.i_stop - win.i_start + 1);
  for (std::size_t i = win.i_start; i <= win.i_stop; ++i) {
    const double x = alpha_true * u.dot(vel[i]);
    const double y = n.dot(record.f[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double var_x = sxx / count - (sx / count) * (sx / count);
  if (var_x < 1e-8)
    throw DegenerateRegressionError(
        "adaptation_index: predictor variance " + std::to_string(var_x) +
        " below 1e-8 (no parallel motion in the window?)");
  const double cov_xy = sxy / count - (sx / count) * (sy / count);

  AdaptationIndex idx;
  idx.value = cov_xy / var_x;
  idx.direction_deg = record.spec.direction_deg;
  idx.phase = phase_of(record.spec.kind);
  idx.group_deg = record.spec.controller.rep.theta_train_deg;
  return idx;
}

namespace {

int offset_key(double deg) { return static_cast<int>(std::llround(wrap_deg(deg))); }

CurvePoint summarize(double offset_deg, double group_deg, double direction_deg,
                     const std::vector<double>& values) {
  CurvePoint pt;
  pt.offset_deg = offset_deg;
  pt.group_deg = group_deg;
  pt.direction_deg = direction_deg;
  pt.n = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  pt.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - pt.mean) * (v - pt.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    pt.sem = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return pt;
}

std::vector<int> standard_offsets() {
  return {-135, -90, -45, 0, 45, 90, 135, 180};
}

}  // namespace

const CurvePoint& GeneralizationCurve::at_offset(double offset_deg) const {
  const int key = offset_key(offset_deg);
  for (const auto& pt : points)
    if (offset_key(pt.offset_deg) == key) return pt;
  throw MissingDataError("curve has no entry at offset " +
                         std::to_string(offset_deg) + " deg");
}

GeneralizationCurve intra_curve(std::span<const AdaptationIndex> indices,
                                double group_deg) {
  std::map<int, std::vector<double>> buckets;
  for (const auto& idx : indices) {
    if (idx.phase != Phase::Test) continue;
    if (offset_key(idx.group_deg) != offset_key(group_deg)) continue;
    buckets[offset_key(idx.direction_deg - group_deg)].push_back(idx.value);
  }
  GeneralizationCurve curve;
  curve.kind = CurveKind::Intra;
  curve.anchor_deg = wrap_deg(group_deg);
  for (int off : standard_offsets()) {
    const auto it = buckets.find(off);
    if (it == buckets.end())
      throw MissingDataError("intra curve for group " + std::to_string(group_deg) +
                             ": no test indices at offset " + std::to_string(off));
    curve.points.push_back(summarize(off, group_deg,
                                     wrap_deg(group_deg + off), it->second));
  }
  return curve;
}

GeneralizationCurve inter_curve(std::span<const AdaptationIndex> indices,
                                double test_deg) {
  std::map<int, std::vector<double>> buckets;
  for (const auto& idx : indices) {
    if (idx.phase != Phase::Test) continue;
    if (offset_key(idx.direction_deg) != offset_key(test_deg)) continue;
    buckets[offset_key(idx.group_deg - test_deg)].push_back(idx.value);
  }
  GeneralizationCurve curve;
  curve.kind = CurveKind::Inter;
  curve.anchor_deg = wrap_deg(test_deg);
  for (int off : standard_offsets()) {
    const auto it = buckets.find(off);
    if (it == buckets.end())
      throw MissingDataError("inter curve for test direction " +
                             std::to_string(test_deg) + ": no group at offset " +
                             std::to_string(off));
    curve.points.push_back(summarize(off, wrap_deg(test_deg + off),
                                     wrap_deg(test_deg), it->second));
  }
  return curve;
}

double asymmetry(const GeneralizationCurve& curve) {
  return curve.at_offset(45.0).mean - curve.at_offset(-45.0).mean;
}

GeneralizationCurve baseline_correct(const GeneralizationCurve& curve,
                                     std::span<const AdaptationIndex> indices) {
  GeneralizationCurve out = curve;
  out.baseline_corrected = true;
  for (auto& pt : out.points) {
    double sum = 0.0;
    int n = 0;
    for (const auto& idx : indices) {
      if (idx.phase != Phase::Baseline) continue;
      if (offset_key(idx.group_deg) != offset_key(pt.group_deg)) continue;
      if (offset_key(idx.direction_deg) != offset_key(pt.direction_deg)) continue;
      sum += idx.value;
      ++n;
    }
    if (n == 0)
      throw MissingBaselineError(
          "baseline_correct: no baseline index for group " +
          std::to_string(pt.group_deg) + ", direction " +
          std::to_string(pt.direction_deg));
    pt.mean -= sum / static_cast<double>(n);
  }
  return out;
}

}  // namespace fieldgen
