#pragma once

#include <span>
#include <vector>

#include "fieldgen/trial.hpp"

namespace fieldgen {

// Movement landmarks (m/s): start when speed first exceeds 5 cm/s, stop
// when it first drops below 2 cm/s after the speed peak.
inline constexpr double kStartSpeed = 0.05;
inline constexpr double kStopSpeed = 0.02;

/// 2nd-order low-pass Butterworth biquad, bilinear transform with
/// prewarped cutoff. Direct form:
///   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct ButterworthLowpass {
  double b0, b1, b2, a1, a2;

  static ButterworthLowpass design(double cutoff_hz, double sample_rate_hz);

  /// Single-pass magnitude response at frequency f.
  double magnitude(double f_hz, double sample_rate_hz) const;

  /// One causal pass, state initialized to steady state at the first
  /// sample (a constant series passes through unchanged).
  std::vector<double> filter(std::span<const double> x) const;

  /// Zero-phase application: forward pass, then backward pass.
  std::vector<double> filtfilt(std::span<const double> x) const;
};

/// Central finite difference (one-sided at the ends).
std::vector<double> central_difference(std::span<const double> x, double dt);

/// Velocity from a uniformly sampled position series: central
/// differences followed by a zero-phase 50 Hz 2nd-order Butterworth.
/// Requires rate > 100 Hz and at least 20 samples.
std::vector<Vec2> filtered_velocity(std::span<const Vec2> position,
                                    double sample_rate_hz);

struct MovementWindow {
  std::size_t i_start = 0;
  std::size_t i_stop = 0;
  double t_start = 0.0;
  double t_stop = 0.0;
};

/// Start/stop landmarks from a velocity series. Throws NoMovementError
/// if the speed never exceeds the start threshold; if the speed never
/// drops below the stop threshold after the peak, the window ends at
/// the last sample.
MovementWindow movement_window(std::span<const Vec2> velocity,
                               double sample_rate_hz);

/// Maximum signed perpendicular deviation (mm) of the hand path from
/// the line joining the movement start point to `target`, within the
/// movement window. Positive = CCW (left of the start->target
/// direction).
double perpendicular_error(const TrialRecord& record, const Vec2& target);

struct AdaptationIndex {
  double value = 0.0;
  double direction_deg = 0.0;
  Phase phase = Phase::Baseline;
  double group_deg = 0.0;
};

/// Soft sanity bound on index values.
inline bool index_in_sane_range(const AdaptationIndex& idx) {
  return std::isfinite(idx.value) && std::abs(idx.value) <= 1.5;
}

/// Adaptation index of one error-clamp trial: OLS slope (with
/// intercept) of the measured lateral wall force against the ideal
/// field force alpha_true * v_parallel inside the movement window.
/// 1 = channel forces exactly match the field profile, 0 = no force.
AdaptationIndex adaptation_index(const TrialRecord& record, double alpha_true);

enum class CurveKind { Intra, Inter };

struct CurvePoint {
  double offset_deg = 0.0;     // wrapped angular offset, one of the 8 multiples of 45
  double mean = 0.0;
  double sem = 0.0;
  int n = 0;
  double group_deg = 0.0;      // training direction the point came from
  double direction_deg = 0.0;  // reach direction the point came from
};

/// Adaptation index vs angular offset. Intra curves fix the training
/// direction (offset = test - train); inter curves fix the test
/// direction (offset = train - test). Offsets run -135..180; the +180
/// entry doubles as -180 when plotted.
struct GeneralizationCurve {
  CurveKind kind = CurveKind::Intra;
  bool baseline_corrected = false;
  double anchor_deg = 0.0;  // train direction (intra) or test direction (inter)
  std::vector<CurvePoint> points;

  const CurvePoint& at_offset(double offset_deg) const;
};

/// Intra-generalization curve for one training group from test-phase
/// indices across all 8 reach directions.
GeneralizationCurve intra_curve(std::span<const AdaptationIndex> indices,
                                double group_deg);

/// Inter-generalization curve toward one test direction, one
/// contribution per training group.
GeneralizationCurve inter_curve(std::span<const AdaptationIndex> indices,
                                double test_deg);

/// Difference between the +45 and -45 degree entries.
double asymmetry(const GeneralizationCurve& curve);

/// Subtract each point's own-group baseline index (mean of the
/// baseline-phase observations at the same group and reach direction).
GeneralizationCurve baseline_correct(const GeneralizationCurve& curve,
                                     std::span<const AdaptationIndex> indices);

}  // namespace fieldgen
