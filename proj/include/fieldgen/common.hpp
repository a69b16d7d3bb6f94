#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fieldgen {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wrap an angle in degrees to (-180, 180].
inline double wrap_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

/// Unit vector at angle theta (degrees, CCW from +x).
inline Vec2 unit_from_deg(double theta_deg) {
  const double th = deg2rad(theta_deg);
  return Vec2(std::cos(th), std::sin(th));
}

/// 90-degree CCW rotation (left normal of a direction vector).
inline Vec2 rot90_ccw(const Vec2& v) { return Vec2(-v.y(), v.x()); }

// Error types; each names one failure condition from a module contract.
struct UnreachableTargetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoMovementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooShortSeriesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingBaselineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegrationDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateRegressionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SmallSampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fieldgen
