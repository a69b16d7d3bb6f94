#pragma once

#include <string>

#include "fieldgen/common.hpp"

namespace fieldgen {

/// Straight virtual channel between origin and target. The walls are a
/// stiff spring/damper pair engaging past the lateral free play; they
/// only push the hand inwards, never along the channel axis.
struct ChannelGeometry {
  Vec2 origin = Vec2::Zero();   // home point (m)
  Vec2 target = Vec2::Zero();   // target point (m)
  double half_width = 0.0005;   // lateral free play from centerline (m)
  double k_wall = 5000.0;       // wall stiffness (N/m)
  double b_wall = 5.0;          // wall damping (N s/m)

  void validate() const;        // full check including the endpoints
  void validate_gains() const;  // widths and wall gains only (template use)

  /// Unit vector along the channel axis.
  Vec2 axis() const { return (target - origin).normalized(); }
  /// Unit lateral normal (CCW-left of the axis).
  Vec2 normal() const { return rot90_ccw(axis()); }
};

/// Depth of the progressive contact-onset zone: wall spring and damper
/// scale linearly with penetration over the first 0.02 mm, keeping the
/// contact force continuous and spike-free. Beyond it the wall follows
/// the plain spring/damper law.
inline constexpr double kContactOnsetZone = 2e-5;

enum class FieldKind { Null, Curl, Clamp };

std::string to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& s);

/// Environment rendered at the hand during one trial.
struct FieldSpec {
  FieldKind kind = FieldKind::Null;
  double alpha = 15.0;      // curl gain (N s/m), signed; +15 is the trained field
  ChannelGeometry channel;  // clamp trials only

  void validate() const;
};

/// Curl-field force alpha * [0 1; -1 0] * v. Always orthogonal to the
/// hand velocity.
Vec2 curl_force(double alpha, const Vec2& v);

/// Channel wall force at hand state (p, v). Zero inside the free play;
/// outside, a spring/damper force toward the centerline, clamped so the
/// damping term can never pull the hand outward.
Vec2 channel_force(const ChannelGeometry& geom, const Vec2& p, const Vec2& v);

/// Force rendered at the hand by `field` for hand state (p, v).
Vec2 environment_force(const FieldSpec& field, const Vec2& p, const Vec2& v);

/// Commanded robot force under the low-gain force-feedback loop
/// F_robot = F_desired + K (F_desired - F_measured). Provided for
/// apparatus emulation; the trial simulation applies desired forces
/// directly (ideal rendering). K = 0.5 null / 0.75 field on the real rig.
Vec2 robot_rendered_force(const Vec2& f_desired, const Vec2& f_measured,
                          double gain);

}  // namespace fieldgen
