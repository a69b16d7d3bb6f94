#include "fieldgen/environment.hpp"

namespace fieldgen {

void ChannelGeometry::validate_gains() const {
  if (!(half_width > 0.0)) throw std::invalid_argument("ChannelGeometry: half_width must be > 0");
  if (k_wall < 0.0 || b_wall < 0.0)
    throw std::invalid_argument("ChannelGeometry: wall gains must be >= 0");
}

void ChannelGeometry::validate() const {
  validate_gains();
  if ((target - origin).norm() <= 0.0)
    throw std::invalid_argument("ChannelGeometry: origin and target coincide");
}

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Null: return "null";
    case FieldKind::Curl: return "curl";
    case FieldKind::Clamp: return "clamp";
  }
  return "null";
}

FieldKind field_kind_from_string(const std::string& s) {
  if (s == "null") return FieldKind::Null;
  if (s == "curl") return FieldKind::Curl;
  if (s == "clamp") return FieldKind::Clamp;
  throw SchemaError("unknown field kind '" + s + "'");
}

void FieldSpec::validate() const {
  if (!std::isfinite(alpha)) throw std::invalid_argument("FieldSpec: alpha must be finite");
  if (kind == FieldKind::Clamp) channel.validate();
}

Vec2 curl_force(double alpha, const Vec2& v) {
  return alpha * Vec2(v.y(), -v.x());
}

Vec2 channel_force(const ChannelGeometry& geom, const Vec2& p, const Vec2& v) {
  const Vec2 n = geom.normal();
  const double d = n.dot(p - geom.origin);   // signed lateral displacement
  if (std::abs(d) <= geom.half_width) return Vec2::Zero();

  const double vd = n.dot(v);                // lateral velocity
  const double wall_dir = (d > 0.0) ? 1.0 : -1.0;
  const double penetration = std::abs(d) - geom.half_width;
  // Spring and damper ramp in over the contact onset zone, so the wall
  // force is continuous in (p, v) and first contact produces no impact
  // spike. Past the onset zone the spring law is exactly
  // -k_wall * penetration.
  const double ramp = std::min(penetration / kContactOnsetZone, 1.0);
  double f = -geom.k_wall * penetration * ramp * wall_dir -
             geom.b_wall * ramp * vd;
  // The wall only pushes inwards: clamp the total so damping never
  // drags the hand outward past zero wall force.
  if (f * wall_dir > 0.0) f = 0.0;
  return f * n;
}

Vec2 environment_force(const FieldSpec& field, const Vec2& p, const Vec2& v) {
  switch (field.kind) {
    case FieldKind::Null: return Vec2::Zero();
    case FieldKind::Curl: return curl_force(field.alpha, v);
    case FieldKind::Clamp: return channel_force(field.channel, p, v);
  }
  return Vec2::Zero();
}

Vec2 robot_rendered_force(const Vec2& f_desired, const Vec2& f_measured,
                          double gain) {
  if (gain < 0.0) throw std::invalid_argument("robot_rendered_force: gain must be >= 0");
  return f_desired + gain * (f_desired - f_measured);
}

}  // namespace fieldgen
