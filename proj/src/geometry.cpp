#include "midlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace midlab {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Quat::Quat(double x_, double y_, double z_, double w_) {
  double n = std::sqrt(x_ * x_ + y_ * y_ + z_ * z_ + w_ * w_);
  if (!(n > 1e-12)) throw std::invalid_argument("Quat: near-zero norm");
  if (!std::isfinite(n)) throw std::invalid_argument("Quat: non-finite components");
  x = x_ / n;
  y = y_ / n;
  z = z_ / n;
  w = w_ / n;
}

Quat Quat::conjugate() const {
  Quat q;
  q.x = -x;
  q.y = -y;
  q.z = -z;
  q.w = w;
  return q;
}

Quat Quat::operator*(const Quat& o) const {
  return Quat(w * o.x + x * o.w + y * o.z - z * o.y,
              w * o.y - x * o.z + y * o.w + z * o.x,
              w * o.z + x * o.y - y * o.x + z * o.w,
              w * o.w - x * o.x - y * o.y - z * o.z);
}

Vec3 Quat::rotate(const Vec3& v) const {
  // v' = v + 2 q_vec x (q_vec x v + w v)
  Vec3 qv{x, y, z};
  Vec3 t{2.0 * (qv.y * v.z - qv.z * v.y), 2.0 * (qv.z * v.x - qv.x * v.z),
         2.0 * (qv.x * v.y - qv.y * v.x)};
  return {v.x + w * t.x + (qv.y * t.z - qv.z * t.y),
          v.y + w * t.y + (qv.z * t.x - qv.x * t.z),
          v.z + w * t.z + (qv.x * t.y - qv.y * t.x)};
}

double quat_geodesic(const Quat& q1, const Quat& q2) {
  double d = q1.dot(q2);
  if (!std::isfinite(d)) throw std::invalid_argument("quat_geodesic: non-finite input");
  d = std::min(1.0, std::abs(d));
  return std::acos(d);
}

Quat yaw_to_quat(double yaw) {
  if (!std::isfinite(yaw)) throw std::invalid_argument("yaw_to_quat: non-finite yaw");
  return Quat(0.0, 0.0, std::sin(yaw / 2.0), std::cos(yaw / 2.0));
}

PixelPoint project_point(const WorldPoint& p, const CameraModel& cam) {
  Vec3 pc = cam.rotation.rotate(p) + cam.translation;
  if (!(pc.z > 0.0)) throw std::domain_error("project_point: point behind camera");
  PixelPoint px;
  double u = cam.cx + cam.fx * pc.x / pc.z;
  double v = cam.cy + cam.fy * pc.y / pc.z;
  px.u = std::clamp(u, 0.0, 1.0);
  px.v = std::clamp(v, 0.0, 1.0);
  px.clamped = (u != px.u) || (v != px.v);
  px.depth = pc.z;
  return px;
}

WorldPoint unproject_point(const PixelPoint& px, const CameraModel& cam) {
  if (!px.depth.has_value()) throw std::invalid_argument("unproject_point: missing depth");
  double d = *px.depth;
  if (!(d > 0.0)) throw std::invalid_argument("unproject_point: non-positive depth");
  Vec3 pc{(px.u - cam.cx) / cam.fx * d, (px.v - cam.cy) / cam.fy * d, d};
  return cam.rotation.conjugate().rotate(pc - cam.translation);
}

}  // namespace midlab
