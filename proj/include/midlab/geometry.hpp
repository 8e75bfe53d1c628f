#pragma once

#include <array>
#include <optional>

namespace midlab {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double norm() const;
};

using WorldPoint = Vec3;

// Unit quaternion. Construction normalizes; near-zero norm is rejected
// because the geodesic distance is undefined there.
struct Quat {
  double x = 0.0, y = 0.0, z = 0.0, w = 1.0;

  Quat() = default;
  Quat(double x_, double y_, double z_, double w_);

  double dot(const Quat& o) const { return x * o.x + y * o.y + z * o.z + w * o.w; }
  Quat conjugate() const;
  Quat operator*(const Quat& o) const;  // Hamilton product
  Vec3 rotate(const Vec3& v) const;
};

// Geodesic distance on the unit quaternion double cover:
// d(q1, q2) = arccos(|<q1, q2>|), in [0, pi/2].
double quat_geodesic(const Quat& q1, const Quat& q2);

// Planar yaw about +z: (0, 0, sin(yaw/2), cos(yaw/2)).
Quat yaw_to_quat(double yaw);

// Normalized image coordinates. `clamped` is set when the raw projection
// fell outside [0,1] and was clamped to the frame.
struct PixelPoint {
  double u = 0.0, v = 0.0;
  std::optional<double> depth;  // meters along the camera axis
  bool clamped = false;
};

// Pinhole camera. Extrinsics map world to camera: p_cam = R(q) * p + t.
// Image coordinates are normalized to [0,1]; pixel resolution only matters
// for rasterization.
struct CameraModel {
  double fx = 1.0, fy = 1.0;
  double cx = 0.5, cy = 0.5;
  Quat rotation;     // world-to-camera
  Vec3 translation;  // world-to-camera
  int width = 32, height = 32;
};

// Projects a world point. Throws std::domain_error if the point is at or
// behind the camera plane.
PixelPoint project_point(const WorldPoint& p, const CameraModel& cam);

// Inverse of project_point; requires depth. Throws std::invalid_argument
// when depth is missing or non-positive.
WorldPoint unproject_point(const PixelPoint& px, const CameraModel& cam);

}  // namespace midlab
