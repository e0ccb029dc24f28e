#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace lvt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Normalize an angle to (-pi, pi].
double wrap_angle(double a);

/// Signed angular difference a - b, wrapped to (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

/// Single LiDAR return. x forward, y left, z up (right-handed), sensor frame.
struct ScanPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;  // reflectivity, >= 0
  uint16_t layer = 0;      // scan line index
  uint64_t t_ns = 0;       // per-point acquisition time

  Vec3 pos() const { return {x, y, z}; }
};

/// One full scan from one sensor.
struct PointFrame {
  std::string sensor_id;
  uint64_t stamp_ns = 0;  // scan start
  std::vector<ScanPoint> points;
};

struct Spherical {
  double range = 0.0;
  double azimuth = 0.0;    // atan2(y, x)
  double elevation = 0.0;  // asin(z / range)
};

/// Throws std::domain_error for a zero-range (degenerate) point.
Spherical to_spherical(const ScanPoint& p);

Vec3 from_spherical(double range, double azimuth, double elevation);

/// Rigid transform in SE(3). The constructor validates orthonormality and
/// det = +1 to 1e-9 and throws std::invalid_argument otherwise.
class RigidTransform3D {
 public:
  RigidTransform3D();
  RigidTransform3D(const Mat3& rotation, const Vec3& translation);

  static RigidTransform3D from_xyz_rpy(double x, double y, double z,
                                       double roll, double pitch, double yaw);

  const Mat3& rotation() const { return rot_; }
  const Vec3& translation() const { return trans_; }

  Vec3 apply(const Vec3& p) const { return rot_ * p + trans_; }
  RigidTransform3D inverse() const;

  /// Composition: (a * b).apply(p) == a.apply(b.apply(p)).
  RigidTransform3D operator*(const RigidTransform3D& rhs) const;

 private:
  Mat3 rot_;
  Vec3 trans_;
};

/// Applies T to every point; intensity/layer/timestamps are preserved.
PointFrame transform_frame(const PointFrame& frame, const RigidTransform3D& T);

/// Planar ego pose in the map frame.
struct EgoPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]
  uint64_t stamp_ns = 0;

  Vec2 to_map(const Vec2& p_vehicle) const;
  Vec2 to_vehicle(const Vec2& p_map) const;
};

}  // namespace lvt
