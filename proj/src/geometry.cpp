#include "lvt/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace lvt {

double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;
}

Spherical to_spherical(const ScanPoint& p) {
  const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  if (r <= 0.0 || !std::isfinite(r)) {
    throw std::domain_error("to_spherical: degenerate zero-range point");
  }
  return {r, std::atan2(p.y, p.x), std::asin(p.z / r)};
}

Vec3 from_spherical(double range, double azimuth, double elevation) {
  const double ce = std::cos(elevation);
  return {range * ce * std::cos(azimuth), range * ce * std::sin(azimuth),
          range * std::sin(elevation)};
}

RigidTransform3D::RigidTransform3D() : rot_(Mat3::Identity()), trans_(Vec3::Zero()) {}

RigidTransform3D::RigidTransform3D(const Mat3& rotation, const Vec3& translation)
    : rot_(rotation), trans_(translation) {
  const double ortho_err = (rot_.transpose() * rot_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9 || std::abs(rot_.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("RigidTransform3D: rotation is not a proper orthonormal matrix");
  }
}

RigidTransform3D RigidTransform3D::from_xyz_rpy(double x, double y, double z,
                                                double roll, double pitch, double yaw) {
  Mat3 r = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
            Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
            Eigen::AngleAxisd(roll, Vec3::UnitX()))
               .toRotationMatrix();
  return {r, Vec3(x, y, z)};
}

RigidTransform3D RigidTransform3D::inverse() const {
  Mat3 rt = rot_.transpose();
  return {rt, -(rt * trans_)};
}

RigidTransform3D RigidTransform3D::operator*(const RigidTransform3D& rhs) const {
  return {rot_ * rhs.rot_, rot_ * rhs.trans_ + trans_};
}

PointFrame transform_frame(const PointFrame& frame, const RigidTransform3D& T) {
  PointFrame out;
  out.sensor_id = frame.sensor_id;
  out.stamp_ns = frame.stamp_ns;
  out.points.reserve(frame.points.size());
  for (const ScanPoint& p : frame.points) {
    Vec3 q = T.apply(p.pos());
    ScanPoint sp = p;
    sp.x = q.x();
    sp.y = q.y();
    sp.z = q.z();
    out.points.push_back(sp);
  }
  return out;
}

Vec2 EgoPose::to_map(const Vec2& p_vehicle) const {
  const double c = std::cos(heading), s = std::sin(heading);
  return {x + c * p_vehicle.x() - s * p_vehicle.y(),
          y + s * p_vehicle.x() + c * p_vehicle.y()};
}

Vec2 EgoPose::to_vehicle(const Vec2& p_map) const {
  const double c = std::cos(heading), s = std::sin(heading);
  const double dx = p_map.x() - x, dy = p_map.y() - y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

}  // namespace lvt
