#pragma once

#include "lvt/geometry.hpp"

namespace lvt {

/// Dense azimuth-layer projection of one scan. Row = scan layer (index grows
/// downward, i.e. toward the lowest-elevation line), column = azimuth bin.
/// A companion elevation matrix keeps the projection losslessly invertible
/// for scanning sensors whose per-layer elevation is not constant.
struct RangeImage {
  static constexpr double kEmpty = -1.0;
  static constexpr int32_t kNoPoint = -1;

  int rows = 0;
  int cols = 0;
  double azimuth_min = 0.0;  // radians, inclusive lower FOV edge
  double azimuth_max = 0.0;  // radians, exclusive upper FOV edge
  std::string sensor_id;
  uint64_t stamp_ns = 0;

  Eigen::MatrixXd range;         // meters, kEmpty where no return
  Eigen::MatrixXd elevation;     // radians
  Eigen::MatrixXd intensity;     // reflectivity
  Eigen::Matrix<int32_t, Eigen::Dynamic, Eigen::Dynamic> point_index;  // kNoPoint = synthetic

  int dropped_out_of_fov = 0;
  int dropped_duplicates = 0;  // lower-intensity multi-returns
  int dropped_degenerate = 0;  // zero-range points

  bool empty_at(int r, int c) const { return range(r, c) <= 0.0; }
  bool synthetic_at(int r, int c) const { return point_index(r, c) == kNoPoint; }

  double azimuth_step() const { return (azimuth_max - azimuth_min) / cols; }
  /// Azimuth of a column center.
  double col_azimuth(int c) const { return azimuth_min + (c + 0.5) * azimuth_step(); }

  /// Cartesian point implied by (range, column azimuth, elevation) at a pixel.
  Vec3 reconstruct(int r, int c) const {
    return from_spherical(range(r, c), col_azimuth(c), elevation(r, c));
  }
};

/// Projects a frame onto the azimuth-layer grid. Row = point layer; column =
/// floor((azimuth - azimuth_min) / span * cols), clamped. When several points
/// fall in one pixel the largest intensity wins, ties broken by the earlier
/// timestamp. Points outside the FOV (or with layer >= rows) are dropped and
/// counted. Throws std::invalid_argument for rows/cols <= 0 or an empty FOV.
RangeImage build_range_image(const PointFrame& frame, int rows, int cols,
                             double azimuth_min, double azimuth_max);

/// Fills each empty pixel with the mean of the nearest non-empty pixel above
/// and below in its column (range and elevation averaged separately). Filled
/// pixels are synthetic (point_index = kNoPoint). Fully empty columns stay
/// empty. Non-empty pixels are never modified; the pass is idempotent.
RangeImage fill_empty_pixels(const RangeImage& img);

}  // namespace lvt
