#pragma once

#include "lvt/range_image.hpp"

namespace lvt {

/// Per vertical-neighbor-pair angle between the local surface direction and
/// the horizontal plane. Row i relates image rows i and i+1; values in
/// [0, pi/2], kEmpty where either pair member is missing.
struct AngleImage {
  static constexpr double kEmpty = -1.0;

  int rows = 0;  // = parent image rows - 1
  int cols = 0;
  Eigen::MatrixXd values;

  bool empty_at(int r, int c) const { return values(r, c) < 0.0; }
};

/// true = ground.
struct GroundMask {
  int rows = 0;
  int cols = 0;
  Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic> ground;

  bool is_ground(int r, int c) const { return ground(r, c) != 0; }
  long ground_count() const { return (ground.array() != 0).count(); }
};

/// Builds the angle image from vertical pixel pairs:
///   dh = |r_i sin e_i - r_{i+1} sin e_{i+1}|, dd = |r_i cos e_i - r_{i+1} cos e_{i+1}|,
///   a = atan2(dh, dd).
/// Throws std::invalid_argument if the image has fewer than 2 rows.
AngleImage compute_angle_image(const RangeImage& img);

/// Column-wise Savitzky-Golay smoothing (polynomial order 2). Rows closer to
/// the column boundary than the half-window, and windows containing an empty
/// angle, are copied through unsmoothed. Window must be odd, >= 3 and <= the
/// column height; anything else throws std::invalid_argument.
AngleImage smooth_angle_image(const AngleImage& a, int window);

/// Centered Savitzky-Golay smoothing weights for the given window/order.
Eigen::VectorXd savitzky_golay_weights(int window, int order);

/// Labels pixel (i, j), i < n-1, non-ground iff a(i, j) > th_gnd. The bottom
/// row (largest layer index, the scan line nearest the ground) is ground by
/// default; pixels with an empty angle inherit the label of the pixel below.
GroundMask label_ground(const AngleImage& smoothed, double th_gnd);

struct RepairResult {
  RangeImage image;
  GroundMask mask;
  int repaired = 0;
};

/// Non-ground range image reparation: a ground pixel surrounded in its row by
/// non-ground pixels at similar depth takes their mean range and is relabeled
/// non-ground (synthetic, point_index = kNoPoint). A symmetric neighbor pair
/// (j-k, j+k), k in [1, half_window], contributes only if both members are
/// non-ground and their depth difference is below range_gap.
RepairResult repair_nonground(const RangeImage& img, const GroundMask& mask,
                              int half_window, double range_gap);

}  // namespace lvt
