#include "lvt/ground.hpp"

#include <cmath>
#include <stdexcept>

namespace lvt {

AngleImage compute_angle_image(const RangeImage& img) {
  if (img.rows < 2) {
    throw std::invalid_argument("compute_angle_image: need at least 2 rows");
  }
  AngleImage a;
  a.rows = img.rows - 1;
  a.cols = img.cols;
  a.values = Eigen::MatrixXd::Constant(a.rows, a.cols, AngleImage::kEmpty);

  for (int c = 0; c < img.cols; ++c) {
    for (int r = 0; r + 1 < img.rows; ++r) {
      if (img.empty_at(r, c) || img.empty_at(r + 1, c)) continue;
      const double r0 = img.range(r, c), e0 = img.elevation(r, c);
      const double r1 = img.range(r + 1, c), e1 = img.elevation(r + 1, c);
      const double dh = std::abs(r0 * std::sin(e0) - r1 * std::sin(e1));
      const double dd = std::abs(r0 * std::cos(e0) - r1 * std::cos(e1));
      a.values(r, c) = std::atan2(dh, dd);
    }
  }
  return a;
}

Eigen::VectorXd savitzky_golay_weights(int window, int order) {
  const int h = window / 2;
  Eigen::MatrixXd design(window, order + 1);
  for (int i = 0; i < window; ++i) {
    double v = 1.0;
    for (int j = 0; j <= order; ++j) {
      design(i, j) = v;
      v *= (i - h);
    }
  }
  // Least-squares polynomial fit evaluated at the window center.
  Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(order + 1);
  e0(0) = 1.0;
  return design * gram.ldlt().solve(e0);
}

AngleImage smooth_angle_image(const AngleImage& a, int window) {
  if (window < 3 || window % 2 == 0 || window > a.rows) {
    throw std::invalid_argument("smooth_angle_image: window must be odd, >= 3, <= column height");
  }
  const int h = window / 2;
  const Eigen::VectorXd w = savitzky_golay_weights(window, 2);

  AngleImage out = a;
  for (int c = 0; c < a.cols; ++c) {
    for (int r = h; r + h < a.rows; ++r) {
      double acc = 0.0;
      bool valid = true;
      for (int k = -h; k <= h; ++k) {
        const double v = a.values(r + k, c);
        if (v < 0.0) {
          valid = false;
          break;
        }
        acc += w(k + h) * v;
      }
      if (valid) out.values(r, c) = acc;
    }
  }
  return out;
}

GroundMask label_ground(const AngleImage& smoothed, double th_gnd) {
  GroundMask mask;
  mask.rows = smoothed.rows + 1;
  mask.cols = smoothed.cols;
  mask.ground.setConstant(mask.rows, mask.cols, 1);

  for (int c = 0; c < mask.cols; ++c) {
    // Bottom row is ground; empty angles inherit the label below them.
    for (int r = mask.rows - 2; r >= 0; --r) {
      if (smoothed.empty_at(r, c)) {
        mask.ground(r, c) = mask.ground(r + 1, c);
      } else {
        mask.ground(r, c) = smoothed.values(r, c) > th_gnd ? 0 : 1;
      }
    }
  }
  return mask;
}

RepairResult repair_nonground(const RangeImage& img, const GroundMask& mask,
                              int half_window, double range_gap) {
  if (half_window < 1) throw std::invalid_argument("repair_nonground: half_window must be >= 1");
  if (!(range_gap > 0.0)) throw std::invalid_argument("repair_nonground: range_gap must be > 0");

  RepairResult res{img, mask, 0};
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      if (!mask.is_ground(r, c)) continue;
      double sum = 0.0, esum = 0.0;
      int n = 0;
      for (int k = 1; k <= half_window; ++k) {
        const int cl = c - k, cr = c + k;
        if (cl < 0 || cr >= img.cols) continue;
        const bool left_ok = !mask.is_ground(r, cl) && !img.empty_at(r, cl);
        const bool right_ok = !mask.is_ground(r, cr) && !img.empty_at(r, cr);
        if (!left_ok || !right_ok) continue;
        if (std::abs(img.range(r, cl) - img.range(r, cr)) >= range_gap) continue;
        sum += img.range(r, cl) + img.range(r, cr);
        esum += img.elevation(r, cl) + img.elevation(r, cr);
        n += 2;
      }
      if (n == 0) continue;
      res.image.range(r, c) = sum / n;
      res.image.elevation(r, c) = esum / n;
      res.image.point_index(r, c) = RangeImage::kNoPoint;
      res.mask.ground(r, c) = 0;
      ++res.repaired;
    }
  }
  return res;
}

}  // namespace lvt
