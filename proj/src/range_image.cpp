#include "lvt/range_image.hpp"

#include <cmath>
#include <stdexcept>

namespace lvt {

namespace {

RangeImage make_blank(int rows, int cols, double azimuth_min, double azimuth_max) {
  RangeImage img;
  img.rows = rows;
  img.cols = cols;
  img.azimuth_min = azimuth_min;
  img.azimuth_max = azimuth_max;
  img.range = Eigen::MatrixXd::Constant(rows, cols, RangeImage::kEmpty);
  img.elevation = Eigen::MatrixXd::Zero(rows, cols);
  img.intensity = Eigen::MatrixXd::Zero(rows, cols);
  img.point_index.setConstant(rows, cols, RangeImage::kNoPoint);
  return img;
}

}  // namespace

RangeImage build_range_image(const PointFrame& frame, int rows, int cols,
                             double azimuth_min, double azimuth_max) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("build_range_image: rows and cols must be positive");
  }
  if (!(azimuth_max > azimuth_min)) {
    throw std::invalid_argument("build_range_image: azimuth FOV span must be positive");
  }

  RangeImage img = make_blank(rows, cols, azimuth_min, azimuth_max);
  img.sensor_id = frame.sensor_id;
  img.stamp_ns = frame.stamp_ns;

  const double span = azimuth_max - azimuth_min;
  for (size_t i = 0; i < frame.points.size(); ++i) {
    const ScanPoint& p = frame.points[i];
    const double r2 = p.x * p.x + p.y * p.y + p.z * p.z;
    if (r2 <= 0.0 || !std::isfinite(r2)) {
      ++img.dropped_degenerate;
      continue;
    }
    const Spherical sph = to_spherical(p);
    if (p.layer >= rows || sph.azimuth < azimuth_min || sph.azimuth >= azimuth_max) {
      ++img.dropped_out_of_fov;
      continue;
    }
    int c = static_cast<int>(std::floor((sph.azimuth - azimuth_min) / span * cols));
    c = std::min(std::max(c, 0), cols - 1);
    const int r = p.layer;

    if (!img.empty_at(r, c)) {
      const int32_t prev = img.point_index(r, c);
      const ScanPoint& q = frame.points[prev];
      const bool keep_new =
          p.intensity > q.intensity || (p.intensity == q.intensity && p.t_ns < q.t_ns);
      if (!keep_new) {
        ++img.dropped_duplicates;
        continue;
      }
      ++img.dropped_duplicates;
    }
    img.range(r, c) = sph.range;
    img.elevation(r, c) = sph.elevation;
    img.intensity(r, c) = p.intensity;
    img.point_index(r, c) = static_cast<int32_t>(i);
  }
  return img;
}

RangeImage fill_empty_pixels(const RangeImage& img) {
  RangeImage out = img;
  for (int c = 0; c < img.cols; ++c) {
    // Nearest original non-empty row above each pixel.
    int above = -1;
    std::vector<int> nearest_above(img.rows, -1);
    for (int r = 0; r < img.rows; ++r) {
      nearest_above[r] = above;
      if (!img.empty_at(r, c)) above = r;
    }
    int below = -1;
    for (int r = img.rows - 1; r >= 0; --r) {
      if (!img.empty_at(r, c)) {
        below = r;
        continue;
      }
      const int a = nearest_above[r];
      if (a < 0 && below < 0) continue;
      double rng = 0.0, elev = 0.0;
      int n = 0;
      if (a >= 0) {
        rng += img.range(a, c);
        elev += img.elevation(a, c);
        ++n;
      }
      if (below >= 0) {
        rng += img.range(below, c);
        elev += img.elevation(below, c);
        ++n;
      }
      out.range(r, c) = rng / n;
      out.elevation(r, c) = elev / n;
      out.intensity(r, c) = 0.0;
      out.point_index(r, c) = RangeImage::kNoPoint;
    }
  }
  return out;
}

}  // namespace lvt
