#include "lvt/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lvt {

namespace {

double population_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

}  // namespace

ClusterSet filter_clusters(const ClusterSet& set, const VehicleDims& dims,
                           const TrackMapModel& map, const EgoPose& ego,
                           const DetectorParams& params) {
  const double max_diag = std::hypot(dims.length, dims.width) * (1.0 + params.size_margin);
  ClusterSet out;
  out.stamp_ns = set.stamp_ns;
  for (const Cluster& cl : set.clusters) {
    if (static_cast<int>(cl.points.size()) < params.min_points) continue;
    const double dx = cl.aabb_max.x() - cl.aabb_min.x();
    const double dy = cl.aabb_max.y() - cl.aabb_min.y();
    if (std::hypot(dx, dy) > max_diag) continue;
    const Vec2 centroid_map = ego.to_map({cl.centroid.x(), cl.centroid.y()});
    if (!map.inside_track(centroid_map)) continue;
    out.clusters.push_back(cl);
  }
  return out;
}

double estimate_heading_ref(const Cluster& cluster, const TrackMapModel& map,
                            const EgoPose& ego) {
  const Vec2 centroid_map = ego.to_map({cluster.centroid.x(), cluster.centroid.y()});
  return wrap_angle(centerline_heading(centroid_map, map) - ego.heading);
}

double lshape_variance_score(const std::vector<ClusterPoint>& points, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const size_t n = points.size();
  std::vector<double> c1(n), c2(n);
  double c1min = std::numeric_limits<double>::max(), c1max = -c1min;
  double c2min = c1min, c2max = -c1min;
  for (size_t i = 0; i < n; ++i) {
    const double x = points[i].p.x(), y = points[i].p.y();
    c1[i] = c * x + s * y;
    c2[i] = -s * x + c * y;
    c1min = std::min(c1min, c1[i]);
    c1max = std::max(c1max, c1[i]);
    c2min = std::min(c2min, c2[i]);
    c2max = std::max(c2max, c2[i]);
  }
  // Per axis, pick the candidate edge the point mass sits closer to.
  double norm_hi1 = 0, norm_lo1 = 0, norm_hi2 = 0, norm_lo2 = 0;
  for (size_t i = 0; i < n; ++i) {
    norm_hi1 += (c1max - c1[i]) * (c1max - c1[i]);
    norm_lo1 += (c1[i] - c1min) * (c1[i] - c1min);
    norm_hi2 += (c2max - c2[i]) * (c2max - c2[i]);
    norm_lo2 += (c2[i] - c2min) * (c2[i] - c2min);
  }
  std::vector<double> e1, e2;
  e1.reserve(n);
  e2.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const double d1 = norm_hi1 < norm_lo1 ? c1max - c1[i] : c1[i] - c1min;
    const double d2 = norm_hi2 < norm_lo2 ? c2max - c2[i] : c2[i] - c2min;
    (d1 < d2 ? e1 : e2).push_back(d1 < d2 ? d1 : d2);
  }
  return population_variance(e1) + population_variance(e2);
}

VarHeading estimate_heading_var(const Cluster& cluster, double psi_ref,
                                const DetectorParams& params) {
  if (cluster.points.size() < 5) {
    throw std::invalid_argument("estimate_heading_var: need at least 5 points");
  }

  // Collinearity check via 2D PCA.
  Vec2 mean = Vec2::Zero();
  for (const ClusterPoint& cp : cluster.points) mean += Vec2(cp.p.x(), cp.p.y());
  mean /= static_cast<double>(cluster.points.size());
  Mat2 cov = Mat2::Zero();
  for (const ClusterPoint& cp : cluster.points) {
    const Vec2 d = Vec2(cp.p.x(), cp.p.y()) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(cluster.points.size());
  Eigen::SelfAdjointEigenSolver<Mat2> eig(cov);

  double theta;
  bool degenerate = false;
  if (eig.eigenvalues()(0) < 1e-8) {
    const Vec2 dir = eig.eigenvectors().col(1);
    theta = std::atan2(dir.y(), dir.x());
    degenerate = true;
  } else {
    const double step = deg2rad(params.grid_step_deg);
    double best = 0.0, best_score = std::numeric_limits<double>::max();
    for (double t = 0.0; t < kPi / 2.0 - 1e-12; t += step) {
      const double score = lshape_variance_score(cluster.points, t);
      if (score < best_score) {
        best_score = score;
        best = t;
      }
    }
    // Golden-section pass in the winning bracket.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = best - step, hi = best + step;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = lshape_variance_score(cluster.points, x1);
    double f2 = lshape_variance_score(cluster.points, x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = lshape_variance_score(cluster.points, x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = lshape_variance_score(cluster.points, x2);
      }
    }
    theta = 0.5 * (lo + hi);
  }

  // The rectangle axes are quarter-turn periodic; pick the representative
  // closest to the centerline estimate.
  double best_angle = theta;
  double best_err = std::numeric_limits<double>::max();
  for (int k = -2; k <= 2; ++k) {
    const double cand = wrap_angle(theta + k * kPi / 2.0);
    const double err = std::abs(angle_diff(cand, psi_ref));
    if (err < best_err) {
      best_err = err;
      best_angle = cand;
    }
  }
  return {best_angle, degenerate};
}

RectangleFit fit_rectangle(const Cluster& cluster, double psi, const VehicleDims& dims,
                           double inflation) {
  if (cluster.points.empty()) {
    throw std::invalid_argument("fit_rectangle: empty cluster");
  }
  const double c = std::cos(psi), s = std::sin(psi);
  auto to_local = [&](const Vec3& p) -> Vec2 {
    return {c * p.x() + s * p.y(), -s * p.x() + c * p.y()};
  };
  auto to_world = [&](const Vec2& u) -> Vec2 {
    return {c * u.x() - s * u.y(), s * u.x() + c * u.y()};
  };

  Vec2 umin = Vec2::Constant(std::numeric_limits<double>::max());
  Vec2 umax = Vec2::Constant(std::numeric_limits<double>::lowest());
  for (const ClusterPoint& cp : cluster.points) {
    const Vec2 u = to_local(cp.p);
    umin = umin.cwiseMin(u);
    umax = umax.cwiseMax(u);
  }

  const Vec2 candidates[4] = {{umin.x(), umin.y()},
                              {umin.x(), umax.y()},
                              {umax.x(), umin.y()},
                              {umax.x(), umax.y()}};
  int best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (int i = 0; i < 4; ++i) {
    const double d = to_world(candidates[i]).norm();
    if (d < best_d - 1e-12) {
      best_d = d;
      best = i;
    }
  }
  const Vec2 corner_u = candidates[best];

  // Grow each axis toward the side holding the points; a zero-extent axis
  // grows away from the sensor at the origin.
  auto extent_dir = [&](double lo, double hi, double corner) {
    const double toward_hi = hi - corner, toward_lo = corner - lo;
    if (toward_hi > toward_lo) return 1.0;
    if (toward_hi < toward_lo) return -1.0;
    return corner >= 0.0 ? 1.0 : -1.0;
  };
  const double dir_x = extent_dir(umin.x(), umax.x(), corner_u.x());
  const double dir_y = extent_dir(umin.y(), umax.y(), corner_u.y());
  const Vec2 center_u(corner_u.x() + dir_x * dims.length / 2.0,
                      corner_u.y() + dir_y * dims.width / 2.0);

  int inliers = 0;
  for (const ClusterPoint& cp : cluster.points) {
    const Vec2 u = to_local(cp.p);
    if (std::abs(u.x() - center_u.x()) <= dims.length / 2.0 + inflation &&
        std::abs(u.y() - center_u.y()) <= dims.width / 2.0 + inflation) {
      ++inliers;
    }
  }
  return {to_world(corner_u), to_world(center_u), inliers};
}

DetectionResult detect_vehicles(const ClusterSet& set, const VehicleDims& dims,
                                const TrackMapModel& map, const EgoPose& ego,
                                const DetectorParams& params) {
  DetectionResult res;
  for (const Cluster& cl : set.clusters) {
    const double psi_ref = estimate_heading_ref(cl, map, ego);
    double psi_var = psi_ref;
    bool have_var = false;
    if (cl.points.size() >= 5) {
      psi_var = estimate_heading_var(cl, psi_ref, params).angle;
      have_var = true;
    }
    if (!std::isfinite(psi_ref) && !(have_var && std::isfinite(psi_var))) {
      ++res.skipped;
      continue;
    }

    const RectangleFit fit_ref = fit_rectangle(cl, psi_ref, dims, params.inlier_inflation);
    const RectangleFit fit_var =
        have_var ? fit_rectangle(cl, psi_var, dims, params.inlier_inflation) : fit_ref;

    const bool use_ref = fit_ref.inliers >= fit_var.inliers;
    const RectangleFit& fit = use_ref ? fit_ref : fit_var;
    const double psi = use_ref ? psi_ref : psi_var;

    Detection det;
    const Vec2 center_map = ego.to_map(fit.center);
    det.x = center_map.x();
    det.y = center_map.y();
    det.psi = wrap_angle(psi + ego.heading);
    det.corner = ego.to_map(fit.corner);
    det.source_cluster = cl.id;
    det.chosen = use_ref ? HeadingEstimator::kRef : HeadingEstimator::kVar;
    det.stamp_ns = set.stamp_ns;
    res.detections.push_back(det);
  }
  return res;
}

}  // namespace lvt
