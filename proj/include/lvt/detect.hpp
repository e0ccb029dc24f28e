#pragma once

#include "lvt/clustering.hpp"
#include "lvt/track_map.hpp"

namespace lvt {

struct VehicleDims {
  double width = 1.93;   // meters
  double length = 4.88;  // meters
};

enum class HeadingEstimator { kRef, kVar };

/// Measured opponent pose. Center, corner and psi are map frame.
struct Detection {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;  // (-pi, pi]
  Vec2 corner = Vec2::Zero();
  int source_cluster = 0;
  HeadingEstimator chosen = HeadingEstimator::kRef;
  uint64_t stamp_ns = 0;
};

struct DetectorParams {
  double size_margin = 0.20;      // AABB diagonal tolerance over the vehicle diagonal
  int min_points = 8;
  double grid_step_deg = 1.0;     // heading search resolution
  double inlier_inflation = 0.2;  // meters added around the rectangle for inlier counting
};

/// Keeps clusters that are vehicle-sized (horizontal AABB diagonal within the
/// margin), populated (>= min_points) and whose map-frame centroid lies inside
/// the track annulus.
ClusterSet filter_clusters(const ClusterSet& set, const VehicleDims& dims,
                           const TrackMapModel& map, const EgoPose& ego,
                           const DetectorParams& params);

/// Heading of the centerline next to the cluster centroid, expressed in the
/// vehicle-fixed frame.
double estimate_heading_ref(const Cluster& cluster, const TrackMapModel& map,
                            const EgoPose& ego);

struct VarHeading {
  double angle = 0.0;
  bool degenerate = false;  // collinear cluster; angle is the principal direction
};

/// Rectangle-fit heading by variance minimization: search over [0, 90) deg at
/// grid_step_deg with a golden-section refinement in the winning bracket,
/// disambiguated to the quarter-turn candidate closest to psi_ref. Requires
/// >= 5 points (throws std::invalid_argument otherwise).
VarHeading estimate_heading_var(const Cluster& cluster, double psi_ref,
                                const DetectorParams& params);

/// Variance-minimization score of one candidate heading (lower is better).
double lshape_variance_score(const std::vector<ClusterPoint>& points, double theta);

struct RectangleFit {
  Vec2 corner = Vec2::Zero();  // bounding-box vertex nearest the ego origin
  Vec2 center = Vec2::Zero();  // full-size rectangle center
  int inliers = 0;
};

/// Places the known W x L rectangle at heading psi so that it shares the
/// cluster's bounding-box corner nearest the origin and extends toward the
/// cluster points (occluded extent grows away from the sensor). Inliers are
/// counted inside the rectangle inflated by `inflation`.
RectangleFit fit_rectangle(const Cluster& cluster, double psi, const VehicleDims& dims,
                           double inflation);

struct DetectionResult {
  std::vector<Detection> detections;
  int skipped = 0;  // clusters where both fits failed
};

/// Full per-cluster pose estimation: evaluates both heading estimators, keeps
/// the one whose rectangle contains more points (ties go to the centerline
/// estimator) and emits map-frame detections.
DetectionResult detect_vehicles(const ClusterSet& set, const VehicleDims& dims,
                                const TrackMapModel& map, const EgoPose& ego,
                                const DetectorParams& params);

}  // namespace lvt
