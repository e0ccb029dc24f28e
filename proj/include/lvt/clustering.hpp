#pragma once

#include "lvt/ground.hpp"
#include "lvt/range_image.hpp"

namespace lvt {

/// Cluster label per pixel; kNone for ground/empty pixels. Labels are dense
/// in [1, num_labels].
struct LabelImage {
  static constexpr int32_t kNone = 0;

  int rows = 0;
  int cols = 0;
  Eigen::Matrix<int32_t, Eigen::Dynamic, Eigen::Dynamic> labels;
  int num_labels = 0;

  int32_t at(int r, int c) const { return labels(r, c); }
};

struct ClusterPoint {
  Vec3 p;             // meters
  double intensity = 0.0;
  int row = 0;        // source pixel
  int col = 0;
};

struct Cluster {
  int id = 0;
  std::vector<ClusterPoint> points;  // real source points only
  Vec3 centroid = Vec3::Zero();
  Vec3 aabb_min = Vec3::Zero();
  Vec3 aabb_max = Vec3::Zero();
  std::vector<std::string> sensor_ids;

  void recompute_stats();
};

struct ClusterSet {
  std::vector<Cluster> clusters;
  uint64_t stamp_ns = 0;
  int dropped_synthetic_only = 0;  // labels whose pixels were all synthetic
};

/// Angle-criterion BFS over the 4-neighborhood of non-ground pixels. Two
/// neighbors with ranges r1 >= r2 and angular separation alpha (column
/// azimuth step for row neighbors, elevation difference for column
/// neighbors) share a label iff
///   beta = atan2(r2 sin alpha, r1 - r2 cos alpha) > th_seg.
/// No column wraparound.
LabelImage segment(const RangeImage& img, const GroundMask& mask, double th_seg);

/// Materializes one cluster per label from the original source points
/// (synthetic pixels are skipped; labels with only synthetic pixels are
/// dropped and counted). Points stay in the frame of `frame`.
ClusterSet extract_clusters(const LabelImage& labels, const RangeImage& img,
                            const PointFrame& frame);

/// Applies T to every cluster point and refreshes centroids/bounds.
ClusterSet transform_clusters(const ClusterSet& set, const RigidTransform3D& T);

/// `left`'s last image column is physically adjacent to `right`'s first.
struct SensorAdjacency {
  std::string left;
  std::string right;
};

struct SensorView {
  const ClusterSet* clusters = nullptr;  // vehicle frame
  const RangeImage* image = nullptr;
};

/// Union-merges clusters across adjacent sensors: any point pair taken from
/// the left sensor's last column and the right sensor's first column closer
/// than th_mrg joins the two clusters. Output ids are dense; merged clusters
/// concatenate points and contributing sensors. Throws std::invalid_argument
/// for adjacency entries naming unknown sensors.
ClusterSet merge_sensor_clusters(const std::vector<SensorView>& views,
                                 const std::vector<SensorAdjacency>& adjacency,
                                 double th_mrg);

}  // namespace lvt
