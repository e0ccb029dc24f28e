#pragma once

#include "lvt/clustering.hpp"
#include "lvt/detect.hpp"
#include "lvt/tracker.hpp"

namespace lvt {

/// Binary classification counts; positive class = obstacle (non-ground).
struct BinaryMetrics {
  long tp = 0, fp = 0, fn = 0, tn = 0;

  long total() const { return tp + fp + fn + tn; }
  bool tpr_defined() const { return tp + fn > 0; }
  bool ppv_defined() const { return tp + fp > 0; }
  bool f1_defined() const;
  double tpr() const;  // NaN when undefined
  double ppv() const;
  double f1() const;
};

/// Offline labeling oracle: PCA plane normal over the k nearest neighbors
/// (|vertical component| > normal_thresh -> ground), then one k-NN majority
/// smoothing pass. Degenerate neighborhoods label obstacle. Returns 1 =
/// obstacle per point. Throws std::invalid_argument for frames smaller than
/// k + 1 points.
std::vector<uint8_t> auto_label_ground(const PointFrame& frame, int k, double normal_thresh);

/// Per-point comparison of the pipeline ground mask against truth labels
/// (1 = obstacle), over the points retained in the image.
BinaryMetrics ground_metrics(const GroundMask& mask, const RangeImage& img,
                             const std::vector<uint8_t>& truth_obstacle);

struct OrientedBox {
  Vec2 center = Vec2::Zero();
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  bool contains(const Vec2& p) const;
};

struct ClusterQuality {
  std::vector<int> clusters_per_car;  // clusters fully inside each box
  int mixed_clusters = 0;             // clusters with both in-box and out-of-box points
};

ClusterQuality clustering_metrics(const ClusterSet& set,
                                  const std::vector<OrientedBox>& opponent_boxes);

struct RangeHistogram {
  double min_edge = -100.0;
  double bin_width = 5.0;
  std::vector<long> numer;
  std::vector<long> denom;

  int bins() const { return static_cast<int>(numer.size()); }
  int bin_of(double x) const;
  double center(int b) const { return min_edge + (b + 0.5) * bin_width; }
  bool defined(int b) const { return denom[b] > 0; }
  double value(int b) const;  // NaN when undefined
};

/// Detection probability and false-positive rate over signed longitudinal
/// distance in the ego frame.
class DetectionProbabilityAccumulator {
 public:
  DetectionProbabilityAccumulator(double min_edge, double max_edge, double bin_width,
                                  double match_radius);

  void add_frame(const EgoPose& ego, const std::vector<Vec2>& truth_positions,
                 const std::vector<Detection>& detections);

  const RangeHistogram& tpr_by_range() const { return tpr_; }
  const RangeHistogram& fp_by_range() const { return fp_; }
  long frames() const { return frames_; }

 private:
  RangeHistogram tpr_;
  RangeHistogram fp_;
  double match_radius_;
  long frames_ = 0;
};

struct TrackErrorSample {
  uint64_t stamp_ns = 0;
  int truth_id = 0;
  int track_id = 0;
  double ex_map = 0, ey_map = 0;  // map-frame position error
  double ex_ego = 0, ey_ego = 0;  // ego-frame position error
  double ev = 0;                  // speed error
  double ephi = 0;                // course error, wrapped
};

struct ErrorStats {
  long n = 0;
  double mean = 0.0;
  double mean_abs = 0.0;
  double p25 = 0.0, p75 = 0.0, p95 = 0.0;
};

ErrorStats error_stats(const std::vector<double>& samples);
double percentile(std::vector<double> samples, double q);  // q in [0, 100]

/// Nearest-within-radius matching of tracker output to ground truth.
class TrackingErrorAccumulator {
 public:
  explicit TrackingErrorAccumulator(double match_radius) : match_radius_(match_radius) {}

  struct TruthState {
    int id = 0;
    Vec2 pos = Vec2::Zero();
    double v = 0.0;
    double heading = 0.0;
  };

  void add_frame(uint64_t stamp_ns, const EgoPose& ego, const std::vector<TruthState>& truth,
                 const std::vector<TrackSnapshot>& tracks);

  const std::vector<TrackErrorSample>& samples() const { return samples_; }
  std::vector<double> channel(double TrackErrorSample::* field) const;

 private:
  double match_radius_;
  std::vector<TrackErrorSample> samples_;
};

}  // namespace lvt
