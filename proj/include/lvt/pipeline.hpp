#pragma once

#include "lvt/config.hpp"
#include "lvt/dataset.hpp"

namespace lvt {

struct StageTimes {
  double segment_ms = 0.0;
  double detect_ms = 0.0;
  double track_ms = 0.0;
  double total_ms = 0.0;
};

/// Per-sensor segmentation products. `ground` is the ground-removal labeling
/// before reparation (the mask the metrics grade); `mask` and `image` are the
/// repaired pair the clustering consumed.
struct SensorOutput {
  RangeImage image;
  GroundMask ground;
  GroundMask mask;
  LabelImage labels;
  ClusterSet clusters;  // vehicle frame
  int repaired = 0;
};

struct FrameResult {
  uint64_t stamp_ns = 0;
  std::vector<SensorOutput> per_sensor;
  ClusterSet merged;
  ClusterSet candidates;
  std::vector<Detection> detections;
  std::vector<TrackSnapshot> tracks;
  StageTimes times;
};

/// Frame pipeline: per-sensor segmentation (parallel), merge barrier,
/// detection, tracking. Frames must arrive in timestamp order.
class Pipeline {
 public:
  Pipeline(const PipelineConfig& cfg, const TrackMapModel& map);

  /// Segmentation of a single sensor frame (pure; callable concurrently).
  SensorOutput segment_sensor(const PointFrame& frame, const SensorMount& mount) const;

  FrameResult process(const std::vector<PointFrame>& frames, const EgoPose& ego,
                      uint64_t stamp_ns, bool parallel = true);

  const PipelineConfig& config() const { return cfg_; }
  const Tracker& tracker() const { return tracker_; }

 private:
  PipelineConfig cfg_;
  const TrackMapModel* map_;
  Tracker tracker_;
};

struct RunStats {
  int frames = 0;
  int skipped = 0;
  int detections = 0;
  int track_rows = 0;
  std::vector<StageTimes> times;
};

/// Full dataset run: writes detections.csv, tracks.csv, tracks.jsonl and
/// timing.csv under out_dir.
RunStats run_pipeline(const std::string& dataset_dir, const PipelineConfig& cfg,
                      const std::string& out_dir, bool parallel = true);

}  // namespace lvt
