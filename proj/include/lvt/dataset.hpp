#pragma once

#include "lvt/config.hpp"
#include "lvt/eval.hpp"
#include "lvt/sim.hpp"
#include "lvt/tracker.hpp"

#include <map>

namespace lvt {

/// Fixed CSV float formatting so identical runs emit identical bytes.
std::string fmt_csv(double v);

// --- frame files ------------------------------------------------------------

/// Binary frame: magic "LVTPCB01", u32 version, u32 count, then little-endian
/// records of (f32 x, y, z, intensity; u16 layer; u64 t_ns).
void write_pcbin(const std::string& path, const PointFrame& frame);
PointFrame read_pcbin(const std::string& path, const std::string& sensor_id, uint64_t stamp_ns);

/// Text alternative, one "x,y,z,intensity,layer,t_ns" row per point.
void write_frame_csv(const std::string& path, const PointFrame& frame);
PointFrame read_frame_csv(const std::string& path, const std::string& sensor_id,
                          uint64_t stamp_ns);

void write_labels(const std::string& path, const std::vector<uint8_t>& labels);
std::vector<uint8_t> read_labels(const std::string& path);

// --- map and scenario files ---------------------------------------------

void save_map(const TrackMapModel& map, const std::string& path);
TrackMapModel load_map(const std::string& path);

ScenarioConfig parse_scenario(const IniFile& ini);
ScenarioConfig load_scenario(const std::string& path);

// --- dataset directory -------------------------------------------------------

/// Renders a scenario to <dir>/frames/<stamp>_<sensor>.pcbin (+ .lbl),
/// truth.csv, map.txt and meta.txt.
void write_dataset(const std::string& dir, const ScenarioRunner& runner,
                   bool csv_frames = false);

struct DatasetFrame {
  uint64_t stamp_ns = 0;
  EgoPose ego;
  std::vector<OpponentTruth> opponents;
  std::vector<PointFrame> frames;               // one per present sensor
  std::vector<std::vector<uint8_t>> labels;     // parallel to frames, may be empty
};

class DatasetReader {
 public:
  explicit DatasetReader(const std::string& dir);  // throws DataError

  const std::string& dir() const { return dir_; }
  const TrackMapModel& map() const { return map_; }
  int frame_count() const { return static_cast<int>(stamps_.size()); }
  uint64_t stamp(int k) const { return stamps_[k]; }

  /// Loads one frame from disk; missing sensors are skipped, malformed frame
  /// files raise DataError.
  DatasetFrame frame(int k, bool with_labels = false) const;

 private:
  std::string dir_;
  TrackMapModel map_;
  std::vector<uint64_t> stamps_;
  std::map<uint64_t, std::vector<std::string>> sensors_by_stamp_;
  std::map<uint64_t, EgoPose> ego_by_stamp_;
  std::map<uint64_t, std::vector<OpponentTruth>> opp_by_stamp_;
};

// --- pipeline output files ----------------------------------------------

void write_detections_csv(const std::string& path,
                          const std::vector<Detection>& detections);
std::vector<Detection> read_detections_csv(const std::string& path);

/// One row per confirmed track per frame: id, stamp, state and the 15 upper
/// triangular covariance entries.
void write_tracks_csv(const std::string& path, const std::vector<TrackSnapshot>& rows);
void write_tracks_jsonl(const std::string& path, const std::vector<TrackSnapshot>& rows);

void write_clusters_csv(const std::string& path,
                        const std::vector<std::pair<uint64_t, ClusterSet>>& rows);

}  // namespace lvt
