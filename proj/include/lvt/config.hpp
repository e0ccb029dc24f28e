#pragma once

#include "lvt/clustering.hpp"
#include "lvt/detect.hpp"
#include "lvt/ini.hpp"
#include "lvt/tracker.hpp"

namespace lvt {

struct SensorMount {
  std::string id;
  double x = 0, y = 0, z = 0;
  double roll_deg = 0, pitch_deg = 0, yaw_deg = 0;
  double fov_deg = 120.0;

  RigidTransform3D transform() const;
};

/// Full pipeline parameter set. Angles are degrees in files and radians at
/// the point of use; loaders validate everything up front.
struct PipelineConfig {
  int rows = 32;
  int cols = 857;

  int sg_window = 5;
  double th_gnd_deg = 20.0;

  bool ngrir_enabled = true;
  int ngrir_half_window = 9;
  double ngrir_range_gap = 5.0;

  double th_seg_deg = 2.5;
  double th_mrg = 1.80;

  VehicleDims dims;
  DetectorParams detector;
  TrackerConfig tracker;

  std::vector<SensorMount> sensors;
  std::vector<SensorAdjacency> adjacency;

  double th_gnd() const { return deg2rad(th_gnd_deg); }
  double th_seg() const { return deg2rad(th_seg_deg); }

  void validate() const;  // throws ConfigError
};

PipelineConfig default_config();
PipelineConfig parse_config(const IniFile& ini);
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& cfg, const std::string& path);
std::string config_to_string(const PipelineConfig& cfg);

bool operator==(const SensorMount& a, const SensorMount& b);
bool operator==(const PipelineConfig& a, const PipelineConfig& b);

}  // namespace lvt
