#pragma once

#include "lvt/clustering.hpp"
#include "lvt/detect.hpp"
#include "lvt/track_map.hpp"

#include <random>

namespace lvt {

/// Per-point ground-truth class. Vehicles are kVehicleBase + opponent index.
enum class PointClass : uint8_t {
  kGround = 0,
  kWall = 1,
  kOutside = 2,
  kVehicleBase = 10,
};

inline bool is_vehicle_class(uint8_t c) { return c >= static_cast<uint8_t>(PointClass::kVehicleBase); }

/// Stadium oval: two straights joined by two constant-radius turns.
struct TrackGeometry {
  double straight_length = 300.0;
  double turn_radius = 200.0;
  double width = 15.0;
  double bank_deg = 0.0;        // lateral ground tilt
  double wall_height = 2.0;
  double centerline_step = 1.0; // polyline resolution
};

/// Closed centerline plus boundary polygons offset by +-width/2. Throws
/// std::invalid_argument for degenerate geometry (radius <= width/2, ...).
TrackMapModel make_oval_map(const TrackGeometry& g);

struct SensorRig {
  std::string id = "front";
  RigidTransform3D mount;  // sensor -> vehicle
  double fov_deg = 120.0;
  int rows = 32;
  int cols = 857;
  double vfov_min_deg = -8.0;
  double vfov_max_deg = 2.0;
  double elev_ripple_deg = 0.10;  // sinusoidal per-layer elevation variation
  double range_sigma = 0.02;
  double dropout = 0.0;
  double max_range = 200.0;
  double intensity_sigma = 1.0;
};

/// Three-lidar layout: front plus two lateral sensors angled +-120 deg.
std::vector<SensorRig> default_sensor_rig();
std::vector<SensorAdjacency> default_adjacency();

struct SpeedKnot {
  double t = 0.0;
  double v = 0.0;
};

/// Motion along the track centerline at a lateral offset. An optional spin
/// event adds a constant yaw rate to the heading from its onset.
struct TrajectoryConfig {
  double start_s = 0.0;
  double lateral_offset = 0.0;
  std::vector<SpeedKnot> speed = {{0.0, 0.0}};  // piecewise linear in t
  double spin_onset_s = -1.0;                   // < 0: no spin
  double spin_rate = 0.0;                       // rad/s
};

struct VehicleState {
  Vec2 pos = Vec2::Zero();
  double heading = 0.0;
  double v = 0.0;
  double omega = 0.0;
  double s = 0.0;
};

/// State along a trajectory at time t. Throws std::runtime_error if the
/// lateral offset leaves the track surface.
VehicleState trajectory_state(const TrajectoryConfig& tr, const TrackMapModel& map, double t);

// --- meshes ------------------------------------------------------------

struct BoxPiece {
  Vec3 center = Vec3::Zero();  // body frame, z = 0 on the ground
  Vec3 half = Vec3::Zero();
};

struct WheelPiece {
  Vec3 center = Vec3::Zero();
  double radius = 0.28;
  double half_width = 0.155;  // along body y
};

struct VehicleMesh {
  std::vector<BoxPiece> boxes;
  std::vector<WheelPiece> wheels;
};

/// Open-wheel racecar approximation: slim monocoque, low nose slab, front and
/// rear wings, four exposed wheels. Suspension members are deliberately
/// absent, so the silhouette splits into several range-image components.
VehicleMesh racecar_mesh(const VehicleDims& dims);

/// Absorbing rear bodywork panels that shadow the lateral sensors in a
/// rearward azimuth band (no return, like black carbon surfaces).
VehicleMesh rear_occluder_mesh();

/// Vehicle-sized body split into left/right halves bridged only by a low flat
/// slab; seen from behind, the slab reads as ground and the silhouette breaks
/// into two range-image components.
VehicleMesh split_vehicle_mesh();

// --- scene and ray casting ---------------------------------------------

struct WallSegment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  double base_z = 0.0;
  double height = 2.0;
};

struct MeshInstance {
  RigidTransform3D pose;  // body -> world
  const VehicleMesh* mesh = nullptr;
  uint8_t label = 0;       // PointClass value for returns
  bool absorbing = false;  // blocks rays without producing a return
};

struct SimScene {
  bool has_ground = true;
  Vec3 ground_point = Vec3::Zero();
  Vec3 ground_normal = Vec3::UnitZ();
  std::vector<WallSegment> walls;
  std::vector<MeshInstance> objects;

  double ground_z(double x, double y) const;
};

struct ScanResult {
  PointFrame frame;             // sensor frame
  std::vector<uint8_t> labels;  // one PointClass per point
};

/// Casts rows x cols rays over the rig FOV against the scene. Hit ranges get
/// Gaussian noise along the ray; returns may drop out; absorbing objects
/// block without returning. Per-point times spread over period_ns by column.
ScanResult simulate_scan(const SimScene& scene, const SensorRig& rig,
                         const RigidTransform3D& sensor_to_world, uint64_t stamp_ns,
                         uint64_t period_ns, std::mt19937_64& rng);

// --- scenario ------------------------------------------------------------

struct ScenarioConfig {
  TrackGeometry track;
  TrajectoryConfig ego;
  std::vector<TrajectoryConfig> opponents;
  std::vector<SensorRig> sensors = default_sensor_rig();
  VehicleDims dims;
  double duration_s = 10.0;
  double rate_hz = 20.0;
  uint64_t seed = 1;
  uint64_t t0_ns = 1000000000ull;
  bool rear_occluder = true;
};

struct OpponentTruth {
  int id = 0;
  double x = 0, y = 0, psi = 0;
  double v = 0, omega = 0;
};

struct FrameTruth {
  uint64_t stamp_ns = 0;
  EgoPose ego;
  std::vector<OpponentTruth> opponents;
};

struct SimFrame {
  uint64_t stamp_ns = 0;
  FrameTruth truth;
  std::vector<ScanResult> scans;  // one per sensor, rig order
};

/// Deterministic scenario sampler: frame(k) depends only on (config, k).
class ScenarioRunner {
 public:
  explicit ScenarioRunner(const ScenarioConfig& cfg);

  const TrackMapModel& map() const { return map_; }
  const ScenarioConfig& config() const { return cfg_; }
  int frame_count() const;
  uint64_t frame_stamp(int k) const;

  FrameTruth truth_at(int k) const;
  SimFrame frame(int k) const;

  /// Ego vehicle-fixed 3D pose of a sensor at frame k.
  RigidTransform3D sensor_to_world(int k, const SensorRig& rig) const;

 private:
  SimScene scene_at(double t) const;
  RigidTransform3D body_to_world(const VehicleState& vs) const;

  ScenarioConfig cfg_;
  TrackMapModel map_;
  std::vector<WallSegment> walls_;
  VehicleMesh opponent_mesh_;
  VehicleMesh occluder_mesh_;
};

}  // namespace lvt
