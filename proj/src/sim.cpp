#include "lvt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lvt {

namespace {

std::vector<Vec2> stadium_ring(double straight, double radius, double step) {
  std::vector<Vec2> ring;
  const double s2 = straight / 2.0;
  auto add = [&](const Vec2& p) {
    if (ring.empty() || (ring.back() - p).norm() > 1e-9) ring.push_back(p);
  };

  const int n_straight = std::max(1, static_cast<int>(std::ceil(straight / step)));
  const int n_arc = std::max(4, static_cast<int>(std::ceil(kPi * radius / step)));

  if (straight > 0.0) {
    for (int i = 0; i <= n_straight; ++i) {
      add({-s2 + straight * i / n_straight, -radius});
    }
  } else {
    add({0.0, -radius});
  }
  for (int i = 0; i <= n_arc; ++i) {
    const double a = -kPi / 2.0 + kPi * i / n_arc;
    add({s2 + radius * std::cos(a), radius * std::sin(a)});
  }
  if (straight > 0.0) {
    for (int i = 0; i <= n_straight; ++i) {
      add({s2 - straight * i / n_straight, radius});
    }
  }
  for (int i = 0; i <= n_arc; ++i) {
    const double a = kPi / 2.0 + kPi * i / n_arc;
    add({-s2 + radius * std::cos(a), radius * std::sin(a)});
  }
  ring.push_back(ring.front());  // close
  return ring;
}

double gauss(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  std::normal_distribution<double> d(0.0, sigma);
  return d(rng);
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double intensity_base(uint8_t label) {
  if (is_vehicle_class(label)) return 28.0;
  switch (static_cast<PointClass>(label)) {
    case PointClass::kWall:
      return 15.0;
    case PointClass::kOutside:
      return 10.0;
    default:
      return 8.0;
  }
}

struct LocalRay {
  Vec3 origin;
  Vec3 dir;
};

/// Slab test; returns smallest t > t_min, or +inf.
double ray_box(const LocalRay& ray, const BoxPiece& box, double t_min) {
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double lo = box.center(a) - box.half(a);
    const double hi = box.center(a) + box.half(a);
    const double o = ray.origin(a), d = ray.dir(a);
    if (std::abs(d) < 1e-12) {
      if (o < lo || o > hi) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = (lo - o) / d, t1 = (hi - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_lo = std::max(t_lo, t0);
    t_hi = std::min(t_hi, t1);
    if (t_lo > t_hi) return std::numeric_limits<double>::infinity();
  }
  return t_lo > t_min ? t_lo : std::numeric_limits<double>::infinity();
}

/// Finite cylinder with axis along body y.
double ray_wheel(const LocalRay& ray, const WheelPiece& wheel, double t_min) {
  const double ox = ray.origin.x() - wheel.center.x();
  const double oz = ray.origin.z() - wheel.center.z();
  const double dx = ray.dir.x(), dz = ray.dir.z();
  const double a = dx * dx + dz * dz;
  if (a < 1e-12) return std::numeric_limits<double>::infinity();
  const double b = 2.0 * (ox * dx + oz * dz);
  const double c = ox * ox + oz * oz - wheel.radius * wheel.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  if (t <= t_min) return std::numeric_limits<double>::infinity();
  const double y = ray.origin.y() + t * ray.dir.y() - wheel.center.y();
  if (std::abs(y) > wheel.half_width) return std::numeric_limits<double>::infinity();
  return t;
}

}  // namespace

TrackMapModel make_oval_map(const TrackGeometry& g) {
  if (!(g.width > 0.0) || !(g.turn_radius > g.width / 2.0) || g.straight_length < 0.0) {
    throw std::invalid_argument("make_oval_map: need width > 0 and turn_radius > width/2");
  }
  TrackMapModel map;
  map.centerline = stadium_ring(g.straight_length, g.turn_radius, g.centerline_step);
  map.arclength.resize(map.centerline.size());
  map.arclength[0] = 0.0;
  for (size_t i = 1; i < map.centerline.size(); ++i) {
    map.arclength[i] = map.arclength[i - 1] + (map.centerline[i] - map.centerline[i - 1]).norm();
  }
  map.inner = stadium_ring(g.straight_length, g.turn_radius - g.width / 2.0, g.centerline_step);
  map.outer = stadium_ring(g.straight_length, g.turn_radius + g.width / 2.0, g.centerline_step);
  map.validate();
  return map;
}

std::vector<SensorRig> default_sensor_rig() {
  std::vector<SensorRig> rig(3);
  rig[0].id = "front";
  rig[0].mount = RigidTransform3D::from_xyz_rpy(1.8, 0.0, 0.6, 0, 0, 0);
  rig[1].id = "left";
  rig[1].mount = RigidTransform3D::from_xyz_rpy(0.4, 0.5, 0.7, 0, 0, deg2rad(120.0));
  rig[2].id = "right";
  rig[2].mount = RigidTransform3D::from_xyz_rpy(0.4, -0.5, 0.7, 0, 0, deg2rad(-120.0));
  return rig;
}

std::vector<SensorAdjacency> default_adjacency() {
  // Azimuth grows counter-clockwise: right sensor's FOV ends where the front
  // one begins, the front ends at the left, the left wraps to the right.
  return {{"right", "front"}, {"front", "left"}, {"left", "right"}};
}

VehicleState trajectory_state(const TrajectoryConfig& tr, const TrackMapModel& map, double t) {
  const std::vector<SpeedKnot>& knots = tr.speed;
  auto v_at = [&](double tau) {
    if (knots.empty()) return 0.0;
    if (tau <= knots.front().t) return knots.front().v;
    if (tau >= knots.back().t) return knots.back().v;
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
      if (tau <= knots[i + 1].t) {
        const double span = knots[i + 1].t - knots[i].t;
        const double f = span > 0.0 ? (tau - knots[i].t) / span : 0.0;
        return knots[i].v + f * (knots[i + 1].v - knots[i].v);
      }
    }
    return knots.back().v;
  };

  // Trapezoid over each linear speed piece is exact.
  double s = tr.start_s;
  double prev = 0.0;
  for (const SpeedKnot& k : knots) {
    if (k.t <= prev) continue;
    const double end = std::min(k.t, t);
    if (end > prev) {
      s += 0.5 * (v_at(prev) + v_at(end)) * (end - prev);
      prev = end;
    }
    if (prev >= t) break;
  }
  if (t > prev) s += 0.5 * (v_at(prev) + v_at(t)) * (t - prev);
  const double v_now = v_at(t);

  VehicleState vs;
  vs.s = s;
  vs.v = v_now;
  const double spin = (tr.spin_onset_s >= 0.0 && t > tr.spin_onset_s)
                          ? tr.spin_rate * (t - tr.spin_onset_s)
                          : 0.0;
  vs.heading = wrap_angle(map.heading_at(s) + spin);
  vs.pos = map.centerline_point(s) + tr.lateral_offset * map.normal_at(s);

  const double ds = 1.0;
  const double curv = angle_diff(map.heading_at(s + ds), map.heading_at(s - ds)) / (2.0 * ds);
  vs.omega = curv * v_now +
             ((tr.spin_onset_s >= 0.0 && t > tr.spin_onset_s) ? tr.spin_rate : 0.0);
  return vs;
}

VehicleMesh racecar_mesh(const VehicleDims& dims) {
  const double l2 = dims.length / 2.0;
  const double w2 = dims.width / 2.0;
  VehicleMesh m;
  m.boxes = {
      {{0.3, 0.0, 0.55}, {1.2, 0.38, 0.35}},            // monocoque
      {{l2 - 0.69, 0.0, 0.33}, {0.65, 0.22, 0.09}},     // nose slab
      {{l2 - 0.15, 0.0, 0.22}, {0.15, 0.83 * w2, 0.07}},  // front wing
      {{-l2 + 0.20, 0.0, 1.02}, {0.20, 0.50, 0.12}},    // rear wing
      {{-0.5, 0.0, 0.45}, {0.8, 0.62, 0.25}},           // sidepods
  };
  const double wheel_y = w2 - 0.155;
  m.wheels = {
      {{1.55, wheel_y, 0.28}, 0.28, 0.155},
      {{1.55, -wheel_y, 0.28}, 0.28, 0.155},
      {{-1.55, wheel_y, 0.28}, 0.28, 0.155},
      {{-1.55, -wheel_y, 0.28}, 0.28, 0.155},
  };
  return m;
}

VehicleMesh rear_occluder_mesh() {
  VehicleMesh m;
  m.boxes = {
      {{-2.2, 1.2, 0.9}, {0.16, 0.09, 0.6}},
      {{-2.2, -1.2, 0.9}, {0.16, 0.09, 0.6}},
  };
  return m;
}

VehicleMesh split_vehicle_mesh() {
  VehicleMesh m;
  m.boxes = {
      {{0.0, 0.55, 0.55}, {2.0, 0.35, 0.45}},   // left half
      {{0.0, -0.55, 0.55}, {2.0, 0.35, 0.45}},  // right half
      {{0.0, 0.0, 0.32}, {2.0, 0.21, 0.035}},   // low bridging slab
  };
  return m;
}

double SimScene::ground_z(double x, double y) const {
  const Vec3& n = ground_normal;
  const Vec3& p0 = ground_point;
  return p0.z() - (n.x() * (x - p0.x()) + n.y() * (y - p0.y())) / n.z();
}

ScanResult simulate_scan(const SimScene& scene, const SensorRig& rig,
                         const RigidTransform3D& sensor_to_world, uint64_t stamp_ns,
                         uint64_t period_ns, std::mt19937_64& rng) {
  ScanResult out;
  out.frame.sensor_id = rig.id;
  out.frame.stamp_ns = stamp_ns;

  const double az_min = -deg2rad(rig.fov_deg) / 2.0;
  const double az_span = deg2rad(rig.fov_deg);
  const double az_step = az_span / rig.cols;
  const double v_max = deg2rad(rig.vfov_max_deg);
  const double v_min = deg2rad(rig.vfov_min_deg);
  const double ripple = deg2rad(rig.elev_ripple_deg);

  const RigidTransform3D world_to_sensor = sensor_to_world.inverse();
  const Vec3 origin = sensor_to_world.translation();
  const Mat3& rot = sensor_to_world.rotation();

  // Azimuth buckets over the wall segments to keep per-ray work constant.
  std::vector<std::vector<int>> wall_buckets(rig.cols);
  for (size_t si = 0; si < scene.walls.size(); ++si) {
    const WallSegment& ws = scene.walls[si];
    const Vec2 mid = 0.5 * (ws.a + ws.b);
    if ((mid - Vec2(origin.x(), origin.y())).norm() >
        rig.max_range + (ws.a - ws.b).norm()) {
      continue;
    }
    // Azimuth interval over all four wall corners (a tilted sensor skews the
    // apparent azimuth of the wall top near close range).
    double lo = std::numeric_limits<double>::max(), hi = -lo;
    for (const Vec2& e : {ws.a, ws.b}) {
      for (double z : {ws.base_z, ws.base_z + ws.height}) {
        const Vec3 pl = world_to_sensor.apply({e.x(), e.y(), z});
        const double az = std::atan2(pl.y(), pl.x());
        lo = std::min(lo, az);
        hi = std::max(hi, az);
      }
    }
    auto insert = [&](double a0, double a1) {
      int c0 = static_cast<int>(std::floor((a0 - az_min) / az_step)) - 1;
      int c1 = static_cast<int>(std::ceil((a1 - az_min) / az_step)) + 1;
      c0 = std::max(c0, 0);
      c1 = std::min(c1, rig.cols - 1);
      for (int c = c0; c <= c1; ++c) wall_buckets[c].push_back(static_cast<int>(si));
    };
    if (hi - lo > kPi) {
      // Segment spans the rear wrap; cover both FOV-side slices.
      insert(az_min, lo);
      insert(hi, az_min + az_span);
    } else {
      if (hi < az_min || lo > az_min + az_span) continue;
      insert(lo, hi);
    }
  }

  // Object rays are tested in each instance's body frame.
  struct LocalInstance {
    RigidTransform3D world_to_body;
    const MeshInstance* inst;
  };
  std::vector<LocalInstance> locals;
  locals.reserve(scene.objects.size());
  for (const MeshInstance& mi : scene.objects) {
    locals.push_back({mi.pose.inverse(), &mi});
  }

  const double gdot_eps = 1e-12;
  for (int j = 0; j < rig.cols; ++j) {
    const double az = az_min + (j + 0.5) * az_step;
    const uint64_t col_t = stamp_ns + static_cast<uint64_t>(j) * period_ns / rig.cols;
    for (int l = 0; l < rig.rows; ++l) {
      const double elev_center =
          v_max - (v_max - v_min) * (rig.rows > 1 ? static_cast<double>(l) / (rig.rows - 1) : 0.5);
      const double el =
          elev_center + ripple * std::sin(2.0 * kPi * (az - az_min) / az_span + 0.7 * l);
      const Vec3 dir_local = from_spherical(1.0, az, el);
      const Vec3 d = rot * dir_local;

      double best_t = rig.max_range;
      int best_label = -1;
      bool absorbed = false;

      if (scene.has_ground) {
        const double denom = scene.ground_normal.dot(d);
        if (std::abs(denom) > gdot_eps) {
          const double t = scene.ground_normal.dot(scene.ground_point - origin) / denom;
          if (t > 0.1 && t < best_t) {
            best_t = t;
            best_label = static_cast<int>(PointClass::kGround);
            absorbed = false;
          }
        }
      }

      const Vec2 ow(origin.x(), origin.y());
      const Vec2 dw(d.x(), d.y());
      for (int si : wall_buckets[j]) {
        const WallSegment& ws = scene.walls[si];
        const Vec2 ab = ws.b - ws.a;
        const double denom = dw.x() * ab.y() - dw.y() * ab.x();
        if (std::abs(denom) < 1e-12) continue;
        const Vec2 ao = ws.a - ow;
        const double t = (ao.x() * ab.y() - ao.y() * ab.x()) / denom;
        const double u = (ao.x() * dw.y() - ao.y() * dw.x()) / denom;
        if (t <= 0.1 || t >= best_t || u < 0.0 || u > 1.0) continue;
        const double z = origin.z() + t * d.z();
        if (z < ws.base_z || z > ws.base_z + ws.height) continue;
        best_t = t;
        best_label = static_cast<int>(PointClass::kWall);
        absorbed = false;
      }

      for (const LocalInstance& li : locals) {
        const LocalRay ray{li.world_to_body.apply(origin), li.world_to_body.rotation() * d};
        for (const BoxPiece& box : li.inst->mesh->boxes) {
          const double t = ray_box(ray, box, 0.1);
          if (t < best_t) {
            best_t = t;
            best_label = li.inst->label;
            absorbed = li.inst->absorbing;
          }
        }
        for (const WheelPiece& wheel : li.inst->mesh->wheels) {
          const double t = ray_wheel(ray, wheel, 0.1);
          if (t < best_t) {
            best_t = t;
            best_label = li.inst->label;
            absorbed = li.inst->absorbing;
          }
        }
      }

      if (best_label < 0 || absorbed) continue;
      const double range = best_t + gauss(rng, rig.range_sigma);
      if (range <= 0.05) continue;
      if (rig.dropout > 0.0) {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        if (u01(rng) < rig.dropout) continue;
      }

      const Vec3 p = dir_local * range;
      ScanPoint sp;
      sp.x = p.x();
      sp.y = p.y();
      sp.z = p.z();
      sp.intensity =
          std::max(0.01, intensity_base(static_cast<uint8_t>(best_label)) +
                             gauss(rng, rig.intensity_sigma));
      sp.layer = static_cast<uint16_t>(l);
      sp.t_ns = col_t;
      out.frame.points.push_back(sp);
      out.labels.push_back(static_cast<uint8_t>(best_label));
    }
  }
  return out;
}

ScenarioRunner::ScenarioRunner(const ScenarioConfig& cfg) : cfg_(cfg) {
  map_ = make_oval_map(cfg_.track);
  opponent_mesh_ = racecar_mesh(cfg_.dims);
  occluder_mesh_ = rear_occluder_mesh();

  const double max_lateral = cfg_.track.width / 2.0 - 1.0;
  auto check = [&](const TrajectoryConfig& tr, const std::string& who) {
    if (std::abs(tr.lateral_offset) > max_lateral) {
      throw std::runtime_error("ScenarioRunner: " + who + " trajectory leaves the track at t=0");
    }
  };
  check(cfg_.ego, "ego");
  for (size_t i = 0; i < cfg_.opponents.size(); ++i) {
    check(cfg_.opponents[i], "opponent " + std::to_string(i));
  }

  // Vertical wall quads along both boundaries, based at the local ground.
  SimScene probe;
  probe.ground_point = {0.0, -cfg_.track.turn_radius, 0.0};
  const double bank = deg2rad(cfg_.track.bank_deg);
  probe.ground_normal = {0.0, -std::sin(bank), std::cos(bank)};
  auto add_walls = [&](const std::vector<Vec2>& ring) {
    for (size_t i = 0; i + 1 < ring.size(); ++i) {
      WallSegment ws;
      ws.a = ring[i];
      ws.b = ring[i + 1];
      const Vec2 mid = 0.5 * (ws.a + ws.b);
      ws.base_z = probe.ground_z(mid.x(), mid.y());
      ws.height = cfg_.track.wall_height;
      walls_.push_back(ws);
    }
  };
  add_walls(map_.inner);
  add_walls(map_.outer);
}

int ScenarioRunner::frame_count() const {
  return static_cast<int>(std::llround(cfg_.duration_s * cfg_.rate_hz));
}

uint64_t ScenarioRunner::frame_stamp(int k) const {
  const uint64_t period_ns = static_cast<uint64_t>(std::llround(1e9 / cfg_.rate_hz));
  return cfg_.t0_ns + static_cast<uint64_t>(k) * period_ns;
}

FrameTruth ScenarioRunner::truth_at(int k) const {
  const double t = k / cfg_.rate_hz;
  FrameTruth truth;
  truth.stamp_ns = frame_stamp(k);

  const VehicleState ego = trajectory_state(cfg_.ego, map_, t);
  truth.ego = {ego.pos.x(), ego.pos.y(), ego.heading, truth.stamp_ns};
  for (size_t i = 0; i < cfg_.opponents.size(); ++i) {
    const VehicleState os = trajectory_state(cfg_.opponents[i], map_, t);
    truth.opponents.push_back(
        {static_cast<int>(i), os.pos.x(), os.pos.y(), os.heading, os.v, os.omega});
  }
  return truth;
}

RigidTransform3D ScenarioRunner::body_to_world(const VehicleState& vs) const {
  const double bank = deg2rad(cfg_.track.bank_deg);
  const Vec3 n(0.0, -std::sin(bank), std::cos(bank));
  SimScene probe;
  probe.ground_point = {0.0, -cfg_.track.turn_radius, 0.0};
  probe.ground_normal = n;
  const double z = probe.ground_z(vs.pos.x(), vs.pos.y());

  const Vec3 h(std::cos(vs.heading), std::sin(vs.heading), 0.0);
  Vec3 xdir = (h - h.dot(n) * n).normalized();
  Vec3 ydir = n.cross(xdir);
  Mat3 r;
  r.col(0) = xdir;
  r.col(1) = ydir;
  r.col(2) = n;
  return {r, Vec3(vs.pos.x(), vs.pos.y(), z)};
}

SimScene ScenarioRunner::scene_at(double t) const {
  SimScene scene;
  scene.ground_point = {0.0, -cfg_.track.turn_radius, 0.0};
  const double bank = deg2rad(cfg_.track.bank_deg);
  scene.ground_normal = {0.0, -std::sin(bank), std::cos(bank)};
  scene.walls = walls_;

  for (size_t i = 0; i < cfg_.opponents.size(); ++i) {
    const VehicleState os = trajectory_state(cfg_.opponents[i], map_, t);
    MeshInstance mi;
    mi.pose = body_to_world(os);
    mi.mesh = &opponent_mesh_;
    mi.label = static_cast<uint8_t>(static_cast<int>(PointClass::kVehicleBase) + i);
    scene.objects.push_back(mi);
  }
  if (cfg_.rear_occluder) {
    const VehicleState ego = trajectory_state(cfg_.ego, map_, t);
    MeshInstance mi;
    mi.pose = body_to_world(ego);
    mi.mesh = &occluder_mesh_;
    mi.label = 0;
    mi.absorbing = true;
    scene.objects.push_back(mi);
  }
  return scene;
}

RigidTransform3D ScenarioRunner::sensor_to_world(int k, const SensorRig& rig) const {
  const double t = k / cfg_.rate_hz;
  const VehicleState ego = trajectory_state(cfg_.ego, map_, t);
  return body_to_world(ego) * rig.mount;
}

SimFrame ScenarioRunner::frame(int k) const {
  SimFrame f;
  f.stamp_ns = frame_stamp(k);
  f.truth = truth_at(k);

  const double t = k / cfg_.rate_hz;
  const SimScene scene = scene_at(t);
  const uint64_t period_ns = static_cast<uint64_t>(std::llround(1e9 / cfg_.rate_hz));
  for (size_t si = 0; si < cfg_.sensors.size(); ++si) {
    const SensorRig& rig = cfg_.sensors[si];
    std::mt19937_64 rng(mix_seed(cfg_.seed, mix_seed(static_cast<uint64_t>(k), si)));
    f.scans.push_back(
        simulate_scan(scene, rig, sensor_to_world(k, rig), f.stamp_ns, period_ns, rng));
  }
  return f;
}

}  // namespace lvt
