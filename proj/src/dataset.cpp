#include "lvt/dataset.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace fs = std::filesystem;

namespace lvt {

namespace {

constexpr char kPcbinMagic[8] = {'L', 'V', 'T', 'P', 'C', 'B', '0', '1'};
constexpr uint32_t kPcbinVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream iss(line);
  while (std::getline(iss, cur, ',')) out.push_back(cur);
  return out;
}

}  // namespace

std::string fmt_csv(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_pcbin(const std::string& path, const PointFrame& frame) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write frame file: " + path);
  os.write(kPcbinMagic, sizeof(kPcbinMagic));
  put<uint32_t>(os, kPcbinVersion);
  put<uint32_t>(os, static_cast<uint32_t>(frame.points.size()));
  for (const ScanPoint& p : frame.points) {
    put<float>(os, static_cast<float>(p.x));
    put<float>(os, static_cast<float>(p.y));
    put<float>(os, static_cast<float>(p.z));
    put<float>(os, static_cast<float>(p.intensity));
    put<uint16_t>(os, p.layer);
    put<uint64_t>(os, p.t_ns);
  }
  if (!os) throw DataError("short write on frame file: " + path);
}

PointFrame read_pcbin(const std::string& path, const std::string& sensor_id,
                      uint64_t stamp_ns) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open frame file: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kPcbinMagic, sizeof(magic)) != 0) {
    throw DataError("bad magic in frame file: " + path);
  }
  const uint32_t version = take<uint32_t>(is);
  if (version != kPcbinVersion) throw DataError("unsupported frame version in: " + path);
  const uint32_t count = take<uint32_t>(is);

  PointFrame frame;
  frame.sensor_id = sensor_id;
  frame.stamp_ns = stamp_ns;
  frame.points.resize(count);
  for (uint32_t i = 0; i < count; ++i) {
    ScanPoint& p = frame.points[i];
    p.x = take<float>(is);
    p.y = take<float>(is);
    p.z = take<float>(is);
    p.intensity = take<float>(is);
    p.layer = take<uint16_t>(is);
    p.t_ns = take<uint64_t>(is);
  }
  if (!is) throw DataError("truncated frame file: " + path);
  return frame;
}

void write_frame_csv(const std::string& path, const PointFrame& frame) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write frame file: " + path);
  os << "x,y,z,intensity,layer,t_ns\n";
  for (const ScanPoint& p : frame.points) {
    os << fmt_csv(p.x) << ',' << fmt_csv(p.y) << ',' << fmt_csv(p.z) << ','
       << fmt_csv(p.intensity) << ',' << p.layer << ',' << p.t_ns << '\n';
  }
}

PointFrame read_frame_csv(const std::string& path, const std::string& sensor_id,
                          uint64_t stamp_ns) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open frame file: " + path);
  PointFrame frame;
  frame.sensor_id = sensor_id;
  frame.stamp_ns = stamp_ns;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 6) throw DataError("malformed frame row in: " + path);
    ScanPoint p;
    p.x = std::stod(cols[0]);
    p.y = std::stod(cols[1]);
    p.z = std::stod(cols[2]);
    p.intensity = std::stod(cols[3]);
    p.layer = static_cast<uint16_t>(std::stoul(cols[4]));
    p.t_ns = std::stoull(cols[5]);
    frame.points.push_back(p);
  }
  return frame;
}

void write_labels(const std::string& path, const std::vector<uint8_t>& labels) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write label file: " + path);
  os.write(reinterpret_cast<const char*>(labels.data()),
           static_cast<std::streamsize>(labels.size()));
}

std::vector<uint8_t> read_labels(const std::string& path) {
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  if (!is) throw DataError("cannot open label file: " + path);
  const auto size = is.tellg();
  is.seekg(0);
  std::vector<uint8_t> labels(static_cast<size_t>(size));
  is.read(reinterpret_cast<char*>(labels.data()), size);
  return labels;
}

// --- map file -----------------------------------------------------------

void save_map(const TrackMapModel& map, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write map file: " + path);
  auto dump = [&](const char* name, const std::vector<Vec2>& pts) {
    os << '[' << name << "]\n";
    for (const Vec2& p : pts) os << fmt_csv(p.x()) << ' ' << fmt_csv(p.y()) << '\n';
  };
  dump("centerline", map.centerline);
  dump("inner", map.inner);
  dump("outer", map.outer);
}

TrackMapModel load_map(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open map file: " + path);
  TrackMapModel map;
  std::vector<Vec2>* target = nullptr;
  std::string line;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t == "[centerline]") {
      target = &map.centerline;
    } else if (t == "[inner]") {
      target = &map.inner;
    } else if (t == "[outer]") {
      target = &map.outer;
    } else {
      if (!target) throw DataError("map row outside a section in: " + path);
      const auto parts = split_ws(t);
      if (parts.size() != 2) throw DataError("malformed map row in: " + path);
      target->push_back({std::stod(parts[0]), std::stod(parts[1])});
    }
  }
  map.arclength.resize(map.centerline.size());
  for (size_t i = 1; i < map.centerline.size(); ++i) {
    map.arclength[i] = map.arclength[i - 1] + (map.centerline[i] - map.centerline[i - 1]).norm();
  }
  map.validate();
  return map;
}

// --- scenario file ------------------------------------------------------

namespace {

TrajectoryConfig parse_trajectory(const IniFile::Section& s) {
  TrajectoryConfig tr;
  tr.start_s = s.get_double("start_s", 0.0);
  tr.lateral_offset = s.get_double("lateral_offset_m", 0.0);
  if (auto prof = s.get("speed_profile")) {
    tr.speed.clear();
    for (const std::string& knot : split_ws(*prof)) {
      const size_t colon = knot.find(':');
      if (colon == std::string::npos) {
        throw ConfigError("speed_profile entries are t:v, got " + knot);
      }
      tr.speed.push_back({std::stod(knot.substr(0, colon)), std::stod(knot.substr(colon + 1))});
    }
  } else {
    tr.speed = {{0.0, s.get_double("speed_mps", 0.0)}};
  }
  tr.spin_onset_s = s.get_double("spin_onset_s", -1.0);
  tr.spin_rate = deg2rad(s.get_double("spin_rate_dps", 0.0));
  return tr;
}

}  // namespace

ScenarioConfig parse_scenario(const IniFile& ini) {
  ScenarioConfig cfg;
  if (const auto* s = ini.find("track")) {
    cfg.track.straight_length = s->get_double("straight_length_m", cfg.track.straight_length);
    cfg.track.turn_radius = s->get_double("turn_radius_m", cfg.track.turn_radius);
    cfg.track.width = s->get_double("width_m", cfg.track.width);
    cfg.track.bank_deg = s->get_double("bank_deg", cfg.track.bank_deg);
    cfg.track.wall_height = s->get_double("wall_height_m", cfg.track.wall_height);
    cfg.track.centerline_step = s->get_double("centerline_step_m", cfg.track.centerline_step);
  }
  if (const auto* s = ini.find("sim")) {
    cfg.duration_s = s->get_double("duration_s", cfg.duration_s);
    cfg.rate_hz = s->get_double("rate_hz", cfg.rate_hz);
    cfg.seed = static_cast<uint64_t>(s->get_ll("seed", static_cast<long long>(cfg.seed)));
    cfg.t0_ns = static_cast<uint64_t>(s->get_ll("t0_ns", static_cast<long long>(cfg.t0_ns)));
    cfg.rear_occluder = s->get_bool("rear_occluder", cfg.rear_occluder);
  }
  if (const auto* s = ini.find("lidar")) {
    for (SensorRig& rig : cfg.sensors) {
      rig.rows = s->get_int("rows", rig.rows);
      rig.cols = s->get_int("cols", rig.cols);
      rig.vfov_min_deg = s->get_double("vfov_min_deg", rig.vfov_min_deg);
      rig.vfov_max_deg = s->get_double("vfov_max_deg", rig.vfov_max_deg);
      rig.elev_ripple_deg = s->get_double("elev_ripple_deg", rig.elev_ripple_deg);
      rig.range_sigma = s->get_double("range_sigma_m", rig.range_sigma);
      rig.dropout = s->get_double("dropout", rig.dropout);
      rig.max_range = s->get_double("max_range_m", rig.max_range);
      rig.intensity_sigma = s->get_double("intensity_sigma", rig.intensity_sigma);
    }
  }
  if (const auto* s = ini.find("vehicle")) {
    cfg.dims.length = s->get_double("length_m", cfg.dims.length);
    cfg.dims.width = s->get_double("width_m", cfg.dims.width);
  }
  if (const auto* s = ini.find("ego")) cfg.ego = parse_trajectory(*s);
  cfg.opponents.clear();
  for (const auto* s : ini.find_all("opponent")) cfg.opponents.push_back(parse_trajectory(*s));
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  return parse_scenario(IniFile::load(path));
}

// --- dataset directory -----------------------------------------------------

void write_dataset(const std::string& dir, const ScenarioRunner& runner, bool csv_frames) {
  fs::create_directories(fs::path(dir) / "frames");
  save_map(runner.map(), (fs::path(dir) / "map.txt").string());

  const ScenarioConfig& cfg = runner.config();
  {
    std::ofstream meta(fs::path(dir) / "meta.txt");
    meta << "frames = " << runner.frame_count() << "\n";
    meta << "rate_hz = " << fmt_csv(cfg.rate_hz) << "\n";
    meta << "seed = " << cfg.seed << "\n";
    meta << "sensors =";
    for (const SensorRig& rig : cfg.sensors) meta << " " << rig.id;
    meta << "\n";
    meta << "rows = " << (cfg.sensors.empty() ? 0 : cfg.sensors.front().rows) << "\n";
    meta << "cols = " << (cfg.sensors.empty() ? 0 : cfg.sensors.front().cols) << "\n";
    meta << "labels = GROUND:0 WALL:1 OUTSIDE:2 VEHICLE:10+k\n";
  }

  std::ofstream truth(fs::path(dir) / "truth.csv");
  truth << "stamp_ns,ego_x,ego_y,ego_psi,opp_id,opp_x,opp_y,opp_psi,opp_v,opp_omega\n";

  const int n = runner.frame_count();
  const int batch = 16;
  for (int k0 = 0; k0 < n; k0 += batch) {
    const int k1 = std::min(k0 + batch, n);
    std::vector<std::future<SimFrame>> jobs;
    for (int k = k0; k < k1; ++k) {
      jobs.push_back(std::async(std::launch::async, [&runner, k] { return runner.frame(k); }));
    }
    for (int k = k0; k < k1; ++k) {
      const SimFrame f = jobs[k - k0].get();
      for (size_t si = 0; si < f.scans.size(); ++si) {
        const std::string stem =
            std::to_string(f.stamp_ns) + "_" + cfg.sensors[si].id;
        const fs::path base = fs::path(dir) / "frames" / stem;
        if (csv_frames) {
          write_frame_csv(base.string() + ".pccsv", f.scans[si].frame);
        } else {
          write_pcbin(base.string() + ".pcbin", f.scans[si].frame);
        }
        write_labels(base.string() + ".lbl", f.scans[si].labels);
      }
      const FrameTruth& ft = f.truth;
      auto ego_cols = [&]() {
        std::ostringstream os;
        os << ft.stamp_ns << ',' << fmt_csv(ft.ego.x) << ',' << fmt_csv(ft.ego.y) << ','
           << fmt_csv(ft.ego.heading);
        return os.str();
      };
      if (ft.opponents.empty()) {
        truth << ego_cols() << ",-1,0,0,0,0,0\n";
      } else {
        for (const OpponentTruth& op : ft.opponents) {
          truth << ego_cols() << ',' << op.id << ',' << fmt_csv(op.x) << ',' << fmt_csv(op.y)
                << ',' << fmt_csv(op.psi) << ',' << fmt_csv(op.v) << ',' << fmt_csv(op.omega)
                << '\n';
        }
      }
    }
  }
}

DatasetReader::DatasetReader(const std::string& dir) : dir_(dir) {
  const fs::path root(dir);
  if (!fs::exists(root)) throw DataError("dataset directory not found: " + dir);
  map_ = load_map((root / "map.txt").string());

  const fs::path frames = root / "frames";
  if (fs::exists(frames)) {
    for (const auto& entry : fs::directory_iterator(frames)) {
      const std::string name = entry.path().filename().string();
      const std::string ext = entry.path().extension().string();
      if (ext != ".pcbin" && ext != ".pccsv") continue;
      const std::string stem = entry.path().stem().string();
      const size_t sep = stem.find('_');
      if (sep == std::string::npos) continue;
      try {
        const uint64_t stamp = std::stoull(stem.substr(0, sep));
        sensors_by_stamp_[stamp].push_back(stem.substr(sep + 1) + ext);
      } catch (const std::exception&) {
        continue;  // not a frame file
      }
    }
  }
  for (auto& [stamp, sensors] : sensors_by_stamp_) {
    std::sort(sensors.begin(), sensors.end());
    stamps_.push_back(stamp);
  }

  const fs::path truth = root / "truth.csv";
  if (fs::exists(truth)) {
    std::ifstream is(truth);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      if (trim(line).empty()) continue;
      const auto cols = split_csv(line);
      if (cols.size() != 10) throw DataError("malformed truth row in " + truth.string());
      const uint64_t stamp = std::stoull(cols[0]);
      EgoPose ego{std::stod(cols[1]), std::stod(cols[2]), std::stod(cols[3]), stamp};
      ego_by_stamp_[stamp] = ego;
      const int opp_id = std::stoi(cols[4]);
      if (opp_id >= 0) {
        opp_by_stamp_[stamp].push_back({opp_id, std::stod(cols[5]), std::stod(cols[6]),
                                        std::stod(cols[7]), std::stod(cols[8]),
                                        std::stod(cols[9])});
      }
    }
  }
}

DatasetFrame DatasetReader::frame(int k, bool with_labels) const {
  DatasetFrame out;
  out.stamp_ns = stamps_.at(k);
  const auto& sensors = sensors_by_stamp_.at(out.stamp_ns);
  const fs::path frames = fs::path(dir_) / "frames";
  for (const std::string& sensor_file : sensors) {
    const size_t dot = sensor_file.rfind('.');
    const std::string sensor = sensor_file.substr(0, dot);
    const std::string ext = sensor_file.substr(dot);
    const fs::path base = frames / (std::to_string(out.stamp_ns) + "_" + sensor);
    if (ext == ".pcbin") {
      out.frames.push_back(read_pcbin(base.string() + ".pcbin", sensor, out.stamp_ns));
    } else {
      out.frames.push_back(read_frame_csv(base.string() + ".pccsv", sensor, out.stamp_ns));
    }
    if (with_labels) {
      const std::string lbl = base.string() + ".lbl";
      out.labels.push_back(fs::exists(lbl) ? read_labels(lbl) : std::vector<uint8_t>{});
    }
  }
  auto ego_it = ego_by_stamp_.find(out.stamp_ns);
  if (ego_it != ego_by_stamp_.end()) out.ego = ego_it->second;
  auto opp_it = opp_by_stamp_.find(out.stamp_ns);
  if (opp_it != opp_by_stamp_.end()) out.opponents = opp_it->second;
  return out;
}

// --- pipeline outputs ------------------------------------------------------

void write_detections_csv(const std::string& path, const std::vector<Detection>& detections) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write detections file: " + path);
  os << "stamp_ns,x,y,psi,corner_x,corner_y,estimator,cluster_id\n";
  for (const Detection& d : detections) {
    os << d.stamp_ns << ',' << fmt_csv(d.x) << ',' << fmt_csv(d.y) << ',' << fmt_csv(d.psi)
       << ',' << fmt_csv(d.corner.x()) << ',' << fmt_csv(d.corner.y()) << ','
       << (d.chosen == HeadingEstimator::kRef ? "REF" : "VAR") << ',' << d.source_cluster
       << '\n';
  }
}

std::vector<Detection> read_detections_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open detections file: " + path);
  std::vector<Detection> out;
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 8) throw DataError("malformed detection row in: " + path);
    Detection d;
    d.stamp_ns = std::stoull(cols[0]);
    d.x = std::stod(cols[1]);
    d.y = std::stod(cols[2]);
    d.psi = std::stod(cols[3]);
    d.corner = {std::stod(cols[4]), std::stod(cols[5])};
    d.chosen = cols[6] == "VAR" ? HeadingEstimator::kVar : HeadingEstimator::kRef;
    d.source_cluster = std::stoi(cols[7]);
    out.push_back(d);
  }
  return out;
}

namespace {

std::vector<double> upper_triangle(const Mat5& m) {
  std::vector<double> out;
  out.reserve(15);
  for (int i = 0; i < 5; ++i) {
    for (int j = i; j < 5; ++j) out.push_back(m(i, j));
  }
  return out;
}

}  // namespace

void write_tracks_csv(const std::string& path, const std::vector<TrackSnapshot>& rows) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write tracks file: " + path);
  os << "id,stamp_ns,x,y,v,phi,omega";
  const char* names[5] = {"0", "1", "2", "3", "4"};
  for (int i = 0; i < 5; ++i) {
    for (int j = i; j < 5; ++j) os << ",p" << names[i] << names[j];
  }
  os << '\n';
  for (const TrackSnapshot& t : rows) {
    os << t.id << ',' << t.stamp_ns << ',' << fmt_csv(t.state.x) << ',' << fmt_csv(t.state.y)
       << ',' << fmt_csv(t.state.v) << ',' << fmt_csv(t.state.phi) << ','
       << fmt_csv(t.state.omega);
    for (double v : upper_triangle(t.cov)) os << ',' << fmt_csv(v);
    os << '\n';
  }
}

void write_tracks_jsonl(const std::string& path, const std::vector<TrackSnapshot>& rows) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write tracks file: " + path);
  for (const TrackSnapshot& t : rows) {
    nlohmann::json j;
    j["id"] = t.id;
    j["stamp_ns"] = t.stamp_ns;
    j["x"] = t.state.x;
    j["y"] = t.state.y;
    j["v"] = t.state.v;
    j["phi"] = t.state.phi;
    j["omega"] = t.state.omega;
    j["cov_upper"] = upper_triangle(t.cov);
    os << j.dump() << '\n';
  }
}

void write_clusters_csv(const std::string& path,
                        const std::vector<std::pair<uint64_t, ClusterSet>>& rows) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write clusters file: " + path);
  os << "stamp_ns,id,points,cx,cy,cz,min_x,min_y,min_z,max_x,max_y,max_z,sensors\n";
  for (const auto& [stamp, set] : rows) {
    for (const Cluster& cl : set.clusters) {
      os << stamp << ',' << cl.id << ',' << cl.points.size() << ',' << fmt_csv(cl.centroid.x())
         << ',' << fmt_csv(cl.centroid.y()) << ',' << fmt_csv(cl.centroid.z()) << ','
         << fmt_csv(cl.aabb_min.x()) << ',' << fmt_csv(cl.aabb_min.y()) << ','
         << fmt_csv(cl.aabb_min.z()) << ',' << fmt_csv(cl.aabb_max.x()) << ','
         << fmt_csv(cl.aabb_max.y()) << ',' << fmt_csv(cl.aabb_max.z()) << ',';
      for (size_t i = 0; i < cl.sensor_ids.size(); ++i) {
        if (i) os << ';';
        os << cl.sensor_ids[i];
      }
      os << '\n';
    }
  }
}

}  // namespace lvt
