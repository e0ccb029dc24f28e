#include "lvt/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lvt {

// --- ini ------------------------------------------------------------------

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

std::optional<std::string> IniFile::Section::get(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string IniFile::Section::get_str(const std::string& key, const std::string& fb) const {
  auto v = get(key);
  return v ? *v : fb;
}

double IniFile::Section::get_double(const std::string& key, double fb) const {
  auto v = get(key);
  if (!v) return fb;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + *v);
  }
}

int IniFile::Section::get_int(const std::string& key, int fb) const {
  auto v = get(key);
  if (!v) return fb;
  try {
    return std::stoi(*v);
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for '" + key + "': " + *v);
  }
}

long long IniFile::Section::get_ll(const std::string& key, long long fb) const {
  auto v = get(key);
  if (!v) return fb;
  try {
    return std::stoll(*v);
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for '" + key + "': " + *v);
  }
}

bool IniFile::Section::get_bool(const std::string& key, bool fb) const {
  auto v = get(key);
  if (!v) return fb;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("bad boolean value for '" + key + "': " + *v);
}

IniFile IniFile::parse(std::istream& in) {
  IniFile ini;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      ini.sections.push_back({trim(t.substr(1, t.size() - 2)), {}});
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("malformed line (expected key = value): " + t);
    }
    if (ini.sections.empty()) ini.sections.push_back({"", {}});
    ini.sections.back().entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return ini;
}

IniFile IniFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse(in);
}

const IniFile::Section* IniFile::find(const std::string& name) const {
  for (const Section& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::vector<const IniFile::Section*> IniFile::find_all(const std::string& name) const {
  std::vector<const Section*> out;
  for (const Section& s : sections) {
    if (s.name == name) out.push_back(&s);
  }
  return out;
}

// --- pipeline config --------------------------------------------------------

RigidTransform3D SensorMount::transform() const {
  return RigidTransform3D::from_xyz_rpy(x, y, z, deg2rad(roll_deg), deg2rad(pitch_deg),
                                        deg2rad(yaw_deg));
}

void PipelineConfig::validate() const {
  if (rows <= 0 || cols <= 0) throw ConfigError("rows/cols must be positive");
  if (sg_window < 3 || sg_window % 2 == 0) throw ConfigError("sg_window must be odd and >= 3");
  if (sg_window > rows - 1) throw ConfigError("sg_window exceeds the angle image height");
  if (!(th_gnd_deg > 0) || !(th_seg_deg > 0)) throw ConfigError("thresholds must be positive");
  if (ngrir_half_window < 1) throw ConfigError("ngrir half_window must be >= 1");
  if (!(ngrir_range_gap > 0)) throw ConfigError("ngrir range_gap must be positive");
  if (!(th_mrg > 0)) throw ConfigError("th_mrg must be positive");
  if (!(dims.width > 0) || !(dims.width < dims.length)) {
    throw ConfigError("vehicle dims must satisfy 0 < width < length");
  }
  if (detector.min_points < 1) throw ConfigError("detector min_points must be >= 1");
  if ((tracker.q_diag.array() <= 0).any() || (tracker.r_diag.array() <= 0).any()) {
    throw ConfigError("tracker noise entries must be positive");
  }
  if (!(tracker.delete_hits <= tracker.confirm_hits && tracker.confirm_hits <= tracker.window)) {
    throw ConfigError("tracker lifecycle must satisfy M_e <= M_c <= N");
  }
  if (sensors.empty()) throw ConfigError("at least one sensor is required");
  for (const SensorAdjacency& adj : adjacency) {
    auto known = [&](const std::string& id) {
      for (const SensorMount& m : sensors) {
        if (m.id == id) return true;
      }
      return false;
    };
    if (!known(adj.left) || !known(adj.right)) {
      throw ConfigError("adjacency names unknown sensor: " + adj.left + ":" + adj.right);
    }
  }
}

PipelineConfig default_config() {
  PipelineConfig cfg;
  cfg.sensors = {
      {"front", 1.8, 0.0, 0.6, 0, 0, 0, 120.0},
      {"left", 0.4, 0.5, 0.7, 0, 0, 120.0, 120.0},
      {"right", 0.4, -0.5, 0.7, 0, 0, -120.0, 120.0},
  };
  cfg.adjacency = {{"right", "front"}, {"front", "left"}, {"left", "right"}};
  return cfg;
}

PipelineConfig parse_config(const IniFile& ini) {
  PipelineConfig cfg = default_config();

  if (const auto* s = ini.find("image")) {
    cfg.rows = s->get_int("rows", cfg.rows);
    cfg.cols = s->get_int("cols", cfg.cols);
  }
  if (const auto* s = ini.find("ground")) {
    cfg.sg_window = s->get_int("sg_window", cfg.sg_window);
    cfg.th_gnd_deg = s->get_double("th_gnd_deg", cfg.th_gnd_deg);
  }
  if (const auto* s = ini.find("ngrir")) {
    cfg.ngrir_enabled = s->get_bool("enabled", cfg.ngrir_enabled);
    cfg.ngrir_half_window = s->get_int("half_window", cfg.ngrir_half_window);
    cfg.ngrir_range_gap = s->get_double("range_gap_m", cfg.ngrir_range_gap);
  }
  if (const auto* s = ini.find("clustering")) {
    cfg.th_seg_deg = s->get_double("th_seg_deg", cfg.th_seg_deg);
    cfg.th_mrg = s->get_double("th_mrg_m", cfg.th_mrg);
  }
  if (const auto* s = ini.find("vehicle")) {
    cfg.dims.length = s->get_double("length_m", cfg.dims.length);
    cfg.dims.width = s->get_double("width_m", cfg.dims.width);
  }
  if (const auto* s = ini.find("detector")) {
    cfg.detector.size_margin = s->get_double("size_margin", cfg.detector.size_margin);
    cfg.detector.min_points = s->get_int("min_points", cfg.detector.min_points);
    cfg.detector.grid_step_deg = s->get_double("grid_step_deg", cfg.detector.grid_step_deg);
    cfg.detector.inlier_inflation =
        s->get_double("inlier_inflation_m", cfg.detector.inlier_inflation);
  }
  if (const auto* s = ini.find("tracker")) {
    if (auto q = s->get("q_diag")) {
      const auto parts = split_ws(*q);
      if (parts.size() != 5) throw ConfigError("q_diag needs 5 entries");
      for (int i = 0; i < 5; ++i) cfg.tracker.q_diag(i) = std::stod(parts[i]);
    }
    if (auto r = s->get("r_diag")) {
      const auto parts = split_ws(*r);
      if (parts.size() != 2) throw ConfigError("r_diag needs 2 entries");
      for (int i = 0; i < 2; ++i) cfg.tracker.r_diag(i) = std::stod(parts[i]);
    }
    cfg.tracker.gate = s->get_double("gate", cfg.tracker.gate);
    cfg.tracker.window = s->get_int("window", cfg.tracker.window);
    cfg.tracker.confirm_hits = s->get_int("confirm_hits", cfg.tracker.confirm_hits);
    cfg.tracker.delete_hits = s->get_int("delete_hits", cfg.tracker.delete_hits);
    cfg.tracker.coast_timeout_s = s->get_double("coast_timeout_s", cfg.tracker.coast_timeout_s);
    cfg.tracker.omega_eps = s->get_double("omega_eps", cfg.tracker.omega_eps);
    cfg.tracker.init_v_var = s->get_double("init_v_var", cfg.tracker.init_v_var);
    cfg.tracker.init_phi_var = s->get_double("init_phi_var", cfg.tracker.init_phi_var);
    cfg.tracker.init_omega_var = s->get_double("init_omega_var", cfg.tracker.init_omega_var);
  }

  const auto mounts = ini.find_all("sensor");
  std::vector<const IniFile::Section*> named;
  for (const IniFile::Section& s : ini.sections) {
    if (s.name.rfind("sensor ", 0) == 0) named.push_back(&s);
  }
  if (!mounts.empty() || !named.empty()) {
    cfg.sensors.clear();
    for (const auto* s : named) {
      SensorMount m;
      m.id = trim(s->name.substr(7));
      m.x = s->get_double("x", 0);
      m.y = s->get_double("y", 0);
      m.z = s->get_double("z", 0);
      m.roll_deg = s->get_double("roll_deg", 0);
      m.pitch_deg = s->get_double("pitch_deg", 0);
      m.yaw_deg = s->get_double("yaw_deg", 0);
      m.fov_deg = s->get_double("fov_deg", 120.0);
      cfg.sensors.push_back(m);
    }
  }
  if (const auto* s = ini.find("sensors")) {
    if (auto adj = s->get("adjacency")) {
      cfg.adjacency.clear();
      for (const std::string& pair : split_ws(*adj)) {
        const size_t colon = pair.find(':');
        if (colon == std::string::npos) throw ConfigError("adjacency entries are left:right");
        cfg.adjacency.push_back({pair.substr(0, colon), pair.substr(colon + 1)});
      }
    }
  }

  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  return parse_config(IniFile::load(path));
}

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string config_to_string(const PipelineConfig& cfg) {
  std::ostringstream os;
  os << "[image]\n";
  os << "rows = " << cfg.rows << "\n";
  os << "cols = " << cfg.cols << "\n\n";
  os << "[ground]\n";
  os << "sg_window = " << cfg.sg_window << "\n";
  os << "th_gnd_deg = " << fmt_g(cfg.th_gnd_deg) << "\n\n";
  os << "[ngrir]\n";
  os << "enabled = " << (cfg.ngrir_enabled ? "true" : "false") << "\n";
  os << "half_window = " << cfg.ngrir_half_window << "\n";
  os << "range_gap_m = " << fmt_g(cfg.ngrir_range_gap) << "\n\n";
  os << "[clustering]\n";
  os << "th_seg_deg = " << fmt_g(cfg.th_seg_deg) << "\n";
  os << "th_mrg_m = " << fmt_g(cfg.th_mrg) << "\n\n";
  os << "[vehicle]\n";
  os << "length_m = " << fmt_g(cfg.dims.length) << "\n";
  os << "width_m = " << fmt_g(cfg.dims.width) << "\n\n";
  os << "[detector]\n";
  os << "size_margin = " << fmt_g(cfg.detector.size_margin) << "\n";
  os << "min_points = " << cfg.detector.min_points << "\n";
  os << "grid_step_deg = " << fmt_g(cfg.detector.grid_step_deg) << "\n";
  os << "inlier_inflation_m = " << fmt_g(cfg.detector.inlier_inflation) << "\n\n";
  os << "[tracker]\n";
  os << "q_diag =";
  for (int i = 0; i < 5; ++i) os << " " << fmt_g(cfg.tracker.q_diag(i));
  os << "\n";
  os << "r_diag = " << fmt_g(cfg.tracker.r_diag(0)) << " " << fmt_g(cfg.tracker.r_diag(1))
     << "\n";
  os << "gate = " << fmt_g(cfg.tracker.gate) << "\n";
  os << "window = " << cfg.tracker.window << "\n";
  os << "confirm_hits = " << cfg.tracker.confirm_hits << "\n";
  os << "delete_hits = " << cfg.tracker.delete_hits << "\n";
  os << "coast_timeout_s = " << fmt_g(cfg.tracker.coast_timeout_s) << "\n";
  os << "omega_eps = " << fmt_g(cfg.tracker.omega_eps) << "\n";
  os << "init_v_var = " << fmt_g(cfg.tracker.init_v_var) << "\n";
  os << "init_phi_var = " << fmt_g(cfg.tracker.init_phi_var) << "\n";
  os << "init_omega_var = " << fmt_g(cfg.tracker.init_omega_var) << "\n\n";
  os << "[sensors]\n";
  os << "adjacency =";
  for (const SensorAdjacency& a : cfg.adjacency) os << " " << a.left << ":" << a.right;
  os << "\n";
  for (const SensorMount& m : cfg.sensors) {
    os << "\n[sensor " << m.id << "]\n";
    os << "x = " << fmt_g(m.x) << "\n";
    os << "y = " << fmt_g(m.y) << "\n";
    os << "z = " << fmt_g(m.z) << "\n";
    os << "roll_deg = " << fmt_g(m.roll_deg) << "\n";
    os << "pitch_deg = " << fmt_g(m.pitch_deg) << "\n";
    os << "yaw_deg = " << fmt_g(m.yaw_deg) << "\n";
    os << "fov_deg = " << fmt_g(m.fov_deg) << "\n";
  }
  return os.str();
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << config_to_string(cfg);
}

bool operator==(const SensorMount& a, const SensorMount& b) {
  return a.id == b.id && a.x == b.x && a.y == b.y && a.z == b.z && a.roll_deg == b.roll_deg &&
         a.pitch_deg == b.pitch_deg && a.yaw_deg == b.yaw_deg && a.fov_deg == b.fov_deg;
}

bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
  auto adj_eq = [](const std::vector<SensorAdjacency>& x, const std::vector<SensorAdjacency>& y) {
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i].left != y[i].left || x[i].right != y[i].right) return false;
    }
    return true;
  };
  return a.rows == b.rows && a.cols == b.cols && a.sg_window == b.sg_window &&
         a.th_gnd_deg == b.th_gnd_deg && a.ngrir_enabled == b.ngrir_enabled &&
         a.ngrir_half_window == b.ngrir_half_window && a.ngrir_range_gap == b.ngrir_range_gap &&
         a.th_seg_deg == b.th_seg_deg && a.th_mrg == b.th_mrg &&
         a.dims.length == b.dims.length && a.dims.width == b.dims.width &&
         a.detector.size_margin == b.detector.size_margin &&
         a.detector.min_points == b.detector.min_points &&
         a.detector.grid_step_deg == b.detector.grid_step_deg &&
         a.detector.inlier_inflation == b.detector.inlier_inflation &&
         a.tracker.q_diag == b.tracker.q_diag && a.tracker.r_diag == b.tracker.r_diag &&
         a.tracker.gate == b.tracker.gate && a.tracker.window == b.tracker.window &&
         a.tracker.confirm_hits == b.tracker.confirm_hits &&
         a.tracker.delete_hits == b.tracker.delete_hits &&
         a.tracker.coast_timeout_s == b.tracker.coast_timeout_s &&
         a.tracker.omega_eps == b.tracker.omega_eps &&
         a.tracker.init_v_var == b.tracker.init_v_var &&
         a.tracker.init_phi_var == b.tracker.init_phi_var &&
         a.tracker.init_omega_var == b.tracker.init_omega_var && a.sensors == b.sensors &&
         adj_eq(a.adjacency, b.adjacency);
}

}  // namespace lvt
