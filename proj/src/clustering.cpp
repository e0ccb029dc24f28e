#include "lvt/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace lvt {

namespace {

bool beta_connected(double r_a, double r_b, double alpha, double th_seg) {
  const double r1 = std::max(r_a, r_b);
  const double r2 = std::min(r_a, r_b);
  const double beta = std::atan2(r2 * std::sin(alpha), r1 - r2 * std::cos(alpha));
  return beta > th_seg;
}

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

void Cluster::recompute_stats() {
  centroid.setZero();
  if (points.empty()) return;
  aabb_min = Vec3::Constant(std::numeric_limits<double>::max());
  aabb_max = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (const ClusterPoint& cp : points) {
    centroid += cp.p;
    aabb_min = aabb_min.cwiseMin(cp.p);
    aabb_max = aabb_max.cwiseMax(cp.p);
  }
  centroid /= static_cast<double>(points.size());
}

LabelImage segment(const RangeImage& img, const GroundMask& mask, double th_seg) {
  LabelImage out;
  out.rows = img.rows;
  out.cols = img.cols;
  out.labels.setConstant(img.rows, img.cols, LabelImage::kNone);

  const double alpha_az = img.azimuth_step();
  auto usable = [&](int r, int c) {
    return !img.empty_at(r, c) && !mask.is_ground(r, c);
  };

  std::vector<std::pair<int, int>> queue;
  int next_label = 0;
  for (int r0 = 0; r0 < img.rows; ++r0) {
    for (int c0 = 0; c0 < img.cols; ++c0) {
      if (!usable(r0, c0) || out.labels(r0, c0) != LabelImage::kNone) continue;
      ++next_label;
      out.labels(r0, c0) = next_label;
      queue.clear();
      queue.emplace_back(r0, c0);
      while (!queue.empty()) {
        const auto [r, c] = queue.back();
        queue.pop_back();
        const double rng = img.range(r, c);
        const int dr[4] = {-1, 1, 0, 0};
        const int dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int nr = r + dr[k], nc = c + dc[k];
          if (nr < 0 || nr >= img.rows || nc < 0 || nc >= img.cols) continue;
          if (!usable(nr, nc) || out.labels(nr, nc) != LabelImage::kNone) continue;
          const double alpha = (k < 2)
                                   ? std::abs(img.elevation(r, c) - img.elevation(nr, nc))
                                   : alpha_az;
          if (!beta_connected(rng, img.range(nr, nc), alpha, th_seg)) continue;
          out.labels(nr, nc) = next_label;
          queue.emplace_back(nr, nc);
        }
      }
    }
  }
  out.num_labels = next_label;
  return out;
}

ClusterSet extract_clusters(const LabelImage& labels, const RangeImage& img,
                            const PointFrame& frame) {
  ClusterSet set;
  set.stamp_ns = frame.stamp_ns;

  std::vector<Cluster> by_label(labels.num_labels);
  for (int c = 0; c < labels.cols; ++c) {
    for (int r = 0; r < labels.rows; ++r) {
      const int32_t l = labels.at(r, c);
      if (l == LabelImage::kNone || img.synthetic_at(r, c)) continue;
      const ScanPoint& sp = frame.points.at(img.point_index(r, c));
      by_label[l - 1].points.push_back({sp.pos(), sp.intensity, r, c});
    }
  }

  int id = 0;
  for (int l = 0; l < labels.num_labels; ++l) {
    if (by_label[l].points.empty()) {
      ++set.dropped_synthetic_only;
      continue;
    }
    Cluster& cl = by_label[l];
    cl.id = ++id;
    cl.sensor_ids = {frame.sensor_id};
    cl.recompute_stats();
    set.clusters.push_back(std::move(cl));
  }
  return set;
}

ClusterSet transform_clusters(const ClusterSet& set, const RigidTransform3D& T) {
  ClusterSet out = set;
  for (Cluster& cl : out.clusters) {
    for (ClusterPoint& cp : cl.points) cp.p = T.apply(cp.p);
    cl.recompute_stats();
  }
  return out;
}

ClusterSet merge_sensor_clusters(const std::vector<SensorView>& views,
                                 const std::vector<SensorAdjacency>& adjacency,
                                 double th_mrg) {
  std::unordered_map<std::string, int> view_of;
  int total = 0;
  for (size_t v = 0; v < views.size(); ++v) {
    view_of[views[v].image->sensor_id] = static_cast<int>(v);
    total += static_cast<int>(views[v].clusters->clusters.size());
  }

  // Global index of cluster k of view v.
  std::vector<int> base(views.size() + 1, 0);
  for (size_t v = 0; v < views.size(); ++v) {
    base[v + 1] = base[v] + static_cast<int>(views[v].clusters->clusters.size());
  }

  UnionFind uf(total);
  for (const SensorAdjacency& adj : adjacency) {
    auto li = view_of.find(adj.left);
    auto ri = view_of.find(adj.right);
    if (li == view_of.end() || ri == view_of.end()) {
      throw std::invalid_argument("merge_sensor_clusters: unknown sensor in adjacency: " +
                                  adj.left + ":" + adj.right);
    }
    const SensorView& lv = views[li->second];
    const SensorView& rv = views[ri->second];
    const int seam_col = lv.image->cols - 1;

    // Seam points: real points in the facing boundary columns.
    struct SeamPoint {
      Vec3 p;
      int cluster;  // global index
    };
    std::vector<SeamPoint> left_pts, right_pts;
    for (size_t k = 0; k < lv.clusters->clusters.size(); ++k) {
      for (const ClusterPoint& cp : lv.clusters->clusters[k].points) {
        if (cp.col == seam_col) left_pts.push_back({cp.p, base[li->second] + static_cast<int>(k)});
      }
    }
    for (size_t k = 0; k < rv.clusters->clusters.size(); ++k) {
      for (const ClusterPoint& cp : rv.clusters->clusters[k].points) {
        if (cp.col == 0) right_pts.push_back({cp.p, base[ri->second] + static_cast<int>(k)});
      }
    }
    for (const SeamPoint& a : left_pts) {
      for (const SeamPoint& b : right_pts) {
        if ((a.p - b.p).norm() < th_mrg) uf.unite(a.cluster, b.cluster);
      }
    }
  }

  // Relabel densely in (view, cluster) order for determinism.
  ClusterSet out;
  out.stamp_ns = views.empty() ? 0 : views.front().clusters->stamp_ns;
  std::unordered_map<int, int> root_to_out;
  for (size_t v = 0; v < views.size(); ++v) {
    out.dropped_synthetic_only += views[v].clusters->dropped_synthetic_only;
    for (size_t k = 0; k < views[v].clusters->clusters.size(); ++k) {
      const Cluster& src = views[v].clusters->clusters[k];
      const int root = uf.find(base[v] + static_cast<int>(k));
      auto it = root_to_out.find(root);
      if (it == root_to_out.end()) {
        Cluster cl;
        cl.id = static_cast<int>(out.clusters.size()) + 1;
        out.clusters.push_back(cl);
        it = root_to_out.emplace(root, cl.id - 1).first;
      }
      Cluster& dst = out.clusters[it->second];
      dst.points.insert(dst.points.end(), src.points.begin(), src.points.end());
      for (const std::string& sid : src.sensor_ids) {
        if (std::find(dst.sensor_ids.begin(), dst.sensor_ids.end(), sid) == dst.sensor_ids.end()) {
          dst.sensor_ids.push_back(sid);
        }
      }
    }
  }
  for (Cluster& cl : out.clusters) cl.recompute_stats();
  return out;
}

}  // namespace lvt
