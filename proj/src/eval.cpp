#include "lvt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lvt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Minimal 3D kd-tree for k-nearest-neighbor queries.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& pts) : pts_(pts), index_(pts.size()) {
    std::iota(index_.begin(), index_.end(), 0);
    if (!pts_.empty()) build(0, static_cast<int>(pts_.size()), 0);
  }

  void knn(const Vec3& q, int k, std::vector<int>& out) const {
    heap_.clear();
    search(q, k, 0, static_cast<int>(pts_.size()), 0);
    out.resize(heap_.size());
    for (size_t i = 0; i < heap_.size(); ++i) out[i] = heap_[i].second;
  }

 private:
  void build(int lo, int hi, int axis) {
    if (hi - lo <= 1) return;
    const int mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                     [&](int a, int b) { return pts_[a](axis) < pts_[b](axis); });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void push(double d2, int idx, int k) const {
    heap_.emplace_back(d2, idx);
    std::push_heap(heap_.begin(), heap_.end());
    if (static_cast<int>(heap_.size()) > k) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.pop_back();
    }
  }

  void search(const Vec3& q, int k, int lo, int hi, int axis) const {
    if (lo >= hi) return;
    const int mid = (lo + hi) / 2;
    const int idx = index_[mid];
    push((pts_[idx] - q).squaredNorm(), idx, k);
    const double delta = q(axis) - pts_[idx](axis);
    const int next = (axis + 1) % 3;
    if (delta < 0.0) {
      search(q, k, lo, mid, next);
      if (static_cast<int>(heap_.size()) < k || delta * delta < heap_.front().first) {
        search(q, k, mid + 1, hi, next);
      }
    } else {
      search(q, k, mid + 1, hi, next);
      if (static_cast<int>(heap_.size()) < k || delta * delta < heap_.front().first) {
        search(q, k, lo, mid, next);
      }
    }
  }

  const std::vector<Vec3>& pts_;
  std::vector<int> index_;
  mutable std::vector<std::pair<double, int>> heap_;  // max-heap on distance
};

}  // namespace

bool BinaryMetrics::f1_defined() const {
  return tpr_defined() && ppv_defined() && (tpr() + ppv() > 0.0);
}

double BinaryMetrics::tpr() const {
  return tpr_defined() ? static_cast<double>(tp) / (tp + fn) : kNaN;
}

double BinaryMetrics::ppv() const {
  return ppv_defined() ? static_cast<double>(tp) / (tp + fp) : kNaN;
}

double BinaryMetrics::f1() const {
  if (!f1_defined()) return kNaN;
  const double t = tpr(), p = ppv();
  return 2.0 * t * p / (t + p);
}

std::vector<uint8_t> auto_label_ground(const PointFrame& frame, int k, double normal_thresh) {
  const int n = static_cast<int>(frame.points.size());
  if (n < k + 1) {
    throw std::invalid_argument("auto_label_ground: frame smaller than k+1 points");
  }
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = frame.points[i].pos();
  KdTree tree(pts);

  std::vector<uint8_t> label(n, 1);  // 1 = obstacle
  std::vector<int> nn;
  for (int i = 0; i < n; ++i) {
    tree.knn(pts[i], k, nn);
    Vec3 mean = Vec3::Zero();
    for (int j : nn) mean += pts[j];
    mean /= static_cast<double>(nn.size());
    Mat3 cov = Mat3::Zero();
    for (int j : nn) {
      const Vec3 d = pts[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    // Rank-deficient neighborhoods stay obstacle.
    if (eig.eigenvalues()(1) < 1e-12) continue;
    const Vec3 normal = eig.eigenvectors().col(0);
    if (std::abs(normal.z()) > normal_thresh) label[i] = 0;
  }

  // One k-NN majority smoothing pass over the initial labels.
  std::vector<uint8_t> smoothed(n);
  for (int i = 0; i < n; ++i) {
    tree.knn(pts[i], k, nn);
    int obstacle = 0;
    for (int j : nn) obstacle += label[j];
    smoothed[i] = obstacle * 2 >= static_cast<int>(nn.size()) ? 1 : 0;
  }
  return smoothed;
}

BinaryMetrics ground_metrics(const GroundMask& mask, const RangeImage& img,
                             const std::vector<uint8_t>& truth_obstacle) {
  BinaryMetrics m;
  for (int c = 0; c < img.cols; ++c) {
    for (int r = 0; r < img.rows; ++r) {
      const int32_t idx = img.point_index(r, c);
      if (idx < 0) continue;
      const bool pred_obstacle = !mask.is_ground(r, c);
      const bool truth = truth_obstacle.at(idx) != 0;
      if (pred_obstacle && truth) ++m.tp;
      else if (pred_obstacle && !truth) ++m.fp;
      else if (!pred_obstacle && truth) ++m.fn;
      else ++m.tn;
    }
  }
  return m;
}

bool OrientedBox::contains(const Vec2& p) const {
  const double c = std::cos(heading), s = std::sin(heading);
  const Vec2 d = p - center;
  const double lx = c * d.x() + s * d.y();
  const double ly = -s * d.x() + c * d.y();
  return std::abs(lx) <= length / 2.0 && std::abs(ly) <= width / 2.0;
}

ClusterQuality clustering_metrics(const ClusterSet& set,
                                  const std::vector<OrientedBox>& opponent_boxes) {
  ClusterQuality q;
  q.clusters_per_car.assign(opponent_boxes.size(), 0);
  for (const Cluster& cl : set.clusters) {
    std::vector<long> inside(opponent_boxes.size(), 0);
    long outside_all = 0;
    for (const ClusterPoint& cp : cl.points) {
      const Vec2 p(cp.p.x(), cp.p.y());
      bool in_any = false;
      for (size_t b = 0; b < opponent_boxes.size(); ++b) {
        if (opponent_boxes[b].contains(p)) {
          ++inside[b];
          in_any = true;
        }
      }
      if (!in_any) ++outside_all;
    }
    const long total = static_cast<long>(cl.points.size());
    bool in_some = false;
    for (size_t b = 0; b < opponent_boxes.size(); ++b) {
      if (inside[b] == total && total > 0) ++q.clusters_per_car[b];
      if (inside[b] > 0) in_some = true;
    }
    if (in_some && outside_all > 0) ++q.mixed_clusters;
  }
  return q;
}

int RangeHistogram::bin_of(double x) const {
  const int b = static_cast<int>(std::floor((x - min_edge) / bin_width));
  return (b < 0 || b >= bins()) ? -1 : b;
}

double RangeHistogram::value(int b) const {
  return defined(b) ? static_cast<double>(numer[b]) / denom[b] : kNaN;
}

DetectionProbabilityAccumulator::DetectionProbabilityAccumulator(double min_edge,
                                                                 double max_edge,
                                                                 double bin_width,
                                                                 double match_radius)
    : match_radius_(match_radius) {
  const int n = std::max(1, static_cast<int>(std::ceil((max_edge - min_edge) / bin_width)));
  for (RangeHistogram* h : {&tpr_, &fp_}) {
    h->min_edge = min_edge;
    h->bin_width = bin_width;
    h->numer.assign(n, 0);
    h->denom.assign(n, 0);
  }
}

void DetectionProbabilityAccumulator::add_frame(const EgoPose& ego,
                                                const std::vector<Vec2>& truth_positions,
                                                const std::vector<Detection>& detections) {
  ++frames_;
  std::vector<char> det_matched(detections.size(), 0);
  for (const Vec2& tp : truth_positions) {
    const double lon = ego.to_vehicle(tp).x();
    const int b = tpr_.bin_of(lon);
    bool hit = false;
    for (size_t d = 0; d < detections.size(); ++d) {
      if ((Vec2(detections[d].x, detections[d].y) - tp).norm() < match_radius_) {
        det_matched[d] = 1;
        hit = true;
      }
    }
    if (b >= 0) {
      ++tpr_.denom[b];
      if (hit) ++tpr_.numer[b];
    }
  }
  for (size_t d = 0; d < detections.size(); ++d) {
    if (det_matched[d]) continue;
    const double lon = ego.to_vehicle({detections[d].x, detections[d].y}).x();
    const int b = fp_.bin_of(lon);
    if (b >= 0) ++fp_.numer[b];
  }
  // False positives normalize over the total number of scans.
  for (long& d : fp_.denom) ++d;
}

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) return kNaN;
  std::sort(samples.begin(), samples.end());
  const double pos = q / 100.0 * (static_cast<double>(samples.size()) - 1.0);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, samples.size() - 1);
  const double f = pos - static_cast<double>(lo);
  return samples[lo] * (1.0 - f) + samples[hi] * f;
}

ErrorStats error_stats(const std::vector<double>& samples) {
  ErrorStats st;
  st.n = static_cast<long>(samples.size());
  if (samples.empty()) return st;
  for (double v : samples) {
    st.mean += v;
    st.mean_abs += std::abs(v);
  }
  st.mean /= static_cast<double>(st.n);
  st.mean_abs /= static_cast<double>(st.n);
  st.p25 = percentile(samples, 25.0);
  st.p75 = percentile(samples, 75.0);
  st.p95 = percentile(samples, 95.0);
  return st;
}

void TrackingErrorAccumulator::add_frame(uint64_t stamp_ns, const EgoPose& ego,
                                         const std::vector<TruthState>& truth,
                                         const std::vector<TrackSnapshot>& tracks) {
  for (const TruthState& ts : truth) {
    const TrackSnapshot* best = nullptr;
    double best_d = match_radius_;
    for (const TrackSnapshot& tr : tracks) {
      const double d = (Vec2(tr.state.x, tr.state.y) - ts.pos).norm();
      if (d < best_d) {
        best_d = d;
        best = &tr;
      }
    }
    if (!best) continue;
    TrackErrorSample s;
    s.stamp_ns = stamp_ns;
    s.truth_id = ts.id;
    s.track_id = best->id;
    s.ex_map = best->state.x - ts.pos.x();
    s.ey_map = best->state.y - ts.pos.y();
    const Vec2 te = ego.to_vehicle(ts.pos);
    const Vec2 me = ego.to_vehicle({best->state.x, best->state.y});
    s.ex_ego = me.x() - te.x();
    s.ey_ego = me.y() - te.y();
    s.ev = best->state.v - ts.v;
    s.ephi = angle_diff(best->state.phi, ts.heading);
    samples_.push_back(s);
  }
}

std::vector<double> TrackingErrorAccumulator::channel(double TrackErrorSample::* field) const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const TrackErrorSample& s : samples_) out.push_back(s.*field);
  return out;
}

}  // namespace lvt
