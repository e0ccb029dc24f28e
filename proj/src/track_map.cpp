#include "lvt/track_map.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lvt {

namespace {

struct NearestSegment {
  int index = -1;
  double dist2 = std::numeric_limits<double>::max();
  double t = 0.0;  // parameter along the segment, [0, 1]
};

NearestSegment nearest_centerline_segment(const Vec2& p, const TrackMapModel& map) {
  NearestSegment best;
  for (size_t i = 0; i + 1 < map.centerline.size(); ++i) {
    const Vec2& a = map.centerline[i];
    const Vec2& b = map.centerline[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double d2 = (p - (a + t * ab)).squaredNorm();
    // Strict comparison keeps the lowest-arclength segment on ties; a query
    // exactly on a shared vertex therefore resolves to the earlier segment's
    // endpoint, whose tangent below is taken from the following segment.
    if (d2 < best.dist2 - 1e-12) {
      best = {static_cast<int>(i), d2, t};
    }
  }
  return best;
}

int locate_arc_segment(const std::vector<double>& arc, double s) {
  // Largest i with arc[i] <= s (s already wrapped).
  int lo = 0, hi = static_cast<int>(arc.size()) - 1;
  while (lo + 1 < hi) {
    const int mid = (lo + hi) / 2;
    (arc[mid] <= s ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

void TrackMapModel::validate() const {
  if (centerline.size() < 3 || centerline.size() != arclength.size()) {
    throw std::invalid_argument("TrackMapModel: malformed centerline");
  }
  if ((centerline.front() - centerline.back()).norm() > 1e-9) {
    throw std::invalid_argument("TrackMapModel: centerline must be closed");
  }
  if (inner.size() < 4 || outer.size() < 4) {
    throw std::invalid_argument("TrackMapModel: boundaries must be closed polygons");
  }
  for (const Vec2& p : centerline) {
    if (!inside_track(p)) {
      throw std::invalid_argument("TrackMapModel: centerline leaves the boundary annulus");
    }
  }
}

Vec2 TrackMapModel::centerline_point(double s) const {
  const double total = total_length();
  s = std::fmod(s, total);
  if (s < 0.0) s += total;
  const int i = locate_arc_segment(arclength, s);
  const double seg = arclength[i + 1] - arclength[i];
  const double t = seg > 0.0 ? (s - arclength[i]) / seg : 0.0;
  return centerline[i] + t * (centerline[i + 1] - centerline[i]);
}

double TrackMapModel::heading_at(double s) const {
  const double total = total_length();
  s = std::fmod(s, total);
  if (s < 0.0) s += total;
  const int i = locate_arc_segment(arclength, s);
  const Vec2 d = centerline[i + 1] - centerline[i];
  return std::atan2(d.y(), d.x());
}

Vec2 TrackMapModel::normal_at(double s) const {
  const double h = heading_at(s);
  return {-std::sin(h), std::cos(h)};
}

bool TrackMapModel::inside_track(const Vec2& p) const {
  return point_in_polygon(p, outer) && !point_in_polygon(p, inner);
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

double centerline_heading(const Vec2& p_map, const TrackMapModel& map) {
  const NearestSegment ns = nearest_centerline_segment(p_map, map);
  if (ns.index < 0) throw std::invalid_argument("centerline_heading: empty centerline");
  int i = ns.index;
  // On the end vertex of a segment, use the following segment's tangent.
  if (ns.t >= 1.0 && i + 2 < static_cast<int>(map.centerline.size())) ++i;
  const Vec2 d = map.centerline[i + 1] - map.centerline[i];
  return wrap_angle(std::atan2(d.y(), d.x()));
}

double project_to_centerline(const Vec2& p_map, const TrackMapModel& map) {
  const NearestSegment ns = nearest_centerline_segment(p_map, map);
  if (ns.index < 0) throw std::invalid_argument("project_to_centerline: empty centerline");
  const double seg = map.arclength[ns.index + 1] - map.arclength[ns.index];
  return map.arclength[ns.index] + ns.t * seg;
}

}  // namespace lvt
