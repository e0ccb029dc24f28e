#pragma once

#include "lvt/geometry.hpp"

namespace lvt {

/// Closed racetrack map: centerline polyline with cumulative arclength and
/// the inner/outer boundary polygons.
struct TrackMapModel {
  std::vector<Vec2> centerline;   // closed: first == last
  std::vector<double> arclength;  // cumulative, arclength[0] = 0
  std::vector<Vec2> inner;        // closed polygon
  std::vector<Vec2> outer;        // closed polygon

  double total_length() const { return arclength.empty() ? 0.0 : arclength.back(); }

  /// Point on the centerline at arclength s (wrapped to the lap length).
  Vec2 centerline_point(double s) const;
  /// Tangent heading of the centerline at arclength s.
  double heading_at(double s) const;
  /// Left-pointing unit normal at arclength s.
  Vec2 normal_at(double s) const;

  /// Inside the outer boundary and outside the inner one.
  bool inside_track(const Vec2& p) const;

  void validate() const;  // throws std::invalid_argument on malformed geometry
};

/// Tangent direction (direction of increasing arclength) of the centerline
/// segment nearest to p, in (-pi, pi]. Ties resolve to the lowest-arclength
/// segment; a query on a vertex takes the following segment.
double centerline_heading(const Vec2& p_map, const TrackMapModel& map);

/// Arclength of the centerline point nearest to p.
double project_to_centerline(const Vec2& p_map, const TrackMapModel& map);

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);

}  // namespace lvt
