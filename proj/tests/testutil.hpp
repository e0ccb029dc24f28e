#pragma once

#include "lvt/detect.hpp"
#include "lvt/sim.hpp"
#include "lvt/tracker.hpp"

#include <functional>
#include <numeric>
#include <random>

namespace lvt::testutil {

/// Forward-Euler integration of the continuous coordinated-turn model,
/// independent of the closed-form discretization it checks.
inline CvtrState euler_cvtr(const CvtrState& s0, double dt, int substeps) {
  CvtrState s = s0;
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    const double dx = s.v * std::cos(s.phi);
    const double dy = s.v * std::sin(s.phi);
    s.x += h * dx;
    s.y += h * dy;
    s.phi += h * s.omega;
  }
  s.phi = wrap_angle(s.phi);
  return s;
}

/// Substep count that keeps the Euler truncation bound (dt*h/2 * v*omega)
/// an order of magnitude below tol, never below the 1000-substep floor.
inline int euler_substeps(const CvtrState& s, double dt, double tol) {
  const double rate = std::abs(s.v * s.omega);
  if (rate <= 0.0) return 1000;
  const double needed = dt * dt * rate / (2.0 * 0.1 * tol);
  return std::max(1000, static_cast<int>(std::ceil(needed)));
}

/// Central finite differences of the ct_predict state map (phi row wrapped).
inline Mat5 numeric_jacobian(const CvtrState& s, double dt, double omega_eps = 1e-6) {
  Mat5 F;
  const Vec5 x0 = s.vec();
  const Mat5 cov = Mat5::Identity();
  const Vec5 q = Vec5::Ones();
  for (int j = 0; j < 5; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x0(j)));
    Vec5 xp = x0, xm = x0;
    xp(j) += h;
    xm(j) -= h;
    const Vec5 fp = ct_predict(CvtrState::from_vec(xp), cov, dt, q, omega_eps).state.vec();
    const Vec5 fm = ct_predict(CvtrState::from_vec(xm), cov, dt, q, omega_eps).state.vec();
    Vec5 diff = fp - fm;
    diff(3) = angle_diff(fp(3), fm(3));
    F.col(j) = diff / (2.0 * h);
  }
  return F;
}

/// Brute-force single-linkage Euclidean clustering (the segmentation oracle).
inline std::vector<int> single_linkage(const std::vector<Vec3>& pts, double thresh) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  const double t2 = thresh * thresh;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((pts[i] - pts[j]).squaredNorm() < t2) {
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<int> label(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (label[root] < 0) label[root] = next++;
    label[i] = label[root];
  }
  return label;
}

/// Exhaustive gated assignment: maximize matched pairs, then minimize cost.
struct BruteAssign {
  int cardinality = 0;
  double cost = 0.0;
};

inline void brute_assign_rec(const Eigen::MatrixXd& c, double gate, int row,
                             std::vector<char>& used, int card, double cost,
                             BruteAssign& best) {
  if (row == c.rows()) {
    if (card > best.cardinality ||
        (card == best.cardinality && cost < best.cost - 1e-12)) {
      best = {card, cost};
    }
    return;
  }
  brute_assign_rec(c, gate, row + 1, used, card, cost, best);  // row unassigned
  for (int col = 0; col < c.cols(); ++col) {
    if (used[col]) continue;
    const double v = c(row, col);
    if (!std::isfinite(v) || v >= gate) continue;
    used[col] = 1;
    brute_assign_rec(c, gate, row + 1, used, card + 1, cost + v, best);
    used[col] = 0;
  }
}

inline BruteAssign brute_assign(const Eigen::MatrixXd& c, double gate) {
  BruteAssign best{0, 1e300};
  std::vector<char> used(c.cols(), 0);
  brute_assign_rec(c, gate, 0, used, 0, 0.0, best);
  if (best.cardinality == 0) best.cost = 0.0;
  return best;
}

/// Samples the faces of a W x L rectangle visible from the origin, with
/// Gaussian noise; the pose-estimation ground truth generator.
inline Cluster sample_rect_cluster(const Vec2& center, double psi, const VehicleDims& dims,
                                   double spacing, double sigma, std::mt19937_64& rng,
                                   int* visible_faces = nullptr) {
  const double c = std::cos(psi), s = std::sin(psi);
  const Vec2 ex(c, s);          // length axis
  const Vec2 ey(-s, c);         // width axis
  const double l2 = dims.length / 2.0, w2 = dims.width / 2.0;

  struct Face {
    Vec2 mid_offset;
    Vec2 along;
    double half_len;
    Vec2 normal;
  };
  const Face faces[4] = {
      {ex * l2, ey, w2, ex},    // front
      {-ex * l2, ey, w2, -ex},  // rear
      {ey * w2, ex, l2, ey},    // left
      {-ey * w2, ex, l2, -ey},  // right
  };

  std::normal_distribution<double> noise(0.0, sigma);
  std::uniform_real_distribution<double> zdist(0.2, 0.9);
  Cluster cl;
  cl.id = 1;
  int nfaces = 0;
  for (const Face& f : faces) {
    const Vec2 mid = center + f.mid_offset;
    if (f.normal.dot(-mid) <= 1e-9) continue;  // back face, occluded
    ++nfaces;
    const int steps = std::max(2, static_cast<int>(f.half_len * 2.0 / spacing));
    for (int i = 0; i <= steps; ++i) {
      const double a = -f.half_len + 2.0 * f.half_len * i / steps;
      Vec2 p = mid + f.along * a;
      p.x() += noise(rng);
      p.y() += noise(rng);
      cl.points.push_back({{p.x(), p.y(), zdist(rng)}, 20.0, 0, 0});
    }
  }
  if (visible_faces) *visible_faces = nfaces;
  cl.recompute_stats();
  return cl;
}

/// Oval map whose bottom straight passes through (0, 0) heading east, so
/// vehicle-frame clusters near the origin sit beside an eastbound centerline
/// when ego = {0, 0, 0}.
inline TrackMapModel eastbound_map() {
  TrackGeometry g;
  g.straight_length = 400.0;
  g.turn_radius = 200.0;
  g.width = 30.0;
  TrackMapModel map = make_oval_map(g);
  for (Vec2& p : map.centerline) p.y() += g.turn_radius;
  for (Vec2& p : map.inner) p.y() += g.turn_radius;
  for (Vec2& p : map.outer) p.y() += g.turn_radius;
  return map;
}

}  // namespace lvt::testutil
