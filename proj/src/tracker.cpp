#include "lvt/tracker.hpp"

#include "lvt/munkres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lvt {

Vec5 CvtrState::vec() const {
  return (Vec5() << x, y, v, phi, omega).finished();
}

CvtrState CvtrState::from_vec(const Vec5& s) {
  return {s(0), s(1), s(2), s(3), s(4)};
}

void CvtrState::normalize() {
  if (v < 0.0) {
    v = -v;
    phi += kPi;
  }
  phi = wrap_angle(phi);
}

Mat5 ct_jacobian(const CvtrState& s, double dt, double omega_eps) {
  Mat5 F = Mat5::Identity();
  const double c1 = std::cos(s.phi), s1 = std::sin(s.phi);
  if (std::abs(s.omega) > omega_eps) {
    const double w = s.omega;
    const double phi2 = s.phi + w * dt;
    const double c2 = std::cos(phi2), s2 = std::sin(phi2);
    F(0, 2) = (s2 - s1) / w;
    F(0, 3) = (s.v / w) * (c2 - c1);
    F(0, 4) = (s.v * dt * c2) / w - s.v * (s2 - s1) / (w * w);
    F(1, 2) = (c1 - c2) / w;
    F(1, 3) = (s.v / w) * (s2 - s1);
    F(1, 4) = (s.v * dt * s2) / w + s.v * (c2 - c1) / (w * w);
  } else {
    const double w = s.omega;
    F(0, 2) = dt * c1 - 0.5 * w * dt * dt * s1;
    F(0, 3) = -s.v * dt * s1 - 0.5 * s.v * w * dt * dt * c1;
    F(0, 4) = -0.5 * s.v * dt * dt * s1;
    F(1, 2) = dt * s1 + 0.5 * w * dt * dt * c1;
    F(1, 3) = s.v * dt * c1 - 0.5 * s.v * w * dt * dt * s1;
    F(1, 4) = 0.5 * s.v * dt * dt * c1;
  }
  F(3, 4) = dt;
  return F;
}

PredictResult ct_predict(const CvtrState& state, const Mat5& cov, double dt,
                         const Vec5& q_diag, double omega_eps) {
  if (dt < 0.0) throw std::invalid_argument("ct_predict: dt must be >= 0");

  PredictResult out;
  out.state = state;
  const double c1 = std::cos(state.phi), s1 = std::sin(state.phi);
  if (std::abs(state.omega) > omega_eps) {
    const double w = state.omega;
    const double phi2 = state.phi + w * dt;
    out.state.x = state.x + (state.v / w) * (std::sin(phi2) - s1);
    out.state.y = state.y - (state.v / w) * (std::cos(phi2) - c1);
    out.state.phi = wrap_angle(phi2);
  } else {
    const double curv = 0.5 * state.v * state.omega * dt * dt;
    out.state.x = state.x + state.v * dt * c1 - curv * s1;
    out.state.y = state.y + state.v * dt * s1 + curv * c1;
    out.state.phi = wrap_angle(state.phi + state.omega * dt);
  }

  out.jacobian = ct_jacobian(state, dt, omega_eps);
  out.cov = out.jacobian * cov * out.jacobian.transpose();
  out.cov.diagonal() += dt * q_diag;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

namespace {

Mat2 innovation_cov(const Mat5& cov, const Vec2& r_diag) {
  Mat2 S = cov.topLeftCorner<2, 2>();
  S(0, 0) += r_diag(0);
  S(1, 1) += r_diag(1);
  return S;
}

}  // namespace

UpdateResult ekf_update(const CvtrState& state, const Mat5& cov, const Vec2& z,
                        const Vec2& r_diag) {
  UpdateResult out;
  out.state = state;
  out.cov = cov;
  out.innovation = z - Vec2(state.x, state.y);
  out.innovation_cov = innovation_cov(cov, r_diag);

  const double det = out.innovation_cov.determinant();
  if (!(std::abs(det) > 1e-30)) {
    out.ok = false;
    return out;
  }
  const Mat2 s_inv = out.innovation_cov.inverse();
  const Eigen::Matrix<double, 5, 2> K = cov.leftCols<2>() * s_inv;

  const Vec5 updated = state.vec() + K * out.innovation;
  out.state = CvtrState::from_vec(updated);
  out.state.normalize();

  Mat5 ikh = Mat5::Identity();
  ikh.leftCols<2>() -= K;
  out.cov = ikh * cov;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

double gate_distance2(const CvtrState& state, const Mat5& cov, const Vec2& z,
                      const Vec2& r_diag) {
  const Mat2 S = innovation_cov(cov, r_diag);
  const double det = S.determinant();
  if (!(std::abs(det) > 1e-30)) return std::numeric_limits<double>::infinity();
  const Vec2 nu = z - Vec2(state.x, state.y);
  return nu.dot(S.inverse() * nu);
}

int Track::hits_in_history() const {
  return static_cast<int>(std::count(history.begin(), history.end(), true));
}

TrackStatus lifecycle_step(TrackStatus current, const std::deque<bool>& history,
                           int window, int confirm_hits, int delete_hits) {
  const int hits = static_cast<int>(std::count(history.begin(), history.end(), true));
  if (static_cast<int>(history.size()) >= window && hits < delete_hits) {
    return TrackStatus::kDead;
  }
  if (current == TrackStatus::kTentative && hits >= confirm_hits) {
    return TrackStatus::kConfirmed;
  }
  return current;
}

Tracker::Tracker(const TrackerConfig& config, const TrackMapModel* map)
    : cfg_(config), map_(map) {
  if (!(cfg_.delete_hits <= cfg_.confirm_hits && cfg_.confirm_hits <= cfg_.window)) {
    throw std::invalid_argument("TrackerConfig: need M_e <= M_c <= N");
  }
  if ((cfg_.q_diag.array() <= 0.0).any() || (cfg_.r_diag.array() <= 0.0).any()) {
    throw std::invalid_argument("TrackerConfig: noise entries must be positive");
  }
}

bool Tracker::step(const std::vector<Detection>& detections, uint64_t stamp_ns) {
  if (has_stepped_ && stamp_ns < last_stamp_ns_) {
    ++dropped_frames_;
    return false;
  }

  for (Track& tr : tracks_) {
    const double dt = static_cast<double>(stamp_ns - tr.last_update_ns) * 1e-9;
    const PredictResult pr = ct_predict(tr.state, tr.cov, dt, cfg_.q_diag, cfg_.omega_eps);
    tr.state = pr.state;
    tr.cov = pr.cov;
    tr.last_update_ns = stamp_ns;
  }

  const int nt = static_cast<int>(tracks_.size());
  const int nd = static_cast<int>(detections.size());
  Eigen::MatrixXd costs(nt, nd);
  for (int t = 0; t < nt; ++t) {
    for (int d = 0; d < nd; ++d) {
      costs(t, d) = gate_distance2(tracks_[t].state, tracks_[t].cov,
                                   {detections[d].x, detections[d].y}, cfg_.r_diag);
    }
  }
  const AssignmentResult assign = solve_assignment(costs, cfg_.gate);

  auto push_history = [&](Track& tr, bool hit) {
    tr.history.push_back(hit);
    while (static_cast<int>(tr.history.size()) > cfg_.window) tr.history.pop_front();
  };

  for (const auto& [t, d] : assign.pairs) {
    Track& tr = tracks_[t];
    const UpdateResult up =
        ekf_update(tr.state, tr.cov, {detections[d].x, detections[d].y}, cfg_.r_diag);
    if (up.ok) {
      tr.state = up.state;
      tr.cov = up.cov;
      push_history(tr, true);
      tr.last_hit_ns = stamp_ns;
    } else {
      push_history(tr, false);
    }
  }
  for (int t : assign.unassigned_rows) push_history(tracks_[t], false);

  for (int d : assign.unassigned_cols) {
    Track tr;
    tr.id = next_id_++;
    tr.state.x = detections[d].x;
    tr.state.y = detections[d].y;
    tr.state.v = 0.0;
    tr.state.phi = map_ ? centerline_heading({detections[d].x, detections[d].y}, *map_) : 0.0;
    tr.state.omega = 0.0;
    tr.cov = Mat5::Zero();
    tr.cov.diagonal() << cfg_.r_diag(0), cfg_.r_diag(1), cfg_.init_v_var, cfg_.init_phi_var,
        cfg_.init_omega_var;
    tr.status = TrackStatus::kTentative;
    tr.history.push_back(true);
    tr.last_update_ns = stamp_ns;
    tr.last_hit_ns = stamp_ns;
    tracks_.push_back(std::move(tr));
  }

  for (Track& tr : tracks_) {
    tr.status = lifecycle_step(tr.status, tr.history, cfg_.window, cfg_.confirm_hits,
                               cfg_.delete_hits);
    const double coast = static_cast<double>(stamp_ns - tr.last_hit_ns) * 1e-9;
    if (coast > cfg_.coast_timeout_s) tr.status = TrackStatus::kDead;
  }
  std::erase_if(tracks_, [](const Track& tr) { return tr.status == TrackStatus::kDead; });

  last_stamp_ns_ = stamp_ns;
  has_stepped_ = true;
  return true;
}

std::vector<TrackSnapshot> Tracker::output(uint64_t query_ns) const {
  if (has_stepped_ && query_ns < last_stamp_ns_) {
    throw std::invalid_argument("Tracker::output: query precedes the last step");
  }
  std::vector<TrackSnapshot> out;
  for (const Track& tr : tracks_) {
    if (tr.status != TrackStatus::kConfirmed) continue;
    const double dt = static_cast<double>(query_ns - tr.last_update_ns) * 1e-9;
    const PredictResult pr = ct_predict(tr.state, tr.cov, dt, cfg_.q_diag, cfg_.omega_eps);
    out.push_back({tr.id, pr.state, pr.cov, query_ns});
  }
  return out;
}

}  // namespace lvt
