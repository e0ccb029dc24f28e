#pragma once

#include "lvt/detect.hpp"
#include "lvt/track_map.hpp"

#include <deque>

namespace lvt {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Constant velocity and turn rate state {x, y, v, phi, omega}.
struct CvtrState {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;      // m/s, kept >= 0
  double phi = 0.0;    // course, (-pi, pi]
  double omega = 0.0;  // rad/s

  Vec5 vec() const;
  static CvtrState from_vec(const Vec5& v);
  /// Wraps phi and folds a negative speed into phi + pi.
  void normalize();
};

struct PredictResult {
  CvtrState state;
  Mat5 cov;
  Mat5 jacobian;
};

/// Closed-form coordinated-turn step over dt with process noise dt * diag(q).
/// Below omega_eps the exact map switches to its second-order series (straight
/// motion with curvature correction). Throws std::invalid_argument for dt < 0.
PredictResult ct_predict(const CvtrState& state, const Mat5& cov, double dt,
                         const Vec5& q_diag, double omega_eps = 1e-6);

/// Transition Jacobian of the ct_predict state map.
Mat5 ct_jacobian(const CvtrState& state, double dt, double omega_eps = 1e-6);

struct UpdateResult {
  CvtrState state;
  Mat5 cov;
  Vec2 innovation = Vec2::Zero();
  Mat2 innovation_cov = Mat2::Zero();  // S
  bool ok = true;                      // false when S is singular
};

/// Position-only Kalman update (H = [I2 0]); the measured heading is never a
/// filter input.
UpdateResult ekf_update(const CvtrState& state, const Mat5& cov, const Vec2& z,
                        const Vec2& r_diag);

/// Squared Mahalanobis distance of z under the predicted measurement
/// distribution; +inf when S is singular.
double gate_distance2(const CvtrState& state, const Mat5& cov, const Vec2& z,
                      const Vec2& r_diag);

enum class TrackStatus { kTentative, kConfirmed, kDead };

struct TrackerConfig {
  Vec5 q_diag = (Vec5() << 0.005, 0.005, 0.5, 0.005, 0.0005).finished();
  Vec2 r_diag = Vec2(5.0, 5.0);
  double gate = 9.21;  // chi-square 99th percentile, 2 dof
  int window = 20;     // N
  int confirm_hits = 6;   // M_c
  int delete_hits = 5;    // M_e
  double coast_timeout_s = 1.0;
  double omega_eps = 1e-6;
  double init_v_var = 25.0;
  double init_phi_var = (kPi / 8.0) * (kPi / 8.0);
  double init_omega_var = 0.25;
};

struct Track {
  int id = 0;
  CvtrState state;
  Mat5 cov = Mat5::Identity();
  TrackStatus status = TrackStatus::kTentative;
  std::deque<bool> history;  // newest at the back, bounded by window
  uint64_t last_update_ns = 0;  // state epoch
  uint64_t last_hit_ns = 0;     // last associated measurement

  int hits_in_history() const;
};

/// M/N transition rule shared by the tracker and the lifecycle tests: full
/// history with hits < delete_hits kills the track; hits >= confirm_hits
/// confirms a tentative one.
TrackStatus lifecycle_step(TrackStatus current, const std::deque<bool>& history,
                           int window, int confirm_hits, int delete_hits);

struct TrackSnapshot {
  int id = 0;
  CvtrState state;
  Mat5 cov;
  uint64_t stamp_ns = 0;
};

/// Variable-step multi-target tracker: Mahalanobis-gated Munkres association,
/// position-only EKF updates, M/N lifecycle. Owns mutable state; callers
/// serialize access.
class Tracker {
 public:
  Tracker(const TrackerConfig& config, const TrackMapModel* map);

  /// Runs one predict/associate/update/lifecycle cycle. Returns false (and
  /// counts the frame) when stamp is older than the previous step.
  bool step(const std::vector<Detection>& detections, uint64_t stamp_ns);

  /// Confirmed tracks predicted (without mutation) to query_ns. Throws
  /// std::invalid_argument if query_ns precedes the last step.
  std::vector<TrackSnapshot> output(uint64_t query_ns) const;

  const std::vector<Track>& tracks() const { return tracks_; }
  int dropped_frames() const { return dropped_frames_; }
  uint64_t last_stamp_ns() const { return last_stamp_ns_; }

 private:
  TrackerConfig cfg_;
  const TrackMapModel* map_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  uint64_t last_stamp_ns_ = 0;
  bool has_stepped_ = false;
  int dropped_frames_ = 0;
};

}  // namespace lvt
