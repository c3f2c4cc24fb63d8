#pragma once

#include <cmath>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "sitetrack/frame.hpp"
#include "sitetrack/motion_state.hpp"

namespace sitetrack {

/// Triangulated landmark in SLAM (world) coordinates. Positions are fixed once
/// created; only the camera pose is optimized.
struct MapPoint {
  Point3 position = Point3::Zero();
  Descriptor descriptor{};
  int observations = 1;
  int last_seen_keyframe = 0;
  // Provenance for audits; never read by the tracker itself.
  std::int64_t origin_hint = -1;
  int created_frame = 0;
};

struct TrackingConfig {
  MarThreshold tau_mar{};
  ClassifierParams classifier{};

  // 95% chi-square quantiles for 2 and 3 DoF residuals.
  double huber_delta_mono = std::sqrt(5.991);
  double huber_delta_stereo = std::sqrt(7.815);
  int max_iterations = 30;
  double step_norm_epsilon = 1e-8;

  double match_window = 40.0;        // pixels
  int descriptor_max_distance = 50;  // Hamming bits
  int min_inliers = 15;

  int keyframe_interval = 5;   // every K-th tracked frame becomes a keyframe
  int map_point_max_age = 30;  // prune after this many keyframes unobserved
  double scale_factor = 1.2;   // per-level measurement sigma growth

  void validate() const;  // throws ConfigInvalid
};

enum class TrackStatus { Tracked, Lost };

/// Constant velocity model: reapplies the last inter-frame motion.
Pose predict_pose(const Pose& prev, const Pose& prev_prev);

/// One map-point-to-feature correspondence fed to the pose solver.
struct TrackMatch {
  Point3 world = Point3::Zero();
  double u_l = 0.0;
  double v_l = 0.0;
  std::optional<double> u_r;  // stereo observation when present
  int scale_level = 0;
  std::size_t map_index = 0;
  std::size_t feature_index = 0;
};

/// Projects map points with the predicted pose and matches them to unmasked
/// features by descriptor distance, mutual best, within match_window pixels.
/// Features whose pixel is masked are excluded.
std::vector<TrackMatch> match_map_points(std::span<const MapPoint> map_points,
                                         const FrameObservation& frame, const Pose& predicted,
                                         const OcclusionMask& mask, const TrackingConfig& cfg);

/// Reprojection residual and its Jacobian with respect to a left-multiplied
/// twist increment on the camera-from-world transform. Mono residuals use the
/// first two rows.
struct ResidualEval {
  Eigen::Vector3d residual = Eigen::Vector3d::Zero();
  Eigen::Matrix<double, 3, 6> jacobian = Eigen::Matrix<double, 3, 6>::Zero();
  int dims = 0;        // 2 mono, 3 stereo
  bool valid = false;  // false when the point is behind the camera
};
ResidualEval evaluate_match_residual(const CameraIntrinsics& K, const TrackMatch& match,
                                     const Pose& camera_from_world);

struct SolveStats {
  Pose pose;  // camera-in-world
  int inlier_count = 0;
  int iterations = 0;
  double final_cost = 0.0;
  /// Per-match flag: final squared Mahalanobis error below the Huber boundary.
  std::vector<char> inlier_mask;
};

/// Iteratively reweighted Gauss-Newton over the 6-DoF camera pose, Huber robust,
/// holding the 3D points fixed. init and result are camera-in-world transforms.
/// Throws InsufficientMatches and SolverDiverged.
SolveStats solve_motion_only_ba(std::span<const TrackMatch> matches,
                                const CameraIntrinsics& K, const Pose& init,
                                const TrackingConfig& cfg);

/// Masking policy of a pipeline variant.
struct PipelinePolicy {
  enum class Mask { Hierarchical, BBoxAlways, PixelwiseAlways, None };
  Mask mask = Mask::Hierarchical;
  /// Second tracking round with motion-state classification and unmasking of
  /// static objects.
  bool classify_and_unmask = true;
};

struct TrackingResult {
  Pose pose;         // final camera-in-world pose
  Pose round1_pose;  // pose after the first (background-only) round
  MaskTier mask_tier = MaskTier::BBox;
  double mar = 0.0;          // masked area ratio of the initial mask
  double refined_mar = 0.0;  // after unmasking static objects
  std::map<int, MotionState> motion_states;
  int inlier_count = 0;
  int round1_inlier_count = 0;
  int match_count = 0;
  int round1_match_count = 0;
  TrackStatus status = TrackStatus::Lost;
  /// Features backing the final solve's inliers, for mask audits.
  std::vector<std::size_t> inlier_feature_indices;
};

/// Sequential two-round coarse-to-fine ego-motion tracker. One instance per
/// sequence; frame t+1 depends on frame t.
class Tracker {
 public:
  explicit Tracker(TrackingConfig cfg, PipelinePolicy policy = {});

  TrackingResult track_frame(const FrameObservation& frame);

  const std::vector<MapPoint>& map_points() const { return map_; }
  int frame_count() const { return frame_index_; }
  int keyframe_count() const { return keyframe_counter_; }

 private:
  OcclusionMask build_mask(const FrameObservation& frame) const;
  TrackingResult bootstrap(const FrameObservation& frame, OcclusionMask mask);
  void maintain_map(const FrameObservation& frame, const Pose& pose, const OcclusionMask& mask,
                    std::span<const TrackMatch> matches);
  void push_history(const FrameObservation& frame, const Pose& pose);

  struct HistoryEntry {
    FrameObservation frame;
    Pose pose;  // stored round-2 pose
  };

  TrackingConfig cfg_;
  PipelinePolicy policy_;
  std::vector<MapPoint> map_;
  std::deque<HistoryEntry> history_;
  Pose prev_pose_;
  Pose prev_prev_pose_;
  Pose last_good_pose_;
  bool initialized_ = false;
  bool last_was_lost_ = false;
  int frame_index_ = 0;
  int tracked_frames_ = 0;
  int keyframe_counter_ = 0;
};

}  // namespace sitetrack
