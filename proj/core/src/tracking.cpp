#include "sitetrack/tracking.hpp"

#include <algorithm>

namespace sitetrack {

void TrackingConfig::validate() const {
  tau_mar.validate();
  classifier.validate();
  if (!(huber_delta_mono > 0.0) || !(huber_delta_stereo > 0.0)) {
    throw ConfigInvalid("huber deltas must be positive");
  }
  if (max_iterations < 1) throw ConfigInvalid("max_iterations must be positive");
  if (!(step_norm_epsilon > 0.0)) throw ConfigInvalid("step_norm_epsilon must be positive");
  if (!(match_window > 0.0)) throw ConfigInvalid("match_window must be positive");
  if (descriptor_max_distance < 0 || descriptor_max_distance > 256) {
    throw ConfigInvalid("descriptor_max_distance must be in [0, 256]");
  }
  if (min_inliers < 6) throw ConfigInvalid("min_inliers must be at least 6");
  if (keyframe_interval < 1) throw ConfigInvalid("keyframe_interval must be positive");
  if (map_point_max_age < 1) throw ConfigInvalid("map_point_max_age must be positive");
  if (!(scale_factor > 1.0)) throw ConfigInvalid("scale_factor must exceed 1");
}

Pose predict_pose(const Pose& prev, const Pose& prev_prev) {
  return prev * (prev_prev.inverse() * prev);
}

namespace {

// Coarse bucket index over the image for window queries.
struct FeatureGrid {
  static constexpr int kCell = 32;
  int cols = 0;
  int rows = 0;
  std::vector<std::vector<std::size_t>> cells;

  FeatureGrid(const FrameObservation& frame, const OcclusionMask& mask) {
    cols = (frame.intrinsics.width + kCell - 1) / kCell;
    rows = (frame.intrinsics.height + kCell - 1) / kCell;
    cells.resize(static_cast<std::size_t>(cols) * rows);
    for (std::size_t i = 0; i < frame.features.size(); ++i) {
      const StereoFeature& f = frame.features[i];
      if (mask.test_pixel_of(f.u_l, f.v_l)) continue;  // Eq. 5 contract
      const int cu = std::clamp(static_cast<int>(f.u_l) / kCell, 0, cols - 1);
      const int cv = std::clamp(static_cast<int>(f.v_l) / kCell, 0, rows - 1);
      cells[static_cast<std::size_t>(cv) * cols + cu].push_back(i);
    }
  }

  template <typename Fn>
  void for_each_in_window(double u, double v, double window, Fn&& fn) const {
    const int cu0 = std::clamp(static_cast<int>((u - window)) / kCell, 0, cols - 1);
    const int cu1 = std::clamp(static_cast<int>((u + window)) / kCell, 0, cols - 1);
    const int cv0 = std::clamp(static_cast<int>((v - window)) / kCell, 0, rows - 1);
    const int cv1 = std::clamp(static_cast<int>((v + window)) / kCell, 0, rows - 1);
    for (int cv = cv0; cv <= cv1; ++cv) {
      for (int cu = cu0; cu <= cu1; ++cu) {
        for (std::size_t i : cells[static_cast<std::size_t>(cv) * cols + cu]) fn(i);
      }
    }
  }
};

}  // namespace

std::vector<TrackMatch> match_map_points(std::span<const MapPoint> map_points,
                                         const FrameObservation& frame, const Pose& predicted,
                                         const OcclusionMask& mask, const TrackingConfig& cfg) {
  const CameraIntrinsics& K = frame.intrinsics;
  const FeatureGrid grid(frame, mask);
  const Pose camera_from_world = predicted.inverse();

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  struct Candidate {
    std::size_t feature = kNone;
    int dist = 0;
  };
  std::vector<Candidate> best_for_point(map_points.size());
  std::vector<int> best_dist_for_feature(frame.features.size(),
                                         cfg.descriptor_max_distance + 1);
  std::vector<std::size_t> best_point_for_feature(frame.features.size(), kNone);

  for (std::size_t m = 0; m < map_points.size(); ++m) {
    const Point3 q = camera_from_world * map_points[m].position;
    if (q.z() <= 1e-3) continue;
    const double inv_z = 1.0 / q.z();
    const double u = K.fx * q.x() * inv_z + K.cx;
    const double v = K.fy * q.y() * inv_z + K.cy;
    if (u < -cfg.match_window || u >= K.width + cfg.match_window) continue;
    if (v < -cfg.match_window || v >= K.height + cfg.match_window) continue;

    int best = cfg.descriptor_max_distance + 1;
    std::size_t best_idx = kNone;
    grid.for_each_in_window(u, v, cfg.match_window, [&](std::size_t fi) {
      const StereoFeature& f = frame.features[fi];
      if (std::abs(f.u_l - u) > cfg.match_window || std::abs(f.v_l - v) > cfg.match_window) return;
      const int dist = hamming_distance(map_points[m].descriptor, f.descriptor);
      if (dist < best) {
        best = dist;
        best_idx = fi;
      }
    });
    if (best_idx == kNone) continue;
    best_for_point[m] = {best_idx, best};
    if (best < best_dist_for_feature[best_idx]) {
      best_dist_for_feature[best_idx] = best;
      best_point_for_feature[best_idx] = m;
    }
  }

  std::vector<TrackMatch> matches;
  for (std::size_t m = 0; m < map_points.size(); ++m) {
    const Candidate& c = best_for_point[m];
    if (c.feature == kNone || best_point_for_feature[c.feature] != m) continue;
    const StereoFeature& f = frame.features[c.feature];
    TrackMatch match;
    match.world = map_points[m].position;
    match.u_l = f.u_l;
    match.v_l = f.v_l;
    match.u_r = f.u_r;
    match.scale_level = f.scale_level;
    match.map_index = m;
    match.feature_index = c.feature;
    matches.push_back(match);
  }
  return matches;
}

}  // namespace sitetrack
