#include <algorithm>
#include <unordered_set>

#include "sitetrack/tracking.hpp"

namespace sitetrack {

Tracker::Tracker(TrackingConfig cfg, PipelinePolicy policy)
    : cfg_(std::move(cfg)), policy_(policy) {
  cfg_.validate();
}

OcclusionMask Tracker::build_mask(const FrameObservation& frame) const {
  const int w = frame.intrinsics.width;
  const int h = frame.intrinsics.height;
  switch (policy_.mask) {
    case PipelinePolicy::Mask::Hierarchical:
      return hierarchical_mask(frame.detections, w, h, cfg_.tau_mar);
    case PipelinePolicy::Mask::BBoxAlways:
      return rasterize_bbox_mask(frame.detections, w, h);
    case PipelinePolicy::Mask::PixelwiseAlways:
      return rasterize_pixelwise_mask(frame.detections, w, h);
    case PipelinePolicy::Mask::None:
    default:
      return OcclusionMask(w, h, MaskTier::BBox);
  }
}

TrackingResult Tracker::bootstrap(const FrameObservation& frame, OcclusionMask mask) {
  TrackingResult res;
  res.mask_tier = mask.tier();
  res.mar = masked_area_ratio(mask);
  res.refined_mar = res.mar;

  keyframe_counter_ = 1;
  for (const StereoFeature& f : frame.features) {
    if (!f.has_stereo() || f.disparity() <= kMinDisparity) continue;
    if (mask.test_pixel_of(f.u_l, f.v_l)) continue;
    MapPoint mp;
    mp.position = triangulate_stereo(frame.intrinsics, f.stereo_pixel());
    mp.descriptor = f.descriptor;
    mp.last_seen_keyframe = keyframe_counter_;
    mp.origin_hint = f.landmark_hint;
    mp.created_frame = frame_index_;
    map_.push_back(std::move(mp));
  }

  res.pose = Pose::identity();  // gauge: the first frame defines SLAM coordinates
  res.round1_pose = res.pose;
  res.inlier_count = static_cast<int>(map_.size());
  res.status = res.inlier_count >= cfg_.min_inliers ? TrackStatus::Tracked : TrackStatus::Lost;

  prev_pose_ = prev_prev_pose_ = last_good_pose_ = res.pose;
  initialized_ = true;
  last_was_lost_ = res.status == TrackStatus::Lost;
  tracked_frames_ = 1;
  push_history(frame, res.pose);
  ++frame_index_;
  return res;
}

void Tracker::push_history(const FrameObservation& frame, const Pose& pose) {
  history_.push_back({frame, pose});
  const std::size_t keep = static_cast<std::size_t>(cfg_.classifier.ref_lag_n) + 2;
  while (history_.size() > keep) history_.pop_front();
}

void Tracker::maintain_map(const FrameObservation& frame, const Pose& pose,
                           const OcclusionMask& mask, std::span<const TrackMatch> matches) {
  for (const TrackMatch& m : matches) {
    MapPoint& mp = map_[m.map_index];
    ++mp.observations;
    mp.last_seen_keyframe = keyframe_counter_;
  }

  if ((tracked_frames_ - 1) % cfg_.keyframe_interval != 0) return;
  ++keyframe_counter_;

  std::unordered_set<std::size_t> matched;
  matched.reserve(matches.size());
  for (const TrackMatch& m : matches) matched.insert(m.feature_index);

  for (std::size_t i = 0; i < frame.features.size(); ++i) {
    const StereoFeature& f = frame.features[i];
    if (matched.contains(i)) continue;
    if (!f.has_stereo() || f.disparity() <= kMinDisparity) continue;
    if (mask.test_pixel_of(f.u_l, f.v_l)) continue;
    MapPoint mp;
    mp.position = pose * triangulate_stereo(frame.intrinsics, f.stereo_pixel());
    mp.descriptor = f.descriptor;
    mp.last_seen_keyframe = keyframe_counter_;
    mp.origin_hint = f.landmark_hint;
    mp.created_frame = frame_index_;
    map_.push_back(std::move(mp));
  }

  std::erase_if(map_, [&](const MapPoint& mp) {
    return keyframe_counter_ - mp.last_seen_keyframe > cfg_.map_point_max_age;
  });
}

TrackingResult Tracker::track_frame(const FrameObservation& frame) {
  OcclusionMask mask = build_mask(frame);
  if (!initialized_) return bootstrap(frame, std::move(mask));

  TrackingResult res;
  res.mask_tier = mask.tier();
  res.mar = masked_area_ratio(mask);
  res.refined_mar = res.mar;

  // A lost frame re-predicts from the last good pose with zero velocity.
  const Pose predicted =
      last_was_lost_ ? last_good_pose_ : predict_pose(prev_pose_, prev_prev_pose_);

  std::vector<TrackMatch> matches1 = match_map_points(map_, frame, predicted, mask, cfg_);
  res.round1_match_count = static_cast<int>(matches1.size());

  Pose round1 = predicted;
  SolveStats stats1;
  bool round1_ok = false;
  if (res.round1_match_count >= cfg_.min_inliers) {
    try {
      stats1 = solve_motion_only_ba(matches1, frame.intrinsics, predicted, cfg_);
      round1 = stats1.pose;
      round1_ok = stats1.inlier_count >= cfg_.min_inliers;
    } catch (const SolverDiverged&) {
      round1_ok = false;
    }
  }
  res.round1_pose = round1;
  res.round1_inlier_count = stats1.inlier_count;

  Pose final_pose = round1;
  const SolveStats* final_stats = &stats1;
  const std::vector<TrackMatch>* final_matches = &matches1;
  res.match_count = res.round1_match_count;

  std::vector<TrackMatch> matches2;
  SolveStats stats2;
  OcclusionMask refined = mask;
  if (round1_ok && policy_.classify_and_unmask && !frame.detections.empty() &&
      !history_.empty()) {
    // Reference frame: N back counting this frame as the newest.
    const std::size_t ref_idx =
        reference_frame_index(history_.size() + 1, cfg_.classifier.ref_lag_n);
    const HistoryEntry& ref = history_[std::min(ref_idx, history_.size() - 1)];
    res.motion_states =
        classify_frame_objects(ref.frame, frame, ref.pose, round1, cfg_.classifier);

    std::vector<int> static_ids;
    for (const auto& [id, state] : res.motion_states) {
      if (state.label == MotionLabel::Static) static_ids.push_back(id);
    }
    if (!static_ids.empty()) {
      refined = unmask_objects(mask, static_ids, frame.detections);
      res.refined_mar = masked_area_ratio(refined);
      matches2 = match_map_points(map_, frame, round1, refined, cfg_);
      res.match_count = static_cast<int>(matches2.size());
      if (res.match_count >= cfg_.min_inliers) {
        try {
          stats2 = solve_motion_only_ba(matches2, frame.intrinsics, round1, cfg_);
          final_pose = stats2.pose;
          final_stats = &stats2;
          final_matches = &matches2;
        } catch (const SolverDiverged&) {
          // keep the round-1 result
          res.match_count = res.round1_match_count;
          refined = mask;
          res.refined_mar = res.mar;
        }
      } else {
        res.match_count = res.round1_match_count;
      }
    }
  }

  res.pose = final_pose;
  res.inlier_count = final_stats->inlier_count;
  res.status = res.inlier_count >= cfg_.min_inliers ? TrackStatus::Tracked : TrackStatus::Lost;

  if (res.status == TrackStatus::Tracked) {
    res.inlier_feature_indices.reserve(static_cast<std::size_t>(res.inlier_count));
    for (std::size_t i = 0; i < final_matches->size(); ++i) {
      if (i < final_stats->inlier_mask.size() && final_stats->inlier_mask[i]) {
        res.inlier_feature_indices.push_back((*final_matches)[i].feature_index);
      }
    }
    ++tracked_frames_;
    maintain_map(frame, final_pose, final_stats == &stats2 ? refined : mask, *final_matches);
    push_history(frame, final_pose);
    prev_prev_pose_ = prev_pose_;
    prev_pose_ = final_pose;
    last_good_pose_ = final_pose;
    last_was_lost_ = false;
  } else {
    last_was_lost_ = true;
  }
  ++frame_index_;
  return res;
}

}  // namespace sitetrack
