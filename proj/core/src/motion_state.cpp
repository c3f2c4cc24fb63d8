#include "sitetrack/motion_state.hpp"

#include <algorithm>
#include <cmath>

namespace sitetrack {

void ClassifierParams::validate() const {
  if (!(sigma_bkg > 0.0)) throw ConfigInvalid("sigma_bkg must be positive");
  if (!(inlier_fraction > 0.0) || !(inlier_fraction < 1.0)) {
    throw ConfigInvalid("inlier_fraction must lie strictly between 0 and 1");
  }
  if (ref_lag_n < 1) throw ConfigInvalid("ref_lag_n must be at least 1");
  if (min_association_matches < 1 || min_points_for_classification < 1) {
    throw ConfigInvalid("association/classification minimums must be positive");
  }
  if (max_descriptor_distance < 0 || max_descriptor_distance > 256) {
    throw ConfigInvalid("max_descriptor_distance must be in [0, 256]");
  }
}

int default_ref_lag(double fps) {
  return std::max(1, static_cast<int>(std::lround(fps / 3.0)));
}

const char* to_string(MotionLabel label) {
  switch (label) {
    case MotionLabel::Static: return "static";
    case MotionLabel::Dynamic: return "dynamic";
    default: return "unknown";
  }
}

std::size_t reference_frame_index(std::size_t history_size, int n) {
  if (history_size == 0) throw EmptyHistory("select_reference_frame: no frames");
  const long long idx = static_cast<long long>(history_size) - 1 - n;
  return idx < 0 ? 0 : static_cast<std::size_t>(idx);
}

const FrameObservation& select_reference_frame(std::span<const FrameObservation> history, int n) {
  return history[reference_frame_index(history.size(), n)];
}

namespace {

// Feature indices lying inside each detection's bounding box, plus the flat
// list of unique candidate indices.
struct BoxedFeatures {
  std::vector<std::vector<std::size_t>> per_object;
  std::vector<std::size_t> candidates;
};

BoxedFeatures collect_boxed_features(const FrameObservation& frame) {
  BoxedFeatures out;
  out.per_object.resize(frame.detections.size());
  std::vector<char> used(frame.features.size(), 0);
  for (std::size_t d = 0; d < frame.detections.size(); ++d) {
    const BoundingBox& box = frame.detections[d].bbox;
    for (std::size_t f = 0; f < frame.features.size(); ++f) {
      const StereoFeature& feat = frame.features[f];
      if (box.contains(feat.u_l, feat.v_l)) {
        out.per_object[d].push_back(f);
        used[f] = 1;
      }
    }
  }
  for (std::size_t f = 0; f < used.size(); ++f) {
    if (used[f]) out.candidates.push_back(f);
  }
  return out;
}

}  // namespace

std::vector<ObjectAssociation> associate_objects(const FrameObservation& ref,
                                                 const FrameObservation& cur,
                                                 const ClassifierParams& params) {
  const BoxedFeatures ref_boxed = collect_boxed_features(ref);
  const BoxedFeatures cur_boxed = collect_boxed_features(cur);
  if (ref_boxed.candidates.empty() || cur_boxed.candidates.empty()) return {};

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // Mutual best descriptor match between the two candidate sets.
  std::vector<std::size_t> best_for_ref(ref.features.size(), kNone);
  std::vector<int> best_dist_ref(ref.features.size(), params.max_descriptor_distance + 1);
  std::vector<std::size_t> best_for_cur(cur.features.size(), kNone);
  std::vector<int> best_dist_cur(cur.features.size(), params.max_descriptor_distance + 1);

  for (std::size_t a : ref_boxed.candidates) {
    for (std::size_t b : cur_boxed.candidates) {
      const int dist = hamming_distance(ref.features[a].descriptor, cur.features[b].descriptor);
      if (dist < best_dist_ref[a]) {
        best_dist_ref[a] = dist;
        best_for_ref[a] = b;
      }
      if (dist < best_dist_cur[b]) {
        best_dist_cur[b] = dist;
        best_for_cur[b] = a;
      }
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> mutual;
  for (std::size_t a : ref_boxed.candidates) {
    const std::size_t b = best_for_ref[a];
    if (b != kNone && best_for_cur[b] == a) mutual.emplace_back(a, b);
  }
  if (mutual.empty()) return {};

  // Shared matches per (ref object, cur object) pair. A feature inside several
  // overlapping boxes contributes to each of them.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<std::size_t, std::size_t>>>
      pair_matches;
  for (std::size_t rd = 0; rd < ref_boxed.per_object.size(); ++rd) {
    for (std::size_t cd = 0; cd < cur_boxed.per_object.size(); ++cd) {
      for (const auto& [a, b] : mutual) {
        const auto& ra = ref_boxed.per_object[rd];
        const auto& cb = cur_boxed.per_object[cd];
        if (std::find(ra.begin(), ra.end(), a) != ra.end() &&
            std::find(cb.begin(), cb.end(), b) != cb.end()) {
          pair_matches[{rd, cd}].emplace_back(a, b);
        }
      }
    }
  }

  struct Candidate {
    std::size_t ref_det, cur_det;
    std::size_t count;
  };
  std::vector<Candidate> candidates;
  for (const auto& [key, matches] : pair_matches) {
    if (matches.size() >= static_cast<std::size_t>(params.min_association_matches)) {
      candidates.push_back({key.first, key.second, matches.size()});
    }
  }
  // Greedy by descending match count; ties by ascending (ref id, cur id).
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.count != b.count) return a.count > b.count;
    const int ra = ref.detections[a.ref_det].object_id;
    const int rb = ref.detections[b.ref_det].object_id;
    if (ra != rb) return ra < rb;
    return cur.detections[a.cur_det].object_id < cur.detections[b.cur_det].object_id;
  });

  std::vector<char> ref_used(ref.detections.size(), 0), cur_used(cur.detections.size(), 0);
  std::vector<ObjectAssociation> out;
  for (const Candidate& c : candidates) {
    if (ref_used[c.ref_det] || cur_used[c.cur_det]) continue;
    ref_used[c.ref_det] = cur_used[c.cur_det] = 1;
    ObjectAssociation assoc;
    assoc.ref_object_id = ref.detections[c.ref_det].object_id;
    assoc.cur_object_id = cur.detections[c.cur_det].object_id;
    assoc.matched_feature_pairs = pair_matches[{c.ref_det, c.cur_det}];
    out.push_back(std::move(assoc));
  }
  return out;
}

std::vector<double> object_point_errors(const ObjectAssociation& assoc,
                                        const FrameObservation& ref, const FrameObservation& cur,
                                        const Pose& ref_pose, const Pose& cur_pose) {
  std::vector<double> errors;
  errors.reserve(assoc.matched_feature_pairs.size());
  for (const auto& [ia, ib] : assoc.matched_feature_pairs) {
    const StereoFeature& fa = ref.features[ia];
    const StereoFeature& fb = cur.features[ib];
    if (!fa.has_stereo() || !fb.has_stereo()) continue;
    if (fa.disparity() <= kMinDisparity || fb.disparity() <= kMinDisparity) continue;
    const Point3 pa = ref_pose * triangulate_stereo(ref.intrinsics, fa.stereo_pixel());
    const Point3 pb = cur_pose * triangulate_stereo(cur.intrinsics, fb.stereo_pixel());
    errors.push_back((pa - pb).norm());
  }
  return errors;
}

MotionState classify(std::vector<double> errors, const ClassifierParams& params) {
  MotionState out;
  if (errors.empty()) return out;

  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = sorted.size();
  const double median = (sorted[(k - 1) / 2] + sorted[k / 2]) * 0.5;

  // Keep errors strictly below the median. If the strict filter keeps nothing
  // (all errors equal, or tied at the median), classify on the full list.
  std::vector<double> kept;
  kept.reserve(k);
  for (double e : sorted) {
    if (e < median) kept.push_back(e);
  }
  if (kept.empty()) kept = sorted;

  if (kept.size() < static_cast<std::size_t>(params.min_points_for_classification)) {
    return out;  // Unknown
  }

  const double threshold = 3.0 * params.sigma_bkg;
  std::size_t below = 0;
  for (double e : kept) {
    if (e < threshold) ++below;
  }
  const double fraction = static_cast<double>(below) / static_cast<double>(kept.size());

  const std::size_t rank =
      static_cast<std::size_t>(std::floor(params.inlier_fraction * static_cast<double>(kept.size())));
  out.decision_error = kept[std::min(rank, kept.size() - 1)];
  out.score = fraction;
  out.label = fraction > params.inlier_fraction ? MotionLabel::Static : MotionLabel::Dynamic;
  return out;
}

std::map<int, MotionState> classify_frame_objects(const FrameObservation& ref,
                                                  const FrameObservation& cur,
                                                  const Pose& ref_pose, const Pose& cur_pose,
                                                  const ClassifierParams& params) {
  std::map<int, MotionState> out;
  for (const ObjectDetection& det : cur.detections) out[det.object_id] = MotionState{};

  for (const ObjectAssociation& assoc : associate_objects(ref, cur, params)) {
    std::vector<double> errors = object_point_errors(assoc, ref, cur, ref_pose, cur_pose);
    out[assoc.cur_object_id] = classify(std::move(errors), params);
  }
  return out;
}

}  // namespace sitetrack
