#pragma once

#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sitetrack/frame.hpp"

namespace sitetrack {

struct ClassifierParams {
  double sigma_bkg = 0.12;       // std. dev. of static-background 3D error, meters
  double inlier_fraction = 0.7;  // fraction of kept points that must beat 3*sigma_bkg
  int ref_lag_n = 2;             // reference frame is N frames back

  int min_association_matches = 8;
  int min_points_for_classification = 6;
  int max_descriptor_distance = 50;  // Hamming bits

  void validate() const;  // throws ConfigInvalid
};

/// Reference-frame lag from the camera rate: FPS/3, at least one frame.
int default_ref_lag(double fps);

enum class MotionLabel { Static, Dynamic, Unknown };

const char* to_string(MotionLabel label);

struct MotionState {
  MotionLabel label = MotionLabel::Unknown;
  /// Fraction of kept points with position error below 3*sigma_bkg.
  double score = 0.0;
  /// Smallest error threshold at which the object classifies Static: the
  /// (floor(inlier_fraction*k)+1)-th smallest kept error. The label is Static
  /// exactly when decision_error < 3*sigma_bkg, which is what the ROC sweep
  /// re-evaluates per sigma. NaN when Unknown.
  double decision_error = std::numeric_limits<double>::quiet_NaN();
};

/// Co-visible object pair between reference and current frame.
struct ObjectAssociation {
  int ref_object_id = 0;
  int cur_object_id = 0;
  /// (index into ref features, index into cur features)
  std::vector<std::pair<std::size_t, std::size_t>> matched_feature_pairs;
};

/// Frame n positions before the last entry; the oldest frame when the history
/// is shorter. Throws EmptyHistory.
std::size_t reference_frame_index(std::size_t history_size, int n);
const FrameObservation& select_reference_frame(std::span<const FrameObservation> history, int n);

/// Matches features inside reference bounding boxes to features inside current
/// bounding boxes (mutual best descriptor match), then associates each object
/// with at most one partner, greedily by shared match count.
std::vector<ObjectAssociation> associate_objects(const FrameObservation& ref,
                                                 const FrameObservation& cur,
                                                 const ClassifierParams& params);

/// Per-pair distance between the two world-frame triangulations of the same
/// object point. Pairs without usable stereo observations are dropped.
std::vector<double> object_point_errors(const ObjectAssociation& assoc,
                                        const FrameObservation& ref, const FrameObservation& cur,
                                        const Pose& ref_pose, const Pose& cur_pose);

/// Median outlier rejection, then the 3*sigma_bkg / inlier_fraction test.
MotionState classify(std::vector<double> errors, const ClassifierParams& params);

/// Full per-frame classification: association, point errors, classify.
/// Objects that cannot be associated map to Unknown.
std::map<int, MotionState> classify_frame_objects(const FrameObservation& ref,
                                                  const FrameObservation& cur,
                                                  const Pose& ref_pose, const Pose& cur_pose,
                                                  const ClassifierParams& params);

}  // namespace sitetrack
