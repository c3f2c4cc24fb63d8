#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sitetrack/trajectory.hpp"

namespace sitetrack {

struct AlignmentResult {
  Pose transform;     // maps estimated positions onto ground truth
  double scale = 1.0; // 1.0 when scale estimation is disabled
  double at_rmse = 0.0;
  std::vector<double> per_pose_errors;
};

/// Closed-form least-squares rigid (or similarity, when with_scale) alignment
/// between two trajectories already associated 1:1 by index. Throws
/// LengthMismatch and DegenerateGeometry (fewer than 3 non-collinear points).
AlignmentResult umeyama_align(const Trajectory& est, const Trajectory& gt, bool with_scale);

/// Root-mean-square translational error between associated trajectories.
double at_rmse(const Trajectory& est_aligned, const Trajectory& gt);

/// Nearest-timestamp association of est entries to gt entries shifted by
/// offset; pairs further apart than max_gap are dropped and every gt entry is
/// used at most once.
std::vector<std::pair<std::size_t, std::size_t>> associate_by_timestamp(const Trajectory& est,
                                                                        const Trajectory& gt,
                                                                        double offset,
                                                                        double max_gap);

/// Grid search over time offsets in [-search_window, +search_window]; returns
/// the offset (added to gt timestamps) minimizing post-alignment AT-RMSE, ties
/// broken toward smaller |offset|. Throws NoOverlap.
double sync_time_offset(const Trajectory& est, const Trajectory& gt, double search_window,
                        double step);

/// Convenience: sync, associate at the best offset, then align.
struct TrajectoryEvaluation {
  double offset = 0.0;
  std::size_t matched_poses = 0;
  AlignmentResult alignment;
};
TrajectoryEvaluation evaluate_trajectories(const Trajectory& est, const Trajectory& gt,
                                           double search_window, double step, bool with_scale);

/// One classified object-frame observation. score is the decision statistic:
/// the object classifies Static at a given sigma_bkg exactly when
/// score < 3 * sigma_bkg.
struct RocRecord {
  double score = 0.0;
  bool gt_static = false;
};

struct RocPoint {
  double false_positive_rate = 0.0;
  double true_positive_rate = 0.0;
  double sigma_bkg = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by FPR
  double auc = 0.0;              // trapezoid rule, curve closed at (0,0) and (1,1)
};

/// Static is the positive class; records with Unknown outcomes must be
/// excluded beforehand. Throws EmptyRecords.
RocCurve roc_auc(std::span<const RocRecord> records, std::span<const double> sigma_values);

/// Evenly spaced sweep values, first = lo, last = hi.
std::vector<double> linspace(double lo, double hi, int steps);

}  // namespace sitetrack
