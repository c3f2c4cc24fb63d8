#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "sitetrack/dataset_io.hpp"
#include "sitetrack/evaluate.hpp"
#include "sitetrack/tracking.hpp"

namespace sitetrack {

/// Pipeline variants compared in experiments:
/// - Proposed: hierarchical masking plus two-round tracking with motion-state
///   classification and unmasking of static objects.
/// - BaselineMaskAll: bounding-box masks for every movable detection, single
///   round, nothing ever unmasked.
/// - NoMask: plain stereo tracking, masks disabled.
/// - PixelwiseAlways / BBoxAlways: like Proposed but pinned to one mask tier.
enum class Variant { Proposed, BaselineMaskAll, NoMask, PixelwiseAlways, BBoxAlways };

const char* to_string(Variant variant);
Variant variant_from_string(std::string_view name);  // throws ConfigInvalid
PipelinePolicy policy_for(Variant variant);

struct ObjectStateRecord {
  MotionLabel predicted = MotionLabel::Unknown;
  double score = 0.0;
  double decision_error = 0.0;
  MotionLabel gt = MotionLabel::Unknown;
};

struct FrameRecord {
  int frame = 0;
  double timestamp = 0.0;
  double mar = 0.0;
  double refined_mar = 0.0;
  MaskTier tier = MaskTier::BBox;
  TrackStatus status = TrackStatus::Lost;
  int inliers = 0;
  int round1_inliers = 0;
  int matches = 0;
  double track_seconds = 0.0;
  double mask_cost_seconds = 0.0;  // modeled, mask_cost()
  std::map<int, ObjectStateRecord> states;
  Pose pose;
};

/// Static is the positive class.
struct ConfusionCounts {
  int true_positive = 0;
  int false_positive = 0;
  int true_negative = 0;
  int false_negative = 0;
  int unknown = 0;
};

struct RunSummary {
  std::string dataset;
  std::string variant;
  int frames = 0;
  int tracked = 0;
  int lost = 0;
  int pixel_tier_frames = 0;
  double max_mar = 0.0;
  double at_rmse = std::numeric_limits<double>::quiet_NaN();
  double sync_offset = 0.0;
  int aligned_poses = 0;
  double mean_track_seconds = 0.0;
  double total_mask_cost_seconds = 0.0;
  double mean_frame_seconds = 0.0;  // tracking plus modeled mask cost
  ConfusionCounts confusion;
};

struct RunReport {
  RunSummary summary;
  std::vector<FrameRecord> records;
  Trajectory trajectory;  // tracked frames only
};

struct ExperimentConfig {
  TrackingConfig tracking;
  double sync_window = 0.5;        // seconds
  std::optional<double> sync_step; // default 0.5 / fps
  std::filesystem::path dump_masks_dir;  // per-frame PGM masks when set
};

RunReport run_experiment(const SimulatedDataset& dataset, Variant variant,
                         const ExperimentConfig& config);

/// Imports the dataset, runs the variant, optionally writes the report files.
RunReport run_experiment(const std::filesystem::path& dataset_dir, Variant variant,
                         const ExperimentConfig& config,
                         const std::optional<std::filesystem::path>& out_dir);

/// trajectory.txt, records.jsonl, summary.json and summary.csv.
void write_run_report(const RunReport& report, const std::filesystem::path& dir);

/// Classified object-frame records for the ROC sweep; Unknown outcomes and
/// objects without ground truth are excluded.
std::vector<RocRecord> roc_records_from_report(const RunReport& report);

/// Reads records back from a written records.jsonl.
std::vector<RocRecord> read_roc_records(const std::filesystem::path& records_jsonl);

}  // namespace sitetrack
