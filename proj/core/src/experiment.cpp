#include "sitetrack/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace sitetrack {

using nlohmann::json;

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::Proposed: return "proposed";
    case Variant::BaselineMaskAll: return "baseline-mask-all";
    case Variant::NoMask: return "no-mask";
    case Variant::PixelwiseAlways: return "pixelwise-always";
    case Variant::BBoxAlways: return "bbox-always";
  }
  return "proposed";
}

Variant variant_from_string(std::string_view name) {
  if (name == "proposed") return Variant::Proposed;
  if (name == "baseline-mask-all") return Variant::BaselineMaskAll;
  if (name == "no-mask") return Variant::NoMask;
  if (name == "pixelwise-always") return Variant::PixelwiseAlways;
  if (name == "bbox-always") return Variant::BBoxAlways;
  throw ConfigInvalid("unknown variant: " + std::string(name));
}

PipelinePolicy policy_for(Variant variant) {
  PipelinePolicy policy;
  switch (variant) {
    case Variant::Proposed:
      policy.mask = PipelinePolicy::Mask::Hierarchical;
      policy.classify_and_unmask = true;
      break;
    case Variant::BaselineMaskAll:
      policy.mask = PipelinePolicy::Mask::BBoxAlways;
      policy.classify_and_unmask = false;
      break;
    case Variant::NoMask:
      policy.mask = PipelinePolicy::Mask::None;
      policy.classify_and_unmask = false;
      break;
    case Variant::PixelwiseAlways:
      policy.mask = PipelinePolicy::Mask::PixelwiseAlways;
      policy.classify_and_unmask = true;
      break;
    case Variant::BBoxAlways:
      policy.mask = PipelinePolicy::Mask::BBoxAlways;
      policy.classify_and_unmask = true;
      break;
  }
  return policy;
}

RunReport run_experiment(const SimulatedDataset& dataset, Variant variant,
                         const ExperimentConfig& config) {
  RunReport report;
  report.summary.dataset = dataset.meta.scenario;
  report.summary.variant = to_string(variant);
  report.summary.frames = static_cast<int>(dataset.frames.size());

  Tracker tracker(config.tracking, policy_for(variant));
  double track_seconds_total = 0.0;

  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    const FrameObservation& frame = dataset.frames[i];
    const auto t0 = std::chrono::steady_clock::now();
    const TrackingResult result = tracker.track_frame(frame);
    const auto t1 = std::chrono::steady_clock::now();

    FrameRecord record;
    record.frame = static_cast<int>(i);
    record.timestamp = frame.timestamp;
    record.mar = result.mar;
    record.refined_mar = result.refined_mar;
    record.tier = result.mask_tier;
    record.status = result.status;
    record.inliers = result.inlier_count;
    record.round1_inliers = result.round1_inlier_count;
    record.matches = result.match_count;
    record.track_seconds = std::chrono::duration<double>(t1 - t0).count();
    record.mask_cost_seconds = variant == Variant::NoMask ? 0.0 : mask_cost(result.mask_tier, 1);
    record.pose = result.pose;

    const GroundTruthFrame& gt = dataset.groundtruth[i];
    for (const auto& [id, state] : result.motion_states) {
      ObjectStateRecord osr;
      osr.predicted = state.label;
      osr.score = state.score;
      osr.decision_error = state.decision_error;
      if (auto it = gt.object_states.find(id); it != gt.object_states.end()) {
        osr.gt = it->second;
      }
      record.states[id] = osr;

      if (osr.gt == MotionLabel::Unknown) continue;
      const bool gt_static = osr.gt == MotionLabel::Static;
      switch (state.label) {
        case MotionLabel::Static:
          (gt_static ? report.summary.confusion.true_positive
                     : report.summary.confusion.false_positive)++;
          break;
        case MotionLabel::Dynamic:
          (gt_static ? report.summary.confusion.false_negative
                     : report.summary.confusion.true_negative)++;
          break;
        case MotionLabel::Unknown:
          report.summary.confusion.unknown++;
          break;
      }
    }

    track_seconds_total += record.track_seconds;
    report.summary.total_mask_cost_seconds += record.mask_cost_seconds;
    report.summary.max_mar = std::max(report.summary.max_mar, record.mar);
    if (record.tier == MaskTier::PixelWise) report.summary.pixel_tier_frames++;
    if (record.status == TrackStatus::Tracked) {
      report.summary.tracked++;
      report.trajectory.entries.push_back({frame.timestamp, result.pose});
    } else {
      report.summary.lost++;
    }

    if (!config.dump_masks_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(config.dump_masks_dir, ec);
      const int w = frame.intrinsics.width;
      const int h = frame.intrinsics.height;
      OcclusionMask mask(w, h);
      switch (policy_for(variant).mask) {
        case PipelinePolicy::Mask::Hierarchical:
          mask = hierarchical_mask(frame.detections, w, h, config.tracking.tau_mar);
          break;
        case PipelinePolicy::Mask::BBoxAlways:
          mask = rasterize_bbox_mask(frame.detections, w, h);
          break;
        case PipelinePolicy::Mask::PixelwiseAlways:
          mask = rasterize_pixelwise_mask(frame.detections, w, h);
          break;
        case PipelinePolicy::Mask::None:
          break;
      }
      char name[64];
      std::snprintf(name, sizeof(name), "mask_%06zu.pgm", i);
      write_pgm(mask, config.dump_masks_dir / name);
    }

    report.records.push_back(std::move(record));
  }

  if (report.summary.frames > 0) {
    report.summary.mean_track_seconds = track_seconds_total / report.summary.frames;
    report.summary.mean_frame_seconds =
        report.summary.mean_track_seconds +
        report.summary.total_mask_cost_seconds / report.summary.frames;
  }

  // AT-RMSE against ground truth after time sync and rigid alignment.
  const Trajectory gt = trajectory_from_groundtruth(dataset.groundtruth);
  const double step = config.sync_step.value_or(0.5 / dataset.meta.fps);
  if (report.trajectory.size() >= 3) {
    try {
      const TrajectoryEvaluation eval =
          evaluate_trajectories(report.trajectory, gt, config.sync_window, step, false);
      report.summary.at_rmse = eval.alignment.at_rmse;
      report.summary.sync_offset = eval.offset;
      report.summary.aligned_poses = static_cast<int>(eval.matched_poses);
    } catch (const Error&) {
      // Lost-heavy or degenerate run: leave at_rmse as NaN, the report still
      // carries the tracking-loss statistics.
    }
  }
  return report;
}

RunReport run_experiment(const std::filesystem::path& dataset_dir, Variant variant,
                         const ExperimentConfig& config,
                         const std::optional<std::filesystem::path>& out_dir) {
  const SimulatedDataset dataset = import_dataset(dataset_dir);
  RunReport report = run_experiment(dataset, variant, config);
  report.summary.dataset = dataset_dir.string();
  if (out_dir) write_run_report(report, *out_dir);
  return report;
}

namespace {

json pose_to_json(const Pose& pose) {
  const Eigen::Quaterniond q = to_quaternion(pose);
  return {{"p", {pose.translation.x(), pose.translation.y(), pose.translation.z()}},
          {"q", {q.x(), q.y(), q.z(), q.w()}}};
}

json record_to_json(const FrameRecord& r) {
  json j;
  j["frame"] = r.frame;
  j["t"] = r.timestamp;
  j["mar"] = r.mar;
  j["refined_mar"] = r.refined_mar;
  j["tier"] = to_string(r.tier);
  j["status"] = r.status == TrackStatus::Tracked ? "tracked" : "lost";
  j["inliers"] = r.inliers;
  j["round1_inliers"] = r.round1_inliers;
  j["matches"] = r.matches;
  // Wall-clock time stays out of the per-frame records so identical runs
  // produce byte-identical files; the summary carries the mean.
  j["mask_cost_s"] = r.mask_cost_seconds;
  j["pose"] = pose_to_json(r.pose);
  json objects = json::array();
  for (const auto& [id, s] : r.states) {
    json o;
    o["id"] = id;
    o["state"] = to_string(s.predicted);
    o["score"] = s.score;
    if (std::isfinite(s.decision_error)) o["decision_error"] = s.decision_error;
    o["gt"] = to_string(s.gt);
    objects.push_back(std::move(o));
  }
  j["objects"] = std::move(objects);
  return j;
}

json summary_to_json(const RunSummary& s) {
  json j;
  j["dataset"] = s.dataset;
  j["variant"] = s.variant;
  j["frames"] = s.frames;
  j["tracked"] = s.tracked;
  j["lost"] = s.lost;
  j["pixel_tier_frames"] = s.pixel_tier_frames;
  j["max_mar"] = s.max_mar;
  if (std::isfinite(s.at_rmse)) {
    j["at_rmse"] = s.at_rmse;
  } else {
    j["at_rmse"] = nullptr;
  }
  j["sync_offset"] = s.sync_offset;
  j["aligned_poses"] = s.aligned_poses;
  j["mean_track_seconds"] = s.mean_track_seconds;
  j["total_mask_cost_seconds"] = s.total_mask_cost_seconds;
  j["mean_frame_seconds"] = s.mean_frame_seconds;
  j["confusion"] = {{"tp", s.confusion.true_positive},
                    {"fp", s.confusion.false_positive},
                    {"tn", s.confusion.true_negative},
                    {"fn", s.confusion.false_negative},
                    {"unknown", s.confusion.unknown}};
  return j;
}

}  // namespace

void write_run_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("write_run_report: cannot create " + dir.string());

  write_tum_trajectory(report.trajectory, dir / "trajectory.txt");

  {
    std::ofstream out(dir / "records.jsonl", std::ios::binary);
    if (!out) throw IoError("write_run_report: cannot write records.jsonl");
    for (const FrameRecord& r : report.records) out << record_to_json(r).dump() << "\n";
  }
  {
    std::ofstream out(dir / "summary.json", std::ios::binary);
    if (!out) throw IoError("write_run_report: cannot write summary.json");
    out << summary_to_json(report.summary).dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "summary.csv", std::ios::binary);
    if (!out) throw IoError("write_run_report: cannot write summary.csv");
    const RunSummary& s = report.summary;
    out << "dataset,variant,frames,tracked,lost,pixel_tier_frames,max_mar,at_rmse,"
           "sync_offset,aligned_poses,mean_track_ms,total_mask_cost_s,mean_frame_ms,"
           "tp,fp,tn,fn,unknown\n";
    char line[768];
    std::snprintf(line, sizeof(line),
                  "%s,%s,%d,%d,%d,%d,%.6g,%.6g,%.6g,%d,%.6g,%.6g,%.6g,%d,%d,%d,%d,%d\n",
                  s.dataset.c_str(), s.variant.c_str(), s.frames, s.tracked, s.lost,
                  s.pixel_tier_frames, s.max_mar, s.at_rmse, s.sync_offset, s.aligned_poses,
                  s.mean_track_seconds * 1e3, s.total_mask_cost_seconds,
                  s.mean_frame_seconds * 1e3, s.confusion.true_positive,
                  s.confusion.false_positive, s.confusion.true_negative,
                  s.confusion.false_negative, s.confusion.unknown);
    out << line;
  }
}

std::vector<RocRecord> roc_records_from_report(const RunReport& report) {
  std::vector<RocRecord> out;
  for (const FrameRecord& r : report.records) {
    for (const auto& [id, s] : r.states) {
      if (s.predicted == MotionLabel::Unknown || s.gt == MotionLabel::Unknown) continue;
      if (!std::isfinite(s.decision_error)) continue;
      out.push_back({s.decision_error, s.gt == MotionLabel::Static});
    }
  }
  return out;
}

std::vector<RocRecord> read_roc_records(const std::filesystem::path& records_jsonl) {
  std::ifstream in(records_jsonl, std::ios::binary);
  if (!in) throw IoError("read_roc_records: cannot open " + records_jsonl.string());
  std::vector<RocRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw FormatError(records_jsonl.filename().string() + ":" + std::to_string(line_no) +
                        ": not a JSON object");
    }
    if (!j.contains("objects")) continue;
    for (const json& o : j["objects"]) {
      const std::string state = o.value("state", std::string("unknown"));
      const std::string gt = o.value("gt", std::string("unknown"));
      if (state == "unknown" || gt == "unknown") continue;
      if (!o.contains("decision_error")) continue;
      out.push_back({o["decision_error"].get<double>(), gt == "static"});
    }
  }
  return out;
}

}  // namespace sitetrack
