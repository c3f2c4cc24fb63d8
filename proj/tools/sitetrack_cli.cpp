// Command line front end: synthetic dataset generation, tracking runs,
// trajectory evaluation, classifier ROC analysis and the occlusion sweep.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "sitetrack/dataset_io.hpp"
#include "sitetrack/experiment.hpp"

namespace {

using namespace sitetrack;

struct SimulateArgs {
  std::uint64_t seed = 1;
  int frames = 120;
  double fps = 6.0;
  double noise_px = 0.5;
  int flip_bits = 6;
  std::string scenario = "empty";
  std::string path = "loop";
  double target_occlusion = 0.0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  SimConfig cfg = scenario_config(args.scenario);
  cfg.seed = args.seed;
  cfg.frames = args.frames;
  cfg.fps = args.fps;
  cfg.pixel_noise_sigma = args.noise_px;
  cfg.descriptor_flip_bits = args.flip_bits;
  cfg.camera_path = args.path == "line" ? CameraPath::StraightLine : CameraPath::RectangleLoop;
  if (args.target_occlusion > 0.0) cfg.target_occlusion = args.target_occlusion;

  const SimulatedDataset dataset = make_dataset(cfg);
  export_dataset(dataset, args.out);

  std::size_t features = 0;
  for (const FrameObservation& f : dataset.frames) features += f.features.size();
  std::cout << "wrote " << dataset.frames.size() << " frames ("
            << features / std::max<std::size_t>(1, dataset.frames.size())
            << " features/frame avg) to " << args.out << "\n";
  return 0;
}

struct RunArgs {
  std::string dataset;
  std::string variant = "proposed";
  double tau_mar = 0.5;
  double sigma_bkg = 0.12;
  int ref_lag = 0;  // 0: derive from the dataset frame rate
  double sync_window = 0.5;
  std::string out;
  std::string dump_masks;
};

int cmd_run(const RunArgs& args) {
  const SimulatedDataset dataset = import_dataset(args.dataset);

  ExperimentConfig config;
  config.tracking.tau_mar.tau_mar = args.tau_mar;
  config.tracking.classifier.sigma_bkg = args.sigma_bkg;
  config.tracking.classifier.ref_lag_n =
      args.ref_lag > 0 ? args.ref_lag : default_ref_lag(dataset.meta.fps);
  config.sync_window = args.sync_window;
  if (!args.dump_masks.empty()) config.dump_masks_dir = args.dump_masks;

  RunReport report = run_experiment(dataset, variant_from_string(args.variant), config);
  report.summary.dataset = args.dataset;
  if (!args.out.empty()) write_run_report(report, args.out);

  const RunSummary& s = report.summary;
  std::printf("variant=%s frames=%d tracked=%d lost=%d at_rmse=%.4f max_mar=%.3f "
              "pixel_tier=%d mean_track_ms=%.2f mask_cost_s=%.2f\n",
              s.variant.c_str(), s.frames, s.tracked, s.lost, s.at_rmse, s.max_mar,
              s.pixel_tier_frames, s.mean_track_seconds * 1e3, s.total_mask_cost_seconds);
  return 0;
}

struct EvalArgs {
  std::string est;
  std::string gt;
  bool with_scale = false;
  double sync_window = 3.0;
  double sync_step = 0.1;
  std::string out;
};

int cmd_eval(const EvalArgs& args) {
  const Trajectory est = read_tum_trajectory(args.est);
  const Trajectory gt = read_tum_trajectory(args.gt);
  const TrajectoryEvaluation eval =
      evaluate_trajectories(est, gt, args.sync_window, args.sync_step, args.with_scale);

  std::printf("offset=%.4f matched=%zu scale=%.6f at_rmse=%.6f\n", eval.offset,
              eval.matched_poses, eval.alignment.scale, eval.alignment.at_rmse);
  if (!args.out.empty()) {
    nlohmann::json j;
    j["offset"] = eval.offset;
    j["matched_poses"] = eval.matched_poses;
    j["scale"] = eval.alignment.scale;
    j["at_rmse"] = eval.alignment.at_rmse;
    const Eigen::Quaterniond q = to_quaternion(eval.alignment.transform);
    j["transform"] = {{"p",
                       {eval.alignment.transform.translation.x(),
                        eval.alignment.transform.translation.y(),
                        eval.alignment.transform.translation.z()}},
                      {"q", {q.x(), q.y(), q.z(), q.w()}}};
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw IoError("eval: cannot write " + args.out);
    out << j.dump(2) << "\n";
  }
  return 0;
}

struct RocArgs {
  std::string records;
  double sigma_min = 0.0;
  double sigma_max = 0.6;
  int steps = 61;
  std::string out;
};

int cmd_roc(const RocArgs& args) {
  const std::vector<RocRecord> records = read_roc_records(args.records);
  const std::vector<double> sigmas = linspace(args.sigma_min, args.sigma_max, args.steps);
  const RocCurve curve = roc_auc(records, sigmas);

  std::printf("records=%zu auc=%.4f\n", records.size(), curve.auc);
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw IoError("roc: cannot write " + args.out);
    out << "fpr,tpr,sigma_bkg\n";
    char line[160];
    for (const RocPoint& p : curve.points) {
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", p.false_positive_rate,
                    p.true_positive_rate, p.sigma_bkg);
      out << line;
    }
  }
  return 0;
}

struct SweepArgs {
  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  int seeds = 10;
  std::uint64_t seed_base = 1;
  int frames = 120;
  double fps = 6.0;
  double noise_px = 0.5;
  std::string variant = "baseline-mask-all";
  std::string out;
};

int cmd_sweep(const SweepArgs& args) {
  const Variant variant = variant_from_string(args.variant);

  std::ofstream csv;
  if (!args.out.empty()) {
    std::filesystem::create_directories(std::filesystem::path(args.out).parent_path().empty()
                                            ? "."
                                            : std::filesystem::path(args.out).parent_path());
    csv.open(args.out, std::ios::binary);
    if (!csv) throw IoError("sweep-occlusion: cannot write " + args.out);
    csv << "ratio,seed,at_rmse,tracked,lost,max_mar\n";
  }

  std::printf("%8s %12s %10s\n", "ratio", "median_rmse", "lost_med");
  for (double ratio : args.ratios) {
    std::vector<double> rmses;
    std::vector<int> losts;
    for (int s = 0; s < args.seeds; ++s) {
      SimConfig cfg = scenario_config("empty");
      cfg.seed = args.seed_base + static_cast<std::uint64_t>(s);
      cfg.frames = args.frames;
      cfg.fps = args.fps;
      cfg.pixel_noise_sigma = args.noise_px;
      if (ratio > 0.0) cfg.target_occlusion = ratio;

      ExperimentConfig config;
      config.tracking.classifier.ref_lag_n = default_ref_lag(cfg.fps);
      const RunReport report = run_experiment(make_dataset(cfg), variant, config);
      rmses.push_back(report.summary.at_rmse);
      losts.push_back(report.summary.lost);
      if (csv.is_open()) {
        char line[256];
        std::snprintf(line, sizeof(line), "%.3g,%llu,%.9g,%d,%d,%.6g\n", ratio,
                      static_cast<unsigned long long>(cfg.seed), report.summary.at_rmse,
                      report.summary.tracked, report.summary.lost, report.summary.max_mar);
        csv << line;
      }
    }
    std::sort(rmses.begin(), rmses.end());
    std::sort(losts.begin(), losts.end());
    const double median = rmses[rmses.size() / 2];
    std::printf("%8.2f %12.5f %10d\n", ratio, median, losts[losts.size() / 2]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereo ego-motion tracking robust to large dynamic occlusions"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic stereo dataset");
  sim->add_option("--seed", sim_args.seed, "Random seed");
  sim->add_option("--frames", sim_args.frames, "Number of frames");
  sim->add_option("--fps", sim_args.fps, "Frame rate");
  sim->add_option("--noise-px", sim_args.noise_px, "Pixel noise sigma");
  sim->add_option("--flip-bits", sim_args.flip_bits, "Descriptor bits flipped per observation");
  sim->add_option("--scenario", sim_args.scenario,
                  "empty | parked | one-moving | mixed | crowded");
  sim->add_option("--path", sim_args.path, "Camera path: loop | line");
  sim->add_option("--target-occlusion", sim_args.target_occlusion,
                  "Inject a centered fake occlusion of this area ratio");
  sim->add_option("--out", sim_args.out, "Output dataset directory")->required();

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Track a dataset with one pipeline variant");
  run->add_option("--dataset", run_args.dataset, "Dataset directory")->required();
  run->add_option("--variant", run_args.variant,
                  "proposed | baseline-mask-all | no-mask | pixelwise-always | bbox-always");
  run->add_option("--tau-mar", run_args.tau_mar, "Masked-area-ratio threshold");
  run->add_option("--sigma-bkg", run_args.sigma_bkg, "Background 3D error sigma (m)");
  run->add_option("--ref-lag", run_args.ref_lag, "Reference frame lag (0: fps/3 rounded)");
  run->add_option("--sync-window", run_args.sync_window, "Time sync search window (s)");
  run->add_option("--out", run_args.out, "Report output directory");
  run->add_option("--dump-masks", run_args.dump_masks, "Write per-frame PGM masks here");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Align and score two trajectories");
  eval->add_option("--est", eval_args.est, "Estimated trajectory file")->required();
  eval->add_option("--gt", eval_args.gt, "Ground truth trajectory file")->required();
  eval->add_flag("--with-scale", eval_args.with_scale, "Similarity instead of rigid alignment");
  eval->add_option("--sync-window", eval_args.sync_window, "Time offset search window (s)");
  eval->add_option("--sync-step", eval_args.sync_step, "Time offset grid step (s)");
  eval->add_option("--out", eval_args.out, "Write the result as JSON");

  RocArgs roc_args;
  CLI::App* roc = app.add_subcommand("roc", "Classifier ROC over a sigma_bkg sweep");
  roc->add_option("--records", roc_args.records, "records.jsonl from a run")->required();
  roc->add_option("--sigma-min", roc_args.sigma_min, "Sweep start");
  roc->add_option("--sigma-max", roc_args.sigma_max, "Sweep end");
  roc->add_option("--steps", roc_args.steps, "Sweep steps");
  roc->add_option("--out", roc_args.out, "Write curve points as CSV");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep-occlusion",
                                       "Occlusion-ratio sweep on a static synthetic scene");
  sweep->add_option("--ratios", sweep_args.ratios, "Occlusion ratios")->delimiter(',');
  sweep->add_option("--seeds", sweep_args.seeds, "Seeds per ratio");
  sweep->add_option("--seed-base", sweep_args.seed_base, "First seed");
  sweep->add_option("--frames", sweep_args.frames, "Frames per run");
  sweep->add_option("--fps", sweep_args.fps, "Frame rate");
  sweep->add_option("--noise-px", sweep_args.noise_px, "Pixel noise sigma");
  sweep->add_option("--variant", sweep_args.variant, "Pipeline variant");
  sweep->add_option("--out", sweep_args.out, "Write per-run results as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (run->parsed()) return cmd_run(run_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (roc->parsed()) return cmd_roc(roc_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
