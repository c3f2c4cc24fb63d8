// Acceptance suite: one self-contained check per criterion, each printing a
// single pass/fail line. Run with no arguments for all criteria or with a list
// of criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sitetrack/dataset_io.hpp"
#include "sitetrack/experiment.hpp"
#include "sitetrack/rng.hpp"

using namespace sitetrack;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  return (v[(v.size() - 1) / 2] + v[v.size() / 2]) * 0.5;
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

CameraIntrinsics default_rig() { return default_intrinsics(); }

// ---------------------------------------------------------------------------
// C1: triangulate(project(p)) identity over 1e5 random stereo observations.

Outcome criterion_1() {
  Rng rng(1001);
  const auto start = std::chrono::steady_clock::now();
  double max_err = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    CameraIntrinsics K;
    K.fx = rng.uniform(200, 900);
    K.fy = rng.uniform(200, 900);
    K.cx = rng.uniform(300, 700);
    K.cy = rng.uniform(150, 400);
    K.baseline = rng.uniform(0.1, 2.0);
    K.width = 960;
    K.height = 540;
    const double z = rng.uniform(1.0, 100.0);
    const Point3 p(rng.uniform(-0.6, 0.6) * z, rng.uniform(-0.4, 0.4) * z, z);
    const Point3 q = triangulate_stereo(K, project_stereo(K, p));
    max_err = std::max(max_err, (q - p).norm());
  }
  const double seconds = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - start).count();
  return {max_err < 1e-6 && seconds < 5.0,
          fmt("max |triangulate(project(p)) - p| = %.2e m over %d obs in %.2f s "
              "(limits 1e-6, 5 s)", max_err, n, seconds)};
}

// ---------------------------------------------------------------------------
// C2: analytic Jacobians vs central differences; perturbed-init recovery.

Outcome criterion_2() {
  const CameraIntrinsics K = default_rig();
  Rng rng(1002);
  const double h = 1e-6;
  double worst_jac = 0.0;
  for (int state = 0; state < 100; ++state) {
    Twist t;
    for (int k = 0; k < 3; ++k) t(k) = rng.uniform(-3, 3);
    Eigen::Vector3d axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
    axis.normalize();
    t.tail<3>() = axis * rng.uniform(0.0, 1.2);
    const Pose C = pose_exp(t);

    const Point3 q(rng.uniform(-6, 6), rng.uniform(-3, 3), rng.uniform(2.0, 40.0));
    TrackMatch m;
    m.world = C.inverse() * q;
    m.u_l = K.fx * q.x() / q.z() + K.cx + rng.uniform(-4, 4);
    m.v_l = K.fy * q.y() / q.z() + K.cy + rng.uniform(-4, 4);
    if (state % 2 == 0) m.u_r = K.fx * (q.x() - K.baseline) / q.z() + K.cx + rng.uniform(-4, 4);

    const ResidualEval eval = evaluate_match_residual(K, m, C);
    if (!eval.valid) return {false, "residual evaluation unexpectedly invalid"};
    for (int col = 0; col < 6; ++col) {
      Twist plus = Twist::Zero(), minus = Twist::Zero();
      plus(col) = h;
      minus(col) = -h;
      const Eigen::Vector3d rp = evaluate_match_residual(K, m, pose_exp(plus) * C).residual;
      const Eigen::Vector3d rm = evaluate_match_residual(K, m, pose_exp(minus) * C).residual;
      for (int row = 0; row < eval.dims; ++row) {
        const double fd = (rp(row) - rm(row)) / (2.0 * h);
        const double analytic = eval.jacobian(row, col);
        const double rel = std::abs(fd - analytic) /
                           std::max({1.0, std::abs(fd), std::abs(analytic)});
        worst_jac = std::max(worst_jac, rel);
      }
    }
  }
  if (worst_jac > 1e-5) {
    return {false, fmt("jacobian mismatch: relative error %.2e > 1e-5", worst_jac)};
  }

  TrackingConfig cfg;
  double worst_t = 0.0, worst_r = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Twist t;
    for (int k = 0; k < 3; ++k) t(k) = rng.uniform(-3, 3);
    Eigen::Vector3d axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
    axis.normalize();
    t.tail<3>() = axis * rng.uniform(0.0, 1.0);
    const Pose gt = pose_exp(t);
    const Pose camera_from_world = gt.inverse();

    std::vector<TrackMatch> matches;
    while (matches.size() < 120) {
      const Point3 q(rng.uniform(-8, 8), rng.uniform(-3, 3), rng.uniform(3.0, 30.0));
      TrackMatch m;
      m.world = gt * q;
      const Point3 check = camera_from_world * m.world;
      if (check.z() <= 0.5) continue;
      const PixelStereo pix = project_stereo(K, check);
      m.u_l = pix.u_l;
      m.v_l = pix.v_l;
      if (matches.size() % 4 != 3) m.u_r = pix.u_r;
      m.scale_level = static_cast<int>(matches.size() % 4);
      matches.push_back(m);
    }

    Twist nudge;
    nudge.head<3>() =
        Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian()).normalized() * 0.1;
    Eigen::Vector3d naxis(rng.gaussian(), rng.gaussian(), rng.gaussian());
    naxis.normalize();
    nudge.tail<3>() = naxis * (2.0 * M_PI / 180.0);

    const SolveStats stats = solve_motion_only_ba(matches, K, pose_exp(nudge) * gt, cfg);
    worst_t = std::max(worst_t, (stats.pose.translation - gt.translation).norm());
    worst_r = std::max(worst_r, rotation_angle(stats.pose.inverse() * gt));
  }
  const bool pass = worst_t < 1e-6 && worst_r < 1e-6;
  return {pass, fmt("jacobian rel err %.1e (<=1e-5); recovery worst %.1e m / %.1e rad over 50 "
                    "frames (<=1e-6)", worst_jac, worst_t, worst_r)};
}

// ---------------------------------------------------------------------------
// C3: 40% coherent rigid outliers vs masked solve, paired seeds.

Outcome criterion_3() {
  const CameraIntrinsics K = default_rig();
  TrackingConfig cfg;
  std::vector<double> ratios;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(3000 + static_cast<std::uint64_t>(trial));
    Pose gt;
    gt.translation = {0.18, 0.0, 0.02};

    std::vector<TrackMatch> matches;
    const Pose camera_from_world = gt.inverse();
    while (matches.size() < 100) {
      const Point3 q(rng.uniform(-8, 8), rng.uniform(-3, 3), rng.uniform(3.0, 30.0));
      TrackMatch m;
      m.world = gt * q;
      const Point3 check = camera_from_world * m.world;
      if (check.z() <= 0.5) continue;
      const PixelStereo pix = project_stereo(K, check);
      m.u_l = pix.u_l;
      m.v_l = pix.v_l;
      m.u_r = pix.u_r;
      matches.push_back(m);
    }
    const Point3 object_shift(1.0, 0.0, 0.0);
    for (std::size_t i = 60; i < 100; ++i) {
      const Point3 q = camera_from_world * (matches[i].world + object_shift);
      const PixelStereo pix = project_stereo(K, q);
      matches[i].u_l = pix.u_l;
      matches[i].v_l = pix.v_l;
      matches[i].u_r = pix.u_r;
    }
    for (TrackMatch& m : matches) {
      m.u_l += rng.gaussian(0.5);
      m.v_l += rng.gaussian(0.5);
      *m.u_r += rng.gaussian(0.5);
    }
    const std::vector<TrackMatch> masked(matches.begin(), matches.begin() + 60);

    const Pose init = Pose::identity();
    const double unmasked_err =
        (solve_motion_only_ba(matches, K, init, cfg).pose.translation - gt.translation).norm();
    const double masked_err =
        (solve_motion_only_ba(masked, K, init, cfg).pose.translation - gt.translation).norm();
    ratios.push_back(unmasked_err / std::max(masked_err, 1e-12));
  }
  const double med = median(ratios);
  return {med >= 10.0,
          fmt("median pose-error ratio unmasked/masked = %.1fx over 20 paired trials (>= 10x)",
              med)};
}

// ---------------------------------------------------------------------------
// C4: hierarchical_mask vs a direct per-pixel transcription of the algorithm.

Outcome criterion_4() {
  const int W = 32, H = 18;

  auto oracle = [&](const std::vector<ObjectDetection>& dets, double tau,
                    MaskTier* tier_out) -> std::vector<char> {
    std::vector<char> bbox_bits(static_cast<std::size_t>(W) * H, 0);
    for (int v = 0; v < H; ++v) {
      for (int u = 0; u < W; ++u) {
        for (const ObjectDetection& det : dets) {
          if (det.a_priori_dynamic && det.bbox.clipped(W, H).contains(u, v)) {
            bbox_bits[static_cast<std::size_t>(v) * W + u] = 1;
            break;
          }
        }
      }
    }
    std::size_t count = 0;
    for (char b : bbox_bits) count += b;
    const double mar = static_cast<double>(count) / (W * H);
    if (mar >= tau) {
      std::vector<char> px_bits(static_cast<std::size_t>(W) * H, 0);
      for (int v = 0; v < H; ++v) {
        for (int u = 0; u < W; ++u) {
          for (const ObjectDetection& det : dets) {
            if (!det.a_priori_dynamic) continue;
            const BoundingBox clipped = det.bbox.clipped(W, H);
            const bool inside = det.pixel_region
                                    ? det.pixel_region->clipped(clipped).contains(u, v)
                                    : clipped.contains(u, v);
            if (inside) {
              px_bits[static_cast<std::size_t>(v) * W + u] = 1;
              break;
            }
          }
        }
      }
      *tier_out = MaskTier::PixelWise;
      return px_bits;
    }
    *tier_out = MaskTier::BBox;
    return bbox_bits;
  };

  auto matches_oracle = [&](const std::vector<ObjectDetection>& dets, double tau) {
    MaskTier expected_tier;
    const std::vector<char> expected = oracle(dets, tau, &expected_tier);
    const OcclusionMask mask = hierarchical_mask(dets, W, H, MarThreshold{tau});
    if (mask.tier() != expected_tier) return false;
    for (int v = 0; v < H; ++v) {
      for (int u = 0; u < W; ++u) {
        if (mask.test(u, v) != static_cast<bool>(expected[static_cast<std::size_t>(v) * W + u])) {
          return false;
        }
      }
    }
    return true;
  };

  auto boxed = [](int id, int u0, int v0, int u1, int v1) {
    ObjectDetection det;
    det.object_id = id;
    det.a_priori_dynamic = true;
    det.bbox = {u0, v0, u1, v1};
    det.pixel_region = PixelRegion::from_box({u0, v0, (u0 + u1) / 2, v1});  // left half
    return det;
  };

  const auto start = std::chrono::steady_clock::now();
  long long cases = 0, failures = 0;

  // every single-box layout on the grid
  for (int u0 = 0; u0 < W; ++u0) {
    for (int u1 = u0 + 1; u1 <= W; ++u1) {
      for (int v0 = 0; v0 < H; ++v0) {
        for (int v1 = v0 + 1; v1 <= H; ++v1) {
          ++cases;
          if (!matches_oracle({boxed(0, u0, v0, u1, v1)}, 0.5)) ++failures;
        }
      }
    }
  }

  // randomized multi-box layouts across several thresholds
  Rng rng(4242);
  const double taus[] = {0.2, 0.35, 0.5, 0.65, 0.8};
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<ObjectDetection> dets;
    const int n = rng.uniform_int(2, 3);
    for (int i = 0; i < n; ++i) {
      const int u0 = rng.uniform_int(0, W - 2);
      const int v0 = rng.uniform_int(0, H - 2);
      dets.push_back(boxed(i, u0, v0, rng.uniform_int(u0 + 1, W), rng.uniform_int(v0 + 1, H)));
      if (rng.uniform() < 0.3) dets.back().pixel_region.reset();  // bbox fallback path
    }
    ++cases;
    if (!matches_oracle(dets, taus[trial % 5])) ++failures;
  }

  const double seconds = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - start).count();
  return {failures == 0 && seconds < 10.0,
          fmt("%lld layouts, %lld mismatches in %.1f s (need 0 mismatches, < 10 s)", cases,
              failures, seconds)};
}

// ---------------------------------------------------------------------------
// C5: occlusion-ratio sweep shape on a static scene.

Outcome criterion_5() {
  const std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::map<double, std::vector<double>> rmse;

  for (int seed = 1; seed <= 10; ++seed) {
    SimConfig cfg = scenario_config("empty");
    cfg.frames = 120;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const SimulatedDataset base = make_dataset(cfg);

    ExperimentConfig config;
    config.tracking.classifier.ref_lag_n = default_ref_lag(cfg.fps);
    for (double ratio : ratios) {
      const SimulatedDataset ds = inject_fixed_occlusion(base, ratio);
      const RunReport report = run_experiment(ds, Variant::BaselineMaskAll, config);
      rmse[ratio].push_back(std::isfinite(report.summary.at_rmse)
                                ? report.summary.at_rmse
                                : std::numeric_limits<double>::infinity());
    }
  }

  const double m01 = median(rmse[0.1]);
  const double m03 = median(rmse[0.3]);
  const double m05 = median(rmse[0.5]);
  const double m07 = median(rmse[0.7]);
  const bool blowup = m07 >= 3.0 * m03;
  const bool flat = m05 <= 1.5 * m01;
  return {blowup && flat,
          fmt("median AT-RMSE: r0.1=%.4f r0.3=%.4f r0.5=%.4f r0.7=%.4f | r0.7/r0.3=%.1fx "
              "(>=3), r0.5/r0.1=%.2fx (<=1.5)", m01, m03, m05, m07, m07 / m03, m05 / m01)};
}

// ---------------------------------------------------------------------------
// C6: mask-tier ordering and modeled cost on a large-occlusion sequence.

Outcome criterion_6() {
  std::vector<double> rmse_px, rmse_hier, rmse_bbox, cost_hier, cost_px, peak_mar;
  for (int seed = 1; seed <= 10; ++seed) {
    SimConfig cfg = scenario_config("crowded");
    cfg.frames = 120;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const SimulatedDataset ds = make_dataset(cfg);

    ExperimentConfig config;
    config.tracking.classifier.ref_lag_n = default_ref_lag(cfg.fps);

    const RunReport px = run_experiment(ds, Variant::PixelwiseAlways, config);
    const RunReport hier = run_experiment(ds, Variant::Proposed, config);
    const RunReport bbox = run_experiment(ds, Variant::BBoxAlways, config);
    rmse_px.push_back(px.summary.at_rmse);
    rmse_hier.push_back(hier.summary.at_rmse);
    rmse_bbox.push_back(bbox.summary.at_rmse);
    cost_hier.push_back(hier.summary.total_mask_cost_seconds);
    cost_px.push_back(px.summary.total_mask_cost_seconds);
    peak_mar.push_back(bbox.summary.max_mar);
  }
  const double mp = median(rmse_px), mh = median(rmse_hier), mb = median(rmse_bbox);
  const double peak = median(peak_mar);
  const bool ordering = mp <= mh * 1.05 && mh <= mb * 1.05;
  const bool cost = median(cost_hier) < median(cost_px);
  const bool occlusion = peak >= 0.6;
  return {ordering && cost && occlusion,
          fmt("median AT-RMSE px=%.4f hier=%.4f bbox=%.4f (px<=1.05*hier<=1.05^2*bbox); "
              "mask cost hier=%.1fs < px=%.1fs; bbox mar peak %.2f (>=0.6)", mp, mh, mb,
              median(cost_hier), median(cost_px), peak)};
}

// ---------------------------------------------------------------------------
// C7: unmasking a large parked object: two-round vs round-1-only.

Outcome criterion_7() {
  std::vector<double> rmse_two, rmse_one;
  long long associated = 0, classified_static = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    SimConfig cfg = scenario_config("parked");
    cfg.frames = 120;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const SimulatedDataset ds = make_dataset(cfg);

    ExperimentConfig config;
    config.tracking.classifier.ref_lag_n = default_ref_lag(cfg.fps);

    const RunReport two = run_experiment(ds, Variant::Proposed, config);
    const RunReport one = run_experiment(ds, Variant::BaselineMaskAll, config);
    rmse_two.push_back(two.summary.at_rmse);
    rmse_one.push_back(one.summary.at_rmse);

    for (const FrameRecord& r : two.records) {
      const auto it = r.states.find(0);  // the parked machine
      if (it == r.states.end() || it->second.predicted == MotionLabel::Unknown) continue;
      ++associated;
      if (it->second.predicted == MotionLabel::Static) ++classified_static;
    }
  }
  const double m_two = median(rmse_two), m_one = median(rmse_one);
  const double static_fraction =
      associated > 0 ? static_cast<double>(classified_static) / associated : 0.0;
  const bool pass = m_two <= m_one + 1e-12 && static_fraction >= 0.9 && associated > 0;
  return {pass, fmt("median AT-RMSE two-round %.4f <= round-1-only %.4f; parked object static "
                    "in %.1f%% of %lld associated frames (>= 90%%)", m_two, m_one,
                    100.0 * static_fraction, associated)};
}

// ---------------------------------------------------------------------------
// C8: classifier ROC over the sigma sweep on a mixed scene.

Outcome criterion_8() {
  std::vector<RocRecord> records;
  for (int seed = 1; seed <= 2; ++seed) {
    SimConfig cfg = scenario_config("mixed");
    cfg.frames = 120;
    cfg.seed = static_cast<std::uint64_t>(seed);
    ExperimentConfig config;
    config.tracking.classifier.ref_lag_n = default_ref_lag(cfg.fps);
    const RunReport report = run_experiment(make_dataset(cfg), Variant::Proposed, config);
    const std::vector<RocRecord> more = roc_records_from_report(report);
    records.insert(records.end(), more.begin(), more.end());
  }
  if (records.size() < 200) {
    return {false, fmt("only %zu object-frame records, need >= 200", records.size())};
  }

  const std::vector<double> sweep = linspace(0.0, 0.6, 61);
  const RocCurve curve = roc_auc(records, sweep);
  bool monotone = true;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (curve.points[i].true_positive_rate < curve.points[i - 1].true_positive_rate - 1e-12 ||
        curve.points[i].false_positive_rate < curve.points[i - 1].false_positive_rate - 1e-12) {
      monotone = false;
    }
  }
  return {monotone && curve.auc > 0.9,
          fmt("%zu records, ROC monotone=%s, AUC=%.3f (> 0.9; the paper's real-data 0.737 is "
              "context, not the target)", records.size(), monotone ? "yes" : "no", curve.auc)};
}

// ---------------------------------------------------------------------------
// C9: evaluation toolkit recovery of a known transform and time offset.

Outcome criterion_9() {
  Trajectory gt;
  for (int i = 0; i < 120; ++i) {
    Trajectory::Entry e;
    e.timestamp = i / 6.0;
    const double s = 0.18 * i;
    e.pose.translation = {s, 3.0 * std::sin(0.12 * s), 0.05 * s};
    gt.entries.push_back(e);
  }

  Pose known;
  known.rotation = Eigen::AngleAxisd(M_PI / 6.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  known.translation = {5, 0, 0};
  Trajectory est = gt;
  for (auto& e : est.entries) e.pose.translation = known * e.pose.translation;

  const AlignmentResult rigid = umeyama_align(est, gt, false);
  const Pose recovered = rigid.transform.inverse();
  const double rot_err = (recovered.rotation - known.rotation).cwiseAbs().maxCoeff();
  const double t_err = (recovered.translation - known.translation).norm();

  Trajectory scaled = gt;
  for (auto& e : scaled.entries) e.pose.translation *= 2.0;
  const AlignmentResult sim = umeyama_align(scaled, gt, true);
  const double scale_err = std::abs(sim.scale - 0.5);

  Trajectory shifted = gt;
  for (auto& e : shifted.entries) e.timestamp += 1.7;
  const double offset = sync_time_offset(gt, shifted, 3.0, 0.1);
  const double offset_err = std::abs(offset + 1.7);

  const bool pass = rigid.at_rmse <= 1e-9 && rot_err <= 1e-9 && t_err <= 1e-9 &&
                    sim.at_rmse <= 1e-9 && scale_err <= 1e-9 && offset_err <= 0.1 + 1e-9;
  return {pass, fmt("transform recovery rmse=%.1e rot=%.1e t=%.1e scale_err=%.1e (<=1e-9); "
                    "offset err %.3f s (<= one 0.1 s step)", rigid.at_rmse, rot_err, t_err,
                    scale_err, offset_err)};
}

// ---------------------------------------------------------------------------
// C10: CLI determinism: byte-identical datasets, trajectories and records.

#ifndef SITETRACK_CLI_PATH
#define SITETRACK_CLI_PATH "sitetrack"
#endif

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_10() {
  const std::filesystem::path root =
      std::filesystem::temp_directory_path() /
      ("sitetrack_acceptance_c10_" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);

  auto run_once = [&](const std::string& tag) -> bool {
    const std::string ds = (root / (tag + "_ds")).string();
    const std::string out = (root / (tag + "_run")).string();
    const std::string cli = SITETRACK_CLI_PATH;
    const std::string sim_cmd = cli + " simulate --seed 7 --frames 60 --scenario mixed --out " +
                                ds + " > /dev/null 2>&1";
    const std::string run_cmd = cli + " run --dataset " + ds +
                                " --variant proposed --out " + out + " > /dev/null 2>&1";
    return std::system(sim_cmd.c_str()) == 0 && std::system(run_cmd.c_str()) == 0;
  };

  if (!run_once("a") || !run_once("b")) {
    return {false, "CLI invocation failed"};
  }

  std::vector<std::string> mismatches;
  const std::pair<const char*, const char*> files[] = {
      {"a_ds/meta.json", "b_ds/meta.json"},
      {"a_ds/frames.jsonl", "b_ds/frames.jsonl"},
      {"a_ds/groundtruth.jsonl", "b_ds/groundtruth.jsonl"},
      {"a_run/trajectory.txt", "b_run/trajectory.txt"},
      {"a_run/records.jsonl", "b_run/records.jsonl"},
  };
  for (const auto& [fa, fb] : files) {
    const std::string a = slurp(root / fa);
    if (a.empty() || a != slurp(root / fb)) mismatches.push_back(fa);
  }
  std::filesystem::remove_all(root);
  if (!mismatches.empty()) {
    std::string detail = "files differ or are empty:";
    for (const std::string& m : mismatches) detail += " " + m;
    return {false, detail};
  }
  return {true, "simulate + run twice: dataset, trajectory and per-frame records byte-identical"};
}

// ---------------------------------------------------------------------------
// C11: throughput on ~1000-feature frames.

Outcome criterion_11() {
  SimConfig cfg = scenario_config("mixed");
  cfg.frames = 120;
  cfg.seed = 3;
  const SimulatedDataset ds = make_dataset(cfg);

  std::size_t features = 0;
  for (const FrameObservation& f : ds.frames) features += f.features.size();
  const double mean_features = static_cast<double>(features) / ds.frames.size();

  ExperimentConfig config;
  config.tracking.classifier.ref_lag_n = default_ref_lag(cfg.fps);
  const RunReport report = run_experiment(ds, Variant::Proposed, config);

  std::vector<double> times;
  for (const FrameRecord& r : report.records) times.push_back(r.track_seconds);
  const double med_ms = median(times) * 1e3;
  return {med_ms < 50.0, fmt("median tracking time %.2f ms/frame at %.0f features/frame "
                             "(< 50 ms, informational)", med_ms, mean_features)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "geometry-round-trip", criterion_1},
      {2, "solver-correctness", criterion_2},
      {3, "masking-motivation", criterion_3},
      {4, "hierarchical-equivalence", criterion_4},
      {5, "occlusion-sweep-shape", criterion_5},
      {6, "mask-tier-ordering", criterion_6},
      {7, "static-unmasking-gain", criterion_7},
      {8, "classifier-roc", criterion_8},
      {9, "evaluation-toolkit", criterion_9},
      {10, "determinism", criterion_10},
      {11, "throughput", criterion_11},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] C%-2d %-26s %s [%.1f s]\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures;
}
