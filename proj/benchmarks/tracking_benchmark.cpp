#include <benchmark/benchmark.h>

#include "sitetrack/experiment.hpp"
#include "sitetrack/sim.hpp"

using namespace sitetrack;

namespace {

SimulatedDataset benchmark_dataset(const char* scenario, int frames) {
  SimConfig cfg = scenario_config(scenario);
  cfg.frames = frames;
  cfg.seed = 77;
  return make_dataset(cfg);
}

void BM_ProjectTriangulate(benchmark::State& state) {
  const CameraIntrinsics K = default_intrinsics();
  const Point3 p(1.2, -0.4, 12.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(triangulate_stereo(K, project_stereo(K, p)));
  }
}
BENCHMARK(BM_ProjectTriangulate);

void BM_HierarchicalMask(benchmark::State& state) {
  const SimulatedDataset ds = benchmark_dataset("crowded", 2);
  const FrameObservation& frame = ds.frames[1];
  const MarThreshold tau{0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hierarchical_mask(frame.detections, frame.intrinsics.width,
                                               frame.intrinsics.height, tau));
  }
}
BENCHMARK(BM_HierarchicalMask);

void BM_MatchAndSolve(benchmark::State& state) {
  const SimulatedDataset ds = benchmark_dataset("empty", 3);
  TrackingConfig cfg;
  Tracker bootstrap_tracker(cfg, policy_for(Variant::Proposed));
  bootstrap_tracker.track_frame(ds.frames[0]);
  const std::vector<MapPoint> map = bootstrap_tracker.map_points();

  const FrameObservation& frame = ds.frames[1];
  const Pose predicted = ds.groundtruth[0].camera_pose.inverse() * ds.groundtruth[1].camera_pose;
  const OcclusionMask blank(frame.intrinsics.width, frame.intrinsics.height);
  for (auto _ : state) {
    const auto matches = match_map_points(map, frame, predicted, blank, cfg);
    benchmark::DoNotOptimize(solve_motion_only_ba(matches, frame.intrinsics, predicted, cfg));
  }
}
BENCHMARK(BM_MatchAndSolve);

void BM_TrackFrame(benchmark::State& state) {
  const SimulatedDataset ds = benchmark_dataset("mixed", 60);
  TrackingConfig cfg;
  cfg.classifier.ref_lag_n = default_ref_lag(ds.meta.fps);
  Tracker tracker(cfg, policy_for(Variant::Proposed));
  std::size_t next = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tracker.track_frame(ds.frames[next]));
    next = (next + 1) % ds.frames.size();
    if (next == 0) {
      state.PauseTiming();
      tracker = Tracker(cfg, policy_for(Variant::Proposed));
      state.ResumeTiming();
    }
  }
}
BENCHMARK(BM_TrackFrame)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
