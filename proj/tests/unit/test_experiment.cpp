#include <doctest.h>

#include "sitetrack/experiment.hpp"
#include "test_helpers.hpp"

using namespace sitetrack;

namespace {

SimulatedDataset quick_dataset(const std::string& scenario, int frames, std::uint64_t seed = 2) {
  SimConfig cfg = scenario_config(scenario);
  cfg.frames = frames;
  cfg.seed = seed;
  return make_dataset(cfg);
}

ExperimentConfig quick_config() {
  ExperimentConfig config;
  config.tracking.classifier.ref_lag_n = 2;
  return config;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("variant names round trip") {
  for (Variant v : {Variant::Proposed, Variant::BaselineMaskAll, Variant::NoMask,
                    Variant::PixelwiseAlways, Variant::BBoxAlways}) {
    CHECK(variant_from_string(to_string(v)) == v);
  }
  CHECK_THROWS_AS(variant_from_string("bogus"), ConfigInvalid);
}

TEST_CASE("variant purity") {
  const SimulatedDataset ds = quick_dataset("crowded", 24);
  const ExperimentConfig config = quick_config();

  const RunReport bbox = run_experiment(ds, Variant::BBoxAlways, config);
  for (const FrameRecord& r : bbox.records) CHECK(r.tier == MaskTier::BBox);

  const RunReport pixel = run_experiment(ds, Variant::PixelwiseAlways, config);
  for (const FrameRecord& r : pixel.records) CHECK(r.tier == MaskTier::PixelWise);

  const RunReport none = run_experiment(ds, Variant::NoMask, config);
  for (const FrameRecord& r : none.records) CHECK(r.mar == doctest::Approx(0.0));
  CHECK(none.summary.total_mask_cost_seconds == doctest::Approx(0.0));
}

TEST_CASE("report lists every frame exactly once, in order") {
  const SimulatedDataset ds = quick_dataset("mixed", 18);
  const RunReport report = run_experiment(ds, Variant::Proposed, quick_config());
  REQUIRE(report.records.size() == ds.frames.size());
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    CHECK(report.records[i].frame == static_cast<int>(i));
    CHECK(report.records[i].timestamp == ds.frames[i].timestamp);
  }
}

TEST_CASE("static scene: no-mask and proposed are both accurate") {
  const SimulatedDataset ds = quick_dataset("empty", 45, 8);
  const RunReport no_mask = run_experiment(ds, Variant::NoMask, quick_config());
  const RunReport proposed = run_experiment(ds, Variant::Proposed, quick_config());
  CHECK(no_mask.summary.lost == 0);
  CHECK(proposed.summary.lost == 0);
  CHECK(std::isfinite(no_mask.summary.at_rmse));
  CHECK(std::isfinite(proposed.summary.at_rmse));
  CHECK(no_mask.summary.at_rmse <= 3.0 * proposed.summary.at_rmse + 1e-6);
  CHECK(proposed.summary.at_rmse <= 3.0 * no_mask.summary.at_rmse + 1e-6);
}

TEST_CASE("mask cost accounting matches the tier counts") {
  const SimulatedDataset ds = quick_dataset("crowded", 20);
  const RunReport report = run_experiment(ds, Variant::Proposed, quick_config());
  const int pixel_frames = report.summary.pixel_tier_frames;
  const int bbox_frames = report.summary.frames - pixel_frames;
  const double expected = mask_cost(MaskTier::BBox, static_cast<std::size_t>(bbox_frames)) +
                          mask_cost(MaskTier::PixelWise, static_cast<std::size_t>(pixel_frames));
  CHECK(report.summary.total_mask_cost_seconds == doctest::Approx(expected));
}

TEST_CASE("written reports reload and stay deterministic") {
  const SimulatedDataset ds = quick_dataset("mixed", 16, 4);
  testing::TempDir dir_a("report_a"), dir_b("report_b");

  const RunReport a = run_experiment(ds, Variant::Proposed, quick_config());
  write_run_report(a, dir_a.path());
  const RunReport b = run_experiment(ds, Variant::Proposed, quick_config());
  write_run_report(b, dir_b.path());

  // per-frame records and the trajectory are wall-clock free: byte identical
  CHECK(testing::read_file(dir_a.path() / "records.jsonl") ==
        testing::read_file(dir_b.path() / "records.jsonl"));
  CHECK(testing::read_file(dir_a.path() / "trajectory.txt") ==
        testing::read_file(dir_b.path() / "trajectory.txt"));

  const Trajectory reloaded = read_tum_trajectory(dir_a.path() / "trajectory.txt");
  CHECK(reloaded.size() == a.trajectory.size());
  CHECK(static_cast<int>(reloaded.size()) == a.summary.tracked);

  const std::vector<RocRecord> from_report = roc_records_from_report(a);
  const std::vector<RocRecord> from_file = read_roc_records(dir_a.path() / "records.jsonl");
  REQUIRE(from_file.size() == from_report.size());
  for (std::size_t i = 0; i < from_file.size(); ++i) {
    CHECK(from_file[i].score == doctest::Approx(from_report[i].score));
    CHECK(from_file[i].gt_static == from_report[i].gt_static);
  }

  const std::string csv = testing::read_file(dir_a.path() / "summary.csv");
  CHECK(csv.find("dataset,variant,frames") == 0);
  CHECK(csv.find("proposed") != std::string::npos);
}

TEST_CASE("classification records carry usable confusion counts") {
  const SimulatedDataset ds = quick_dataset("mixed", 30, 6);
  const RunReport report = run_experiment(ds, Variant::Proposed, quick_config());
  const ConfusionCounts& c = report.summary.confusion;
  CHECK(c.true_positive > 0);   // the parked machine gets recognized as static
  CHECK(c.true_negative > 0);   // the moving machine stays dynamic
  // the classifier should be mostly right on this easy scene
  const int correct = c.true_positive + c.true_negative;
  const int wrong = c.false_positive + c.false_negative;
  CHECK(correct > 4 * wrong);
}

TEST_CASE("lost-heavy input still produces a flagged report") {
  // a dataset whose frames carry almost no features
  SimConfig cfg = scenario_config("empty");
  cfg.frames = 5;
  cfg.background_density = 0.002;
  const SimulatedDataset ds = make_dataset(cfg);
  const RunReport report = run_experiment(ds, Variant::Proposed, quick_config());
  CHECK(report.summary.lost == report.summary.frames);
  CHECK(!std::isfinite(report.summary.at_rmse));
  testing::TempDir dir("lost");
  CHECK_NOTHROW(write_run_report(report, dir.path()));
}

}  // TEST_SUITE
