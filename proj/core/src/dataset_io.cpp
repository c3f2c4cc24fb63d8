#include "sitetrack/dataset_io.hpp"

#include <fstream>

#include <json.hpp>

namespace sitetrack {

using nlohmann::json;

std::string descriptor_to_hex(const Descriptor& d) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (std::uint64_t word : d) {
    for (int shift = 60; shift >= 0; shift -= 4) {
      out.push_back(digits[(word >> shift) & 0xf]);
    }
  }
  return out;
}

Descriptor descriptor_from_hex(std::string_view hex) {
  if (hex.size() != 64) throw FormatError("descriptor must be 64 hex characters");
  Descriptor d{};
  for (std::size_t i = 0; i < 64; ++i) {
    const char c = hex[i];
    std::uint64_t nibble;
    if (c >= '0' && c <= '9') {
      nibble = static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      nibble = static_cast<std::uint64_t>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      nibble = static_cast<std::uint64_t>(c - 'A' + 10);
    } else {
      throw FormatError("descriptor contains a non-hex character");
    }
    d[i / 16] = (d[i / 16] << 4) | nibble;
  }
  return d;
}

namespace {

json detection_to_json(const ObjectDetection& det) {
  json j;
  j["id"] = det.object_id;
  j["label"] = det.class_label;
  j["dynamic"] = det.a_priori_dynamic;
  j["bbox"] = {det.bbox.u_min, det.bbox.v_min, det.bbox.u_max, det.bbox.v_max};
  if (det.pixel_region) {
    json runs = json::array();
    for (const PixelRun& run : det.pixel_region->runs()) {
      runs.push_back({run.v, run.u_begin, run.u_end});
    }
    j["region"] = std::move(runs);
  }
  return j;
}

json frame_to_json(const FrameObservation& frame) {
  json j;
  j["t"] = frame.timestamp;
  json features = json::array();
  for (const StereoFeature& f : frame.features) {
    json entry = json::array();
    entry.push_back(f.u_l);
    entry.push_back(f.v_l);
    if (f.u_r) {
      entry.push_back(*f.u_r);
    } else {
      entry.push_back(nullptr);
    }
    entry.push_back(descriptor_to_hex(f.descriptor));
    entry.push_back(f.scale_level);
    entry.push_back(f.landmark_hint);
    features.push_back(std::move(entry));
  }
  j["features"] = std::move(features);
  json detections = json::array();
  for (const ObjectDetection& det : frame.detections) detections.push_back(detection_to_json(det));
  j["detections"] = std::move(detections);
  return j;
}

json groundtruth_to_json(const GroundTruthFrame& gt) {
  json j;
  j["t"] = gt.timestamp;
  const Eigen::Quaterniond q = to_quaternion(gt.camera_pose);
  j["p"] = {gt.camera_pose.translation.x(), gt.camera_pose.translation.y(),
            gt.camera_pose.translation.z()};
  j["q"] = {q.x(), q.y(), q.z(), q.w()};
  json states = json::object();
  for (const auto& [id, label] : gt.object_states) {
    states[std::to_string(id)] = to_string(label);
  }
  j["states"] = std::move(states);
  return j;
}

struct LineContext {
  std::string file;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(file + ":" + std::to_string(line) + ": " + what);
  }
};

json parse_line(const std::string& text, const LineContext& ctx) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) ctx.fail("not valid JSON");
  if (!j.is_object()) ctx.fail("expected a JSON object");
  return j;
}

double require_number(const json& j, const char* key, const LineContext& ctx) {
  if (!j.contains(key) || !j[key].is_number()) {
    ctx.fail(std::string("missing numeric field '") + key + "'");
  }
  return j[key].get<double>();
}

ObjectDetection detection_from_json(const json& j, const CameraIntrinsics& K,
                                    const LineContext& ctx) {
  ObjectDetection det;
  if (!j.contains("id") || !j["id"].is_number_integer()) ctx.fail("detection missing 'id'");
  det.object_id = j["id"].get<int>();
  det.class_label = j.value("label", std::string("object"));
  if (!j.contains("dynamic") || !j["dynamic"].is_boolean()) {
    ctx.fail("detection missing boolean 'dynamic'");
  }
  det.a_priori_dynamic = j["dynamic"].get<bool>();
  if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4) {
    ctx.fail("detection missing 4-element 'bbox'");
  }
  det.bbox = {j["bbox"][0].get<int>(), j["bbox"][1].get<int>(), j["bbox"][2].get<int>(),
              j["bbox"][3].get<int>()};
  if (det.bbox.u_min >= det.bbox.u_max || det.bbox.v_min >= det.bbox.v_max) {
    ctx.fail("detection bbox is empty");
  }
  det.bbox = det.bbox.clipped(K.width, K.height);
  if (det.bbox.empty()) ctx.fail("detection bbox lies outside the image");
  if (j.contains("region")) {
    if (!j["region"].is_array()) ctx.fail("detection 'region' must be an array of runs");
    std::vector<PixelRun> runs;
    for (const json& r : j["region"]) {
      if (!r.is_array() || r.size() != 3) ctx.fail("region run must be [v, u_begin, u_end]");
      runs.push_back({r[0].get<int>(), r[1].get<int>(), r[2].get<int>()});
    }
    det.pixel_region = PixelRegion::from_runs(std::move(runs)).clipped(det.bbox);
  }
  return det;
}

FrameObservation frame_from_json(const json& j, const CameraIntrinsics& K,
                                 const LineContext& ctx) {
  FrameObservation frame;
  frame.timestamp = require_number(j, "t", ctx);
  frame.intrinsics = K;
  if (!j.contains("features") || !j["features"].is_array()) ctx.fail("missing 'features' array");
  for (const json& e : j["features"]) {
    if (!e.is_array() || e.size() < 5) {
      ctx.fail("feature must be [u_l, v_l, u_r|null, descriptor, scale, hint?]");
    }
    StereoFeature f;
    f.u_l = e[0].get<double>();
    f.v_l = e[1].get<double>();
    if (!e[2].is_null()) f.u_r = e[2].get<double>();
    if (!e[3].is_string()) ctx.fail("feature descriptor must be a hex string");
    try {
      f.descriptor = descriptor_from_hex(e[3].get<std::string>());
    } catch (const FormatError& err) {
      ctx.fail(err.what());
    }
    f.scale_level = e[4].get<int>();
    if (f.scale_level < 0 || f.scale_level > 7) ctx.fail("feature scale level out of [0, 7]");
    if (e.size() > 5) f.landmark_hint = e[5].get<std::int64_t>();
    if (f.u_r && f.u_l - *f.u_r <= 0.0) ctx.fail("stereo feature with non-positive disparity");
    frame.features.push_back(std::move(f));
  }
  if (j.contains("detections")) {
    if (!j["detections"].is_array()) ctx.fail("'detections' must be an array");
    for (const json& d : j["detections"]) {
      frame.detections.push_back(detection_from_json(d, K, ctx));
    }
  }
  return frame;
}

GroundTruthFrame groundtruth_from_json(const json& j, const LineContext& ctx) {
  GroundTruthFrame gt;
  gt.timestamp = require_number(j, "t", ctx);
  if (!j.contains("p") || !j["p"].is_array() || j["p"].size() != 3) ctx.fail("missing 'p' [x,y,z]");
  if (!j.contains("q") || !j["q"].is_array() || j["q"].size() != 4) {
    ctx.fail("missing 'q' [qx,qy,qz,qw]");
  }
  const Eigen::Vector3d t(j["p"][0].get<double>(), j["p"][1].get<double>(),
                          j["p"][2].get<double>());
  const Eigen::Quaterniond q(j["q"][3].get<double>(), j["q"][0].get<double>(),
                             j["q"][1].get<double>(), j["q"][2].get<double>());
  if (q.norm() < 1e-9) ctx.fail("zero quaternion");
  gt.camera_pose = pose_from_quaternion(q, t);
  if (j.contains("states")) {
    if (!j["states"].is_object()) ctx.fail("'states' must be an object");
    for (const auto& [key, value] : j["states"].items()) {
      MotionLabel label;
      const std::string text = value.get<std::string>();
      if (text == "static") {
        label = MotionLabel::Static;
      } else if (text == "dynamic") {
        label = MotionLabel::Dynamic;
      } else if (text == "unknown") {
        label = MotionLabel::Unknown;
      } else {
        ctx.fail("unknown motion state '" + text + "'");
      }
      try {
        gt.object_states[std::stoi(key)] = label;
      } catch (const std::exception&) {
        ctx.fail("state key '" + key + "' is not an integer id");
      }
    }
  }
  return gt;
}

}  // namespace

void export_dataset(const SimulatedDataset& dataset, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("export_dataset: cannot create " + dir.string());

  {
    json meta;
    meta["version"] = dataset.meta.version;
    meta["scenario"] = dataset.meta.scenario;
    meta["seed"] = dataset.meta.seed;
    meta["fps"] = dataset.meta.fps;
    meta["frame_count"] = dataset.meta.frame_count;
    meta["camera"] = {{"fx", dataset.meta.intrinsics.fx},       {"fy", dataset.meta.intrinsics.fy},
                      {"cx", dataset.meta.intrinsics.cx},       {"cy", dataset.meta.intrinsics.cy},
                      {"baseline", dataset.meta.intrinsics.baseline},
                      {"width", dataset.meta.intrinsics.width}, {"height", dataset.meta.intrinsics.height}};
    std::ofstream out(dir / "meta.json", std::ios::binary);
    if (!out) throw IoError("export_dataset: cannot write meta.json");
    out << meta.dump() << "\n";
  }
  {
    std::ofstream out(dir / "frames.jsonl", std::ios::binary);
    if (!out) throw IoError("export_dataset: cannot write frames.jsonl");
    for (const FrameObservation& frame : dataset.frames) {
      out << frame_to_json(frame).dump() << "\n";
    }
  }
  {
    std::ofstream out(dir / "groundtruth.jsonl", std::ios::binary);
    if (!out) throw IoError("export_dataset: cannot write groundtruth.jsonl");
    for (const GroundTruthFrame& gt : dataset.groundtruth) {
      out << groundtruth_to_json(gt).dump() << "\n";
    }
  }
}

SimulatedDataset import_dataset(const std::filesystem::path& dir) {
  SimulatedDataset dataset;

  {
    std::ifstream in(dir / "meta.json", std::ios::binary);
    if (!in) throw IoError("import_dataset: cannot open " + (dir / "meta.json").string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    LineContext ctx{"meta.json", 1};
    const json meta = parse_line(text, ctx);
    if (!meta.contains("version") || !meta["version"].is_number_integer()) {
      ctx.fail("missing integer 'version'");
    }
    dataset.meta.version = meta["version"].get<int>();
    if (dataset.meta.version != 1) {
      ctx.fail("unsupported format version " + std::to_string(dataset.meta.version));
    }
    dataset.meta.scenario = meta.value("scenario", std::string());
    dataset.meta.seed = meta.value("seed", std::uint64_t{0});
    dataset.meta.fps = require_number(meta, "fps", ctx);
    if (!(dataset.meta.fps > 0.0)) ctx.fail("fps must be positive");
    dataset.meta.frame_count = static_cast<int>(require_number(meta, "frame_count", ctx));
    if (!meta.contains("camera") || !meta["camera"].is_object()) ctx.fail("missing 'camera'");
    const json& cam = meta["camera"];
    dataset.meta.intrinsics.fx = require_number(cam, "fx", ctx);
    dataset.meta.intrinsics.fy = require_number(cam, "fy", ctx);
    dataset.meta.intrinsics.cx = require_number(cam, "cx", ctx);
    dataset.meta.intrinsics.cy = require_number(cam, "cy", ctx);
    dataset.meta.intrinsics.baseline = require_number(cam, "baseline", ctx);
    dataset.meta.intrinsics.width = static_cast<int>(require_number(cam, "width", ctx));
    dataset.meta.intrinsics.height = static_cast<int>(require_number(cam, "height", ctx));
    try {
      dataset.meta.intrinsics.validate();
    } catch (const ConfigInvalid& err) {
      ctx.fail(err.what());
    }
  }

  {
    std::ifstream in(dir / "frames.jsonl", std::ios::binary);
    if (!in) throw IoError("import_dataset: cannot open " + (dir / "frames.jsonl").string());
    std::string line;
    LineContext ctx{"frames.jsonl", 0};
    double last_t = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
      ++ctx.line;
      if (line.empty()) continue;
      const json j = parse_line(line, ctx);
      FrameObservation frame = frame_from_json(j, dataset.meta.intrinsics, ctx);
      if (frame.timestamp <= last_t) ctx.fail("timestamps must be strictly increasing");
      last_t = frame.timestamp;
      dataset.frames.push_back(std::move(frame));
    }
  }

  {
    std::ifstream in(dir / "groundtruth.jsonl", std::ios::binary);
    if (!in) throw IoError("import_dataset: cannot open " + (dir / "groundtruth.jsonl").string());
    std::string line;
    LineContext ctx{"groundtruth.jsonl", 0};
    while (std::getline(in, line)) {
      ++ctx.line;
      if (line.empty()) continue;
      const json j = parse_line(line, ctx);
      dataset.groundtruth.push_back(groundtruth_from_json(j, ctx));
    }
  }

  if (dataset.frames.size() != static_cast<std::size_t>(dataset.meta.frame_count)) {
    throw FormatError("frames.jsonl:" + std::to_string(dataset.frames.size() + 1) +
                      ": expected " + std::to_string(dataset.meta.frame_count) +
                      " frames, file ends early");
  }
  if (dataset.groundtruth.size() != dataset.frames.size()) {
    throw FormatError("groundtruth.jsonl:" + std::to_string(dataset.groundtruth.size() + 1) +
                      ": expected one record per frame");
  }
  return dataset;
}

}  // namespace sitetrack
