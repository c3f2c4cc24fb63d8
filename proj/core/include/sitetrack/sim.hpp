#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sitetrack/frame.hpp"
#include "sitetrack/motion_state.hpp"

namespace sitetrack {

/// Object pose per frame. Piecewise-constant-velocity; a static object has
/// identity increments throughout.
struct MotionScript {
  std::vector<Pose> poses;  // object-in-world, one entry per frame

  /// True when the pose changed relative to the previous frame (frame 0 looks
  /// ahead instead, so a machine moving from the start is dynamic at frame 0).
  bool moved_at(int frame) const;
};

struct Landmark {
  Point3 position = Point3::Zero();
  Descriptor descriptor{};
  int scale_level = 0;
  std::int64_t id = -1;
};

struct RigidObject {
  int object_id = 0;
  std::string class_label = "machine";
  bool a_priori_dynamic = true;
  std::vector<Point3> body_landmarks;  // object frame: x forward, y left, z up from ground
  std::vector<Descriptor> descriptors;
  std::vector<int> scale_levels;
  MotionScript motion;
};

struct WorldModel {
  std::vector<Landmark> background;
  std::vector<RigidObject> objects;
};

// Landmark-id layout: background landmarks count up from zero, object landmarks
// live in disjoint ranges so tests can attribute features.
inline constexpr std::int64_t kObjectHintBase = 1'000'000;
inline constexpr std::int64_t kObjectHintStride = 10'000;

inline std::int64_t object_landmark_hint(int object_index, int landmark_index) {
  return kObjectHintBase + static_cast<std::int64_t>(object_index) * kObjectHintStride +
         landmark_index;
}
inline bool is_object_hint(std::int64_t hint) { return hint >= kObjectHintBase; }
inline int object_index_from_hint(std::int64_t hint) {
  return static_cast<int>((hint - kObjectHintBase) / kObjectHintStride);
}

enum class CameraPath { RectangleLoop, StraightLine, Custom };

/// A machine body: base box plus an offset cabin box on top. Zero cabin size
/// gives a plain box (cones, pallets).
struct ObjectSpec {
  std::string class_label = "machine";
  bool a_priori_dynamic = true;
  Eigen::Vector3d base_size{4.0, 2.2, 1.5};
  Eigen::Vector3d cabin_size{1.4, 1.4, 1.5};
  double cabin_offset_x = -1.1;
  int landmark_count = 220;
  Point3 position = Point3::Zero();  // base center at ground level, world frame
  double yaw = 0.0;                  // about world z
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // m/s, world frame
  int move_start_frame = 0;
  int move_stop_frame = std::numeric_limits<int>::max();
};

CameraIntrinsics default_intrinsics();  // 960x540, 6 fps rig

struct SimConfig {
  std::uint64_t seed = 1;
  int frames = 120;
  double fps = 6.0;
  double pixel_noise_sigma = 0.5;  // pixels
  int descriptor_flip_bits = 6;    // per observation
  CameraPath camera_path = CameraPath::RectangleLoop;
  CameraIntrinsics intrinsics = default_intrinsics();
  /// Adds a centered fake occlusion of this area ratio to every frame.
  std::optional<double> target_occlusion;
  std::vector<ObjectSpec> objects;
  std::string scenario = "custom";

  // Camera rig and path. The camera looks to the left of the direction of
  // travel (into the loop), slightly pitched down.
  double speed_kmh = 4.0;
  double camera_height = 2.2;
  double camera_pitch_deg = 10.0;
  double loop_width = 40.0;
  double loop_depth = 20.0;
  double start_offset = 30.0;  // meters along the loop perimeter
  std::vector<Pose> custom_poses;

  // Background landmark field.
  double background_density = 0.4;  // landmarks per square meter
  double field_margin = 20.0;
  double raised_fraction = 0.25;
  double max_landmark_height = 3.2;

  void validate() const;  // throws ConfigInvalid
};

/// Named presets: "empty", "parked", "one-moving", "mixed", "crowded".
/// Throws ConfigInvalid for unknown names.
void apply_scenario(SimConfig& cfg, std::string_view name);
SimConfig scenario_config(std::string_view name);

/// Ground-truth camera-in-world pose for a frame of the configured path.
Pose camera_pose_at(const SimConfig& cfg, int frame);

struct GroundTruthFrame {
  double timestamp = 0.0;
  Pose camera_pose;
  std::map<int, MotionLabel> object_states;
};

struct DatasetMeta {
  int version = 1;
  CameraIntrinsics intrinsics;
  double fps = 6.0;
  std::uint64_t seed = 0;
  int frame_count = 0;
  std::string scenario;
};

struct SimulatedDataset {
  DatasetMeta meta;
  std::vector<FrameObservation> frames;
  std::vector<GroundTruthFrame> groundtruth;
};

WorldModel build_world(const SimConfig& cfg);
SimulatedDataset simulate_sequence(const WorldModel& world, const SimConfig& cfg);

/// build_world + simulate_sequence + optional fixed occlusion.
SimulatedDataset make_dataset(const SimConfig& cfg);

/// Adds one synthetic a-priori-dynamic detection per frame: a centered
/// rectangle of the given area ratio, aspect matching the image, no pixel
/// region. Features underneath stay in the data; they only become masked at
/// tracking time.
SimulatedDataset inject_fixed_occlusion(SimulatedDataset dataset, double ratio);

inline constexpr int kInjectedOcclusionId = 999;

// Image-space hull utilities, shared with tests that audit occlusion handling.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);
bool point_in_convex_polygon(std::span<const Eigen::Vector2d> hull, const Eigen::Vector2d& p);

}  // namespace sitetrack
