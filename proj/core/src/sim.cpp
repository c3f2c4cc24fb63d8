#include "sitetrack/sim.hpp"

#include <algorithm>
#include <cmath>

#include "sitetrack/rng.hpp"

namespace sitetrack {

bool MotionScript::moved_at(int frame) const {
  if (poses.empty()) return false;
  const std::size_t f = static_cast<std::size_t>(std::clamp<int>(frame, 0, static_cast<int>(poses.size()) - 1));
  const std::size_t a = f == 0 ? 0 : f - 1;
  const std::size_t b = f == 0 ? std::min<std::size_t>(1, poses.size() - 1) : f;
  const Pose delta = poses[a].inverse() * poses[b];
  return delta.translation.norm() > 1e-9 || rotation_angle(delta) > 1e-9;
}

CameraIntrinsics default_intrinsics() {
  CameraIntrinsics K;
  K.fx = 450.0;
  K.fy = 450.0;
  K.cx = 480.0;
  K.cy = 270.0;
  K.baseline = 1.0;
  K.width = 960;
  K.height = 540;
  return K;
}

void SimConfig::validate() const {
  if (frames < 1) throw ConfigInvalid("frames must be positive");
  if (!(fps > 0.0)) throw ConfigInvalid("fps must be positive");
  if (pixel_noise_sigma < 0.0) throw ConfigInvalid("pixel_noise_sigma must be non-negative");
  if (descriptor_flip_bits < 0 || descriptor_flip_bits > 256) {
    throw ConfigInvalid("descriptor_flip_bits must be in [0, 256]");
  }
  intrinsics.validate();
  if (target_occlusion && (*target_occlusion < 0.0 || *target_occlusion >= 1.0)) {
    throw ConfigInvalid("target_occlusion must be in [0, 1)");
  }
  if (!(speed_kmh > 0.0)) throw ConfigInvalid("speed_kmh must be positive");
  if (!(background_density > 0.0)) throw ConfigInvalid("background_density must be positive");
  if (camera_path == CameraPath::Custom && custom_poses.size() < static_cast<std::size_t>(frames)) {
    throw ConfigInvalid("custom camera path needs one pose per frame");
  }
  if (!(loop_width > 4.0) || !(loop_depth > 4.0)) {
    throw ConfigInvalid("loop dimensions too small");
  }
  for (const ObjectSpec& spec : objects) {
    if (spec.landmark_count < 4) throw ConfigInvalid("object needs at least 4 landmarks");
    if (spec.base_size.minCoeff() <= 0.0) throw ConfigInvalid("object base size must be positive");
  }
}

namespace {

Eigen::Matrix3d yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

// Smooth ramp from 0 to 1 across [-1, 1].
double corner_ramp(double x) { return std::clamp(0.5 * (x + 1.0), 0.0, 1.0); }

}  // namespace

Pose camera_pose_at(const SimConfig& cfg, int frame) {
  if (cfg.camera_path == CameraPath::Custom) {
    return cfg.custom_poses[static_cast<std::size_t>(frame)];
  }

  const double speed = cfg.speed_kmh / 3.6;
  const double s = cfg.start_offset + speed * frame / cfg.fps;

  double x = 0.0, y = 0.0, heading = 0.0;
  if (cfg.camera_path == CameraPath::StraightLine) {
    x = s;
    y = 0.0;
    heading = 0.0;
  } else {
    const double w = cfg.loop_width;
    const double d = cfg.loop_depth;
    const double perimeter = 2.0 * (w + d);
    const double loops = std::floor(s / perimeter);
    const double arc = s - loops * perimeter;

    if (arc < w) {
      x = arc;
      y = 0.0;
    } else if (arc < w + d) {
      x = w;
      y = arc - w;
    } else if (arc < 2.0 * w + d) {
      x = w - (arc - w - d);
      y = d;
    } else {
      x = 0.0;
      y = d - (arc - 2.0 * w - d);
    }

    // The viewing direction turns smoothly across each corner. The corner at
    // the loop origin appears twice (arc 0 and arc P) so the turn stays
    // continuous across the wrap; its double count is the -pi/2 offset.
    const double blend = 1.5;
    const double corners[5] = {0.0, w, w + d, 2.0 * w + d, perimeter};
    heading = -M_PI_2 + 2.0 * M_PI * loops;
    for (double c : corners) {
      heading += M_PI_2 * corner_ramp((arc - c) / blend);
    }
  }

  // Camera looks to the left of travel, pitched down.
  const double view = heading + M_PI_2;
  const double pitch = cfg.camera_pitch_deg * M_PI / 180.0;
  const Eigen::Vector3d forward(std::cos(pitch) * std::cos(view), std::cos(pitch) * std::sin(view),
                                -std::sin(pitch));
  const Eigen::Vector3d right(std::sin(view), -std::cos(view), 0.0);
  const Eigen::Vector3d down = forward.cross(right).normalized();

  Pose pose;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = down;
  pose.rotation.col(2) = forward;
  pose.translation = Eigen::Vector3d(x, y, cfg.camera_height);
  return pose;
}

namespace {

// Uniform point on the surface of an axis-aligned box centered at `center`.
Point3 sample_box_surface(Rng& rng, const Eigen::Vector3d& center, const Eigen::Vector3d& size) {
  const double sx = size.x(), sy = size.y(), sz = size.z();
  const double area_x = sy * sz, area_y = sx * sz, area_z = sx * sy;
  const double total = 2.0 * (area_x + area_y + area_z);
  double pick = rng.uniform() * total;

  Eigen::Vector3d p;
  const double u = rng.uniform() - 0.5;
  const double v = rng.uniform() - 0.5;
  if (pick < 2.0 * area_x) {
    const double side = pick < area_x ? -0.5 : 0.5;
    p = {side * sx, u * sy, v * sz};
  } else if (pick < 2.0 * (area_x + area_y)) {
    pick -= 2.0 * area_x;
    const double side = pick < area_y ? -0.5 : 0.5;
    p = {u * sx, side * sy, v * sz};
  } else {
    pick -= 2.0 * (area_x + area_y);
    const double side = pick < area_z ? -0.5 : 0.5;
    p = {u * sx, v * sy, side * sz};
  }
  return center + p;
}

Descriptor random_descriptor(Rng& rng) {
  return {rng.bits(), rng.bits(), rng.bits(), rng.bits()};
}

MotionScript build_motion(const ObjectSpec& spec, const SimConfig& cfg) {
  MotionScript script;
  script.poses.reserve(static_cast<std::size_t>(cfg.frames));
  const Eigen::Matrix3d rot = yaw_rotation(spec.yaw);
  for (int f = 0; f < cfg.frames; ++f) {
    const int moving_frames =
        std::max(0, std::min(f, spec.move_stop_frame) - spec.move_start_frame);
    Pose pose;
    pose.rotation = rot;
    pose.translation = spec.position + spec.velocity * (moving_frames / cfg.fps);
    script.poses.push_back(pose);
  }
  return script;
}

struct FieldBounds {
  double x_min, x_max, y_min, y_max;
};

FieldBounds field_bounds(const SimConfig& cfg) {
  if (cfg.camera_path == CameraPath::StraightLine) {
    const double length = cfg.start_offset + cfg.speed_kmh / 3.6 * cfg.frames / cfg.fps;
    return {-cfg.field_margin, length + cfg.field_margin, -cfg.field_margin, cfg.field_margin};
  }
  return {-cfg.field_margin, cfg.loop_width + cfg.field_margin, -cfg.field_margin,
          cfg.loop_depth + cfg.field_margin};
}

}  // namespace

WorldModel build_world(const SimConfig& cfg) {
  cfg.validate();
  WorldModel world;
  Rng rng = Rng(cfg.seed).fork(0);

  const FieldBounds bounds = field_bounds(cfg);
  const double area = (bounds.x_max - bounds.x_min) * (bounds.y_max - bounds.y_min);
  const std::size_t count = static_cast<std::size_t>(std::llround(area * cfg.background_density));
  world.background.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Landmark lm;
    const double x = rng.uniform(bounds.x_min, bounds.x_max);
    const double y = rng.uniform(bounds.y_min, bounds.y_max);
    const double z = rng.uniform() < cfg.raised_fraction
                         ? rng.uniform(0.3, cfg.max_landmark_height)
                         : rng.uniform(0.0, 0.15);
    lm.position = {x, y, z};
    lm.descriptor = random_descriptor(rng);
    lm.scale_level = rng.uniform_int(0, 3);
    lm.id = static_cast<std::int64_t>(i);
    world.background.push_back(lm);
  }

  for (std::size_t o = 0; o < cfg.objects.size(); ++o) {
    const ObjectSpec& spec = cfg.objects[o];
    Rng obj_rng = Rng(cfg.seed).fork(1000 + o);
    RigidObject obj;
    obj.object_id = static_cast<int>(o);
    obj.class_label = spec.class_label;
    obj.a_priori_dynamic = spec.a_priori_dynamic;

    const Eigen::Vector3d base_center(0.0, 0.0, spec.base_size.z() * 0.5);
    const Eigen::Vector3d cabin_center(spec.cabin_offset_x, 0.0,
                                       spec.base_size.z() + spec.cabin_size.z() * 0.5);
    const double base_area = 2.0 * (spec.base_size.x() * spec.base_size.y() +
                                    spec.base_size.x() * spec.base_size.z() +
                                    spec.base_size.y() * spec.base_size.z());
    const double cabin_area =
        spec.cabin_size.minCoeff() > 0.0
            ? 2.0 * (spec.cabin_size.x() * spec.cabin_size.y() +
                     spec.cabin_size.x() * spec.cabin_size.z() +
                     spec.cabin_size.y() * spec.cabin_size.z())
            : 0.0;

    obj.body_landmarks.reserve(static_cast<std::size_t>(spec.landmark_count));
    for (int k = 0; k < spec.landmark_count; ++k) {
      const bool on_cabin =
          cabin_area > 0.0 && obj_rng.uniform() < cabin_area / (base_area + cabin_area);
      obj.body_landmarks.push_back(on_cabin
                                       ? sample_box_surface(obj_rng, cabin_center, spec.cabin_size)
                                       : sample_box_surface(obj_rng, base_center, spec.base_size));
      obj.descriptors.push_back(random_descriptor(obj_rng));
      obj.scale_levels.push_back(obj_rng.uniform_int(0, 3));
    }
    obj.motion = build_motion(spec, cfg);
    world.objects.push_back(std::move(obj));
  }
  return world;
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points) {
  std::sort(points.begin(), points.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                             return a.x() == b.x() && a.y() == b.y();
                           }),
               points.end());
  const std::size_t n = points.size();
  if (n < 3) return points;

  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };

  std::vector<Eigen::Vector2d> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_convex_polygon(std::span<const Eigen::Vector2d> hull, const Eigen::Vector2d& p) {
  if (hull.size() < 3) return false;
  double sign = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d& a = hull[i];
    const Eigen::Vector2d& b = hull[(i + 1) % hull.size()];
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (cross == 0.0) continue;
    if (sign == 0.0) {
      sign = cross;
    } else if ((cross > 0.0) != (sign > 0.0)) {
      return false;
    }
  }
  return true;
}

namespace {

struct ProjectedObject {
  std::vector<std::size_t> landmark_index;
  std::vector<Eigen::Vector2d> pixels;  // exact, noise free
  std::vector<double> depths;
  std::vector<Point3> world;
  std::vector<Eigen::Vector2d> hull;
  double min_depth = std::numeric_limits<double>::max();
};

bool occluded_by_any(const std::vector<ProjectedObject>& projections, std::size_t skip,
                     const Eigen::Vector2d& pixel, double depth) {
  for (std::size_t o = 0; o < projections.size(); ++o) {
    if (o == skip) continue;
    const ProjectedObject& obj = projections[o];
    if (obj.hull.size() < 3 || depth <= obj.min_depth) continue;
    if (point_in_convex_polygon(obj.hull, pixel)) return true;
  }
  return false;
}

void flip_descriptor_bits(Descriptor& d, Rng& rng, int flips) {
  for (int i = 0; i < flips; ++i) {
    const int bit = rng.uniform_int(0, 255);
    d[static_cast<std::size_t>(bit >> 6)] ^= 1ull << (bit & 63);
  }
}

}  // namespace

SimulatedDataset simulate_sequence(const WorldModel& world, const SimConfig& cfg) {
  cfg.validate();
  SimulatedDataset dataset;
  dataset.meta.version = 1;
  dataset.meta.intrinsics = cfg.intrinsics;
  dataset.meta.fps = cfg.fps;
  dataset.meta.seed = cfg.seed;
  dataset.meta.frame_count = cfg.frames;
  dataset.meta.scenario = cfg.scenario;

  const CameraIntrinsics& K = cfg.intrinsics;
  Rng rng = Rng(cfg.seed).fork(1);

  for (int f = 0; f < cfg.frames; ++f) {
    FrameObservation frame;
    frame.timestamp = f / cfg.fps;
    frame.intrinsics = K;

    GroundTruthFrame gt;
    gt.timestamp = frame.timestamp;
    gt.camera_pose = camera_pose_at(cfg, f);
    const Pose camera_from_world = gt.camera_pose.inverse();

    // Project object bodies and build their image-space hulls.
    std::vector<ProjectedObject> projections(world.objects.size());
    for (std::size_t o = 0; o < world.objects.size(); ++o) {
      const RigidObject& obj = world.objects[o];
      const Pose& obj_pose = obj.motion.poses[static_cast<std::size_t>(f)];
      ProjectedObject& proj = projections[o];
      for (std::size_t k = 0; k < obj.body_landmarks.size(); ++k) {
        const Point3 world_point = obj_pose * obj.body_landmarks[k];
        const Point3 q = camera_from_world * world_point;
        if (q.z() < 0.05) continue;
        const Eigen::Vector2d pixel(K.fx * q.x() / q.z() + K.cx, K.fy * q.y() / q.z() + K.cy);
        proj.landmark_index.push_back(k);
        proj.pixels.push_back(pixel);
        proj.depths.push_back(q.z());
        proj.world.push_back(world_point);
        proj.min_depth = std::min(proj.min_depth, q.z());
      }
      proj.hull = convex_hull(proj.pixels);
      gt.object_states[obj.object_id] =
          obj.motion.moved_at(f) ? MotionLabel::Dynamic : MotionLabel::Static;
    }

    auto emit_feature = [&](const Point3& world_point, const Descriptor& descriptor,
                            int scale_level, std::int64_t hint) {
      const Point3 q = camera_from_world * world_point;
      const double exact_u = K.fx * q.x() / q.z() + K.cx;
      const double exact_v = K.fy * q.y() / q.z() + K.cy;
      const double exact_ur = K.fx * (q.x() - K.baseline) / q.z() + K.cx;

      StereoFeature feat;
      feat.u_l = exact_u + rng.gaussian(cfg.pixel_noise_sigma);
      feat.v_l = exact_v + rng.gaussian(cfg.pixel_noise_sigma);
      if (feat.u_l < 0.0 || feat.u_l >= K.width || feat.v_l < 0.0 || feat.v_l >= K.height) {
        return;  // the detector would not fire outside the image
      }
      if (exact_ur >= 0.0 && exact_ur < K.width) {
        const double ur = exact_ur + rng.gaussian(cfg.pixel_noise_sigma);
        if (feat.u_l - ur > 2.0 * kMinDisparity) feat.u_r = ur;  // else failed stereo match
      }
      feat.descriptor = descriptor;
      flip_descriptor_bits(feat.descriptor, rng, cfg.descriptor_flip_bits);
      feat.scale_level = scale_level;
      feat.landmark_hint = hint;
      frame.features.push_back(feat);
    };

    // Background landmarks, in id order.
    for (const Landmark& lm : world.background) {
      const Point3 q = camera_from_world * lm.position;
      if (q.z() < 0.3) continue;
      const Eigen::Vector2d pixel(K.fx * q.x() / q.z() + K.cx, K.fy * q.y() / q.z() + K.cy);
      if (pixel.x() < 0.0 || pixel.x() >= K.width || pixel.y() < 0.0 || pixel.y() >= K.height) {
        continue;
      }
      if (occluded_by_any(projections, projections.size(), pixel, q.z())) continue;
      emit_feature(lm.position, lm.descriptor, lm.scale_level, lm.id);
    }

    // Object landmarks and detections.
    for (std::size_t o = 0; o < world.objects.size(); ++o) {
      const RigidObject& obj = world.objects[o];
      const ProjectedObject& proj = projections[o];

      std::vector<std::size_t> visible;
      for (std::size_t i = 0; i < proj.pixels.size(); ++i) {
        const Eigen::Vector2d& pixel = proj.pixels[i];
        if (pixel.x() < 0.0 || pixel.x() >= K.width || pixel.y() < 0.0 || pixel.y() >= K.height) {
          continue;
        }
        if (occluded_by_any(projections, o, pixel, proj.depths[i])) continue;
        visible.push_back(i);
      }
      if (visible.size() < 8) continue;  // too small for the detector

      double u_min = K.width, u_max = 0.0, v_min = K.height, v_max = 0.0;
      for (std::size_t i : visible) {
        u_min = std::min(u_min, proj.pixels[i].x());
        u_max = std::max(u_max, proj.pixels[i].x());
        v_min = std::min(v_min, proj.pixels[i].y());
        v_max = std::max(v_max, proj.pixels[i].y());
      }
      const double margin_u = 0.05 * (u_max - u_min);
      const double margin_v = 0.05 * (v_max - v_min);
      BoundingBox bbox{static_cast<int>(std::floor(u_min - margin_u)),
                       static_cast<int>(std::floor(v_min - margin_v)),
                       static_cast<int>(std::ceil(u_max + margin_u)) + 1,
                       static_cast<int>(std::ceil(v_max + margin_v)) + 1};
      bbox = bbox.clipped(K.width, K.height);
      if (bbox.empty()) continue;

      // Dilated union of the projected landmark footprints.
      std::vector<PixelRun> runs;
      for (std::size_t i : visible) {
        const int radius = std::clamp(
            static_cast<int>(std::lround(0.22 * K.fx / proj.depths[i])), 2, 80);
        const int cu = static_cast<int>(proj.pixels[i].x());
        const int cv = static_cast<int>(proj.pixels[i].y());
        for (int dv = -radius; dv <= radius; ++dv) {
          const int v = cv + dv;
          if (v < bbox.v_min || v >= bbox.v_max) continue;
          const int b = std::max(cu - radius, bbox.u_min);
          const int e = std::min(cu + radius + 1, bbox.u_max);
          if (b < e) runs.push_back({v, b, e});
        }
      }

      ObjectDetection det;
      det.object_id = obj.object_id;
      det.class_label = obj.class_label;
      det.a_priori_dynamic = obj.a_priori_dynamic;
      det.bbox = bbox;
      det.pixel_region = PixelRegion::from_runs(std::move(runs));
      frame.detections.push_back(std::move(det));

      for (std::size_t i : visible) {
        emit_feature(proj.world[i], obj.descriptors[proj.landmark_index[i]],
                     obj.scale_levels[proj.landmark_index[i]],
                     object_landmark_hint(static_cast<int>(o),
                                          static_cast<int>(proj.landmark_index[i])));
      }
    }

    dataset.frames.push_back(std::move(frame));
    dataset.groundtruth.push_back(std::move(gt));
  }
  return dataset;
}

SimulatedDataset make_dataset(const SimConfig& cfg) {
  SimulatedDataset dataset = simulate_sequence(build_world(cfg), cfg);
  if (cfg.target_occlusion && *cfg.target_occlusion > 0.0) {
    dataset = inject_fixed_occlusion(std::move(dataset), *cfg.target_occlusion);
  }
  return dataset;
}

SimulatedDataset inject_fixed_occlusion(SimulatedDataset dataset, double ratio) {
  if (ratio < 0.0 || ratio >= 1.0) throw ConfigInvalid("occlusion ratio must be in [0, 1)");
  if (ratio == 0.0) return dataset;

  const int width = dataset.meta.intrinsics.width;
  const int height = dataset.meta.intrinsics.height;
  // Even extents keep the rectangle exactly centered; the area can be off by
  // a fraction of a percent from ratio * width * height due to rounding.
  const int w = 2 * static_cast<int>(std::lround(width * std::sqrt(ratio) / 2.0));
  const int h = 2 * static_cast<int>(std::lround(height * std::sqrt(ratio) / 2.0));
  BoundingBox box{(width - w) / 2, (height - h) / 2, (width - w) / 2 + w, (height - h) / 2 + h};
  box = box.clipped(width, height);

  for (FrameObservation& frame : dataset.frames) {
    ObjectDetection det;
    det.object_id = kInjectedOcclusionId;
    det.class_label = "synthetic_occlusion";
    det.a_priori_dynamic = true;
    det.bbox = box;
    frame.detections.push_back(std::move(det));
  }
  for (GroundTruthFrame& gt : dataset.groundtruth) {
    gt.object_states[kInjectedOcclusionId] = MotionLabel::Dynamic;
  }
  return dataset;
}

void apply_scenario(SimConfig& cfg, std::string_view name) {
  cfg.objects.clear();
  cfg.scenario = std::string(name);

  auto machine = [](Point3 position, double yaw, Eigen::Vector3d velocity) {
    ObjectSpec spec;
    spec.class_label = "machine";
    spec.position = std::move(position);
    spec.yaw = yaw;
    spec.velocity = std::move(velocity);
    return spec;
  };
  auto cone = [](Point3 position) {
    ObjectSpec spec;
    spec.class_label = "cone";
    spec.base_size = {0.45, 0.45, 0.75};
    spec.cabin_size = Eigen::Vector3d::Zero();
    spec.landmark_count = 20;
    spec.position = std::move(position);
    return spec;
  };

  if (name == "empty") {
    return;
  }
  if (name == "parked") {
    cfg.objects.push_back(machine({35.0, 4.5, 0.0}, 0.0, {0.0, 0.0, 0.0}));
    return;
  }
  if (name == "one-moving") {
    cfg.objects.push_back(machine({28.0, 5.0, 0.0}, 0.0, {1.0, 0.0, 0.0}));
    return;
  }
  if (name == "mixed") {
    cfg.objects.push_back(machine({34.0, 6.5, 0.0}, 0.0, {0.0, 0.0, 0.0}));
    cfg.objects.push_back(machine({26.0, 4.5, 0.0}, 0.0, {1.0, 0.0, 0.0}));
    cfg.objects.push_back(cone({31.0, 2.5, 0.0}));
    cfg.objects.push_back(cone({35.0, 3.0, 0.0}));
    cfg.objects.push_back(cone({38.0, 2.2, 0.0}));
    return;
  }
  if (name == "crowded") {
    const double speed = cfg.speed_kmh / 3.6;
    cfg.objects.push_back(machine({33.0, 3.8, 0.0}, 0.0, {speed, 0.0, 0.0}));
    cfg.objects.push_back(machine({40.0, 3.8, 0.0}, 0.0, {speed, 0.0, 0.0}));
    cfg.objects.push_back(machine({20.0, 12.0, 0.0}, 0.0, {0.0, 0.0, 0.0}));
    return;
  }
  throw ConfigInvalid("unknown scenario: " + std::string(name));
}

SimConfig scenario_config(std::string_view name) {
  SimConfig cfg;
  apply_scenario(cfg, name);
  return cfg;
}

}  // namespace sitetrack
