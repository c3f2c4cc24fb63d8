#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "sitetrack/geometry.hpp"
#include "sitetrack/masking.hpp"

namespace sitetrack {

/// 256-bit binary feature descriptor.
using Descriptor = std::array<std::uint64_t, 4>;

inline int hamming_distance(const Descriptor& a, const Descriptor& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::popcount(a[i] ^ b[i]);
  return d;
}

struct StereoFeature {
  double u_l = 0.0;
  double v_l = 0.0;
  std::optional<double> u_r;  // absent for mono-only features
  Descriptor descriptor{};
  int scale_level = 0;  // pyramid octave in [0, 7]
  // Simulator ground-truth landmark id. Never read by the tracker; tests only.
  std::int64_t landmark_hint = -1;

  bool has_stereo() const { return u_r.has_value(); }
  double disparity() const { return u_l - *u_r; }
  PixelStereo stereo_pixel() const { return {u_l, v_l, *u_r}; }
};

/// Per-frame input bundle for the tracking pipeline.
struct FrameObservation {
  double timestamp = 0.0;
  CameraIntrinsics intrinsics;
  std::vector<StereoFeature> features;
  std::vector<ObjectDetection> detections;
};

}  // namespace sitetrack
