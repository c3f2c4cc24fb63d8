#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sitetrack/errors.hpp"

namespace sitetrack {

/// Pixel-aligned box, half-open on the max edges: u in [u_min, u_max), v in [v_min, v_max).
struct BoundingBox {
  int u_min = 0;
  int v_min = 0;
  int u_max = 0;
  int v_max = 0;

  int width() const { return u_max - u_min; }
  int height() const { return v_max - v_min; }
  long long area() const { return empty() ? 0 : static_cast<long long>(width()) * height(); }
  bool empty() const { return u_min >= u_max || v_min >= v_max; }
  bool contains(int u, int v) const { return u >= u_min && u < u_max && v >= v_min && v < v_max; }
  bool contains(double u, double v) const {
    return u >= u_min && u < u_max && v >= v_min && v < v_max;
  }
  BoundingBox clipped(int image_width, int image_height) const;
  bool operator==(const BoundingBox&) const = default;
};

/// One horizontal run of pixels: row v, columns [u_begin, u_end).
struct PixelRun {
  int v = 0;
  int u_begin = 0;
  int u_end = 0;

  bool operator==(const PixelRun&) const = default;
};

/// Run-length encoded silhouette. Runs are sorted by (v, u_begin) and non-overlapping.
class PixelRegion {
 public:
  PixelRegion() = default;

  /// Sorts and merges overlapping or touching runs; drops empty ones.
  static PixelRegion from_runs(std::vector<PixelRun> runs);
  static PixelRegion from_box(const BoundingBox& box);

  const std::vector<PixelRun>& runs() const { return runs_; }
  bool empty() const { return runs_.empty(); }
  long long pixel_count() const;
  bool contains(int u, int v) const;
  PixelRegion clipped(const BoundingBox& box) const;

  bool operator==(const PixelRegion&) const = default;

 private:
  std::vector<PixelRun> runs_;
};

/// One detected instance, ingested from a dataset (the detector itself is external).
struct ObjectDetection {
  int object_id = 0;
  std::string class_label;
  bool a_priori_dynamic = false;
  BoundingBox bbox;
  std::optional<PixelRegion> pixel_region;  // subset of bbox when present
};

enum class MaskTier { BBox, PixelWise };

const char* to_string(MaskTier tier);

struct MarThreshold {
  double tau_mar = 0.5;

  void validate() const;  // throws ConfigInvalid unless 0 < tau_mar < 1
};

/// Binary occlusion raster. Bit 1 marks dynamic pixels excluded from tracking,
/// bit 0 static pixels.
class OcclusionMask {
 public:
  OcclusionMask(int width, int height, MaskTier tier = MaskTier::BBox);

  int width() const { return width_; }
  int height() const { return height_; }
  MaskTier tier() const { return tier_; }

  bool test(int u, int v) const {
    const std::size_t bit = static_cast<std::size_t>(v) * width_ + u;
    return (words_[bit >> 6] >> (bit & 63)) & 1u;
  }
  bool test_pixel_of(double u, double v) const;  // pixel containing the point; false out of bounds

  void fill_box(const BoundingBox& box);
  void fill_region(const PixelRegion& region);
  void add_contributor(int object_id);

  /// Number of dynamic pixels (the masked area A_m).
  std::size_t dynamic_pixel_count() const;
  const std::vector<int>& contributor_ids() const { return contributor_ids_; }

  bool same_pixels(const OcclusionMask& other) const;

 private:
  int width_ = 0;
  int height_ = 0;
  MaskTier tier_ = MaskTier::BBox;
  std::vector<std::uint64_t> words_;
  std::vector<int> contributor_ids_;  // sorted, unique
};

/// Mask with bit 1 inside every a-priori-dynamic bounding box.
OcclusionMask rasterize_bbox_mask(std::span<const ObjectDetection> detections, int width,
                                  int height);

/// Mask with bit 1 inside every a-priori-dynamic pixel region; detections without
/// a region fall back to their bounding box.
OcclusionMask rasterize_pixelwise_mask(std::span<const ObjectDetection> detections, int width,
                                       int height);

/// Masked area ratio: dynamic pixels over total pixels.
double masked_area_ratio(const OcclusionMask& mask);

/// Bounding-box mask, refined to pixel-wise when its masked area ratio
/// reaches tau_mar.
OcclusionMask hierarchical_mask(std::span<const ObjectDetection> detections, int width, int height,
                                const MarThreshold& tau);

/// Clears every pixel covered only by objects in static_ids; pixels shared with a
/// still-dynamic contributor stay set. Throws UnknownObjectId.
OcclusionMask unmask_objects(const OcclusionMask& mask, std::span<const int> static_ids,
                             std::span<const ObjectDetection> detections);

/// Modeled mask generation time: detection runs on every frame, segmentation only
/// on pixel-tier frames. Reporting only, never control flow.
double mask_cost(MaskTier tier, std::size_t frame_count);

/// Debug export, one byte per pixel: 0 static, 255 dynamic.
void write_pgm(const OcclusionMask& mask, const std::filesystem::path& path);

}  // namespace sitetrack
