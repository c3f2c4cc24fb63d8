#include "sitetrack/masking.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>

namespace sitetrack {

namespace {

constexpr double kDetectionSecondsPerFrame = 0.0207;
constexpr double kSegmentationSecondsPerFrame = 0.12;

}  // namespace

BoundingBox BoundingBox::clipped(int image_width, int image_height) const {
  BoundingBox out;
  out.u_min = std::clamp(u_min, 0, image_width);
  out.v_min = std::clamp(v_min, 0, image_height);
  out.u_max = std::clamp(u_max, 0, image_width);
  out.v_max = std::clamp(v_max, 0, image_height);
  if (out.empty()) return {0, 0, 0, 0};
  return out;
}

PixelRegion PixelRegion::from_runs(std::vector<PixelRun> runs) {
  std::erase_if(runs, [](const PixelRun& r) { return r.u_begin >= r.u_end; });
  std::sort(runs.begin(), runs.end(), [](const PixelRun& a, const PixelRun& b) {
    return a.v != b.v ? a.v < b.v : a.u_begin < b.u_begin;
  });
  PixelRegion out;
  for (const PixelRun& run : runs) {
    if (!out.runs_.empty()) {
      PixelRun& last = out.runs_.back();
      if (last.v == run.v && run.u_begin <= last.u_end) {
        last.u_end = std::max(last.u_end, run.u_end);
        continue;
      }
    }
    out.runs_.push_back(run);
  }
  return out;
}

PixelRegion PixelRegion::from_box(const BoundingBox& box) {
  std::vector<PixelRun> runs;
  runs.reserve(std::max(0, box.height()));
  for (int v = box.v_min; v < box.v_max; ++v) {
    runs.push_back({v, box.u_min, box.u_max});
  }
  return from_runs(std::move(runs));
}

long long PixelRegion::pixel_count() const {
  long long total = 0;
  for (const PixelRun& run : runs_) total += run.u_end - run.u_begin;
  return total;
}

bool PixelRegion::contains(int u, int v) const {
  auto it = std::lower_bound(runs_.begin(), runs_.end(), v, [](const PixelRun& r, int row) {
    return r.v < row;
  });
  for (; it != runs_.end() && it->v == v; ++it) {
    if (u >= it->u_begin && u < it->u_end) return true;
    if (u < it->u_begin) return false;
  }
  return false;
}

PixelRegion PixelRegion::clipped(const BoundingBox& box) const {
  std::vector<PixelRun> runs;
  runs.reserve(runs_.size());
  for (const PixelRun& run : runs_) {
    if (run.v < box.v_min || run.v >= box.v_max) continue;
    const int b = std::max(run.u_begin, box.u_min);
    const int e = std::min(run.u_end, box.u_max);
    if (b < e) runs.push_back({run.v, b, e});
  }
  return from_runs(std::move(runs));
}

const char* to_string(MaskTier tier) {
  return tier == MaskTier::BBox ? "bbox" : "pixelwise";
}

void MarThreshold::validate() const {
  if (!(tau_mar > 0.0) || !(tau_mar < 1.0)) {
    throw ConfigInvalid("tau_mar must lie strictly between 0 and 1");
  }
}

OcclusionMask::OcclusionMask(int width, int height, MaskTier tier)
    : width_(width), height_(height), tier_(tier) {
  if (width <= 0 || height <= 0) throw ConfigInvalid("mask dimensions must be positive");
  const std::size_t bits = static_cast<std::size_t>(width) * height;
  words_.assign((bits + 63) / 64, 0);
}

bool OcclusionMask::test_pixel_of(double u, double v) const {
  const int iu = static_cast<int>(std::floor(u));
  const int iv = static_cast<int>(std::floor(v));
  if (iu < 0 || iu >= width_ || iv < 0 || iv >= height_) return false;
  return test(iu, iv);
}

void OcclusionMask::fill_box(const BoundingBox& box) {
  const BoundingBox b = box.clipped(width_, height_);
  if (b.empty()) return;
  for (int v = b.v_min; v < b.v_max; ++v) {
    const std::size_t row = static_cast<std::size_t>(v) * width_;
    std::size_t bit = row + b.u_min;
    const std::size_t end = row + b.u_max;
    while (bit < end) {
      const std::size_t word = bit >> 6;
      const unsigned offset = bit & 63;
      const std::size_t span = std::min<std::size_t>(64 - offset, end - bit);
      const std::uint64_t ones =
          span == 64 ? ~0ull : (((1ull << span) - 1ull) << offset);
      words_[word] |= ones;
      bit += span;
    }
  }
}

void OcclusionMask::fill_region(const PixelRegion& region) {
  for (const PixelRun& run : region.runs()) {
    if (run.v < 0 || run.v >= height_) continue;
    BoundingBox row{run.u_begin, run.v, run.u_end, run.v + 1};
    fill_box(row);
  }
}

void OcclusionMask::add_contributor(int object_id) {
  auto it = std::lower_bound(contributor_ids_.begin(), contributor_ids_.end(), object_id);
  if (it == contributor_ids_.end() || *it != object_id) contributor_ids_.insert(it, object_id);
}

std::size_t OcclusionMask::dynamic_pixel_count() const {
  std::size_t count = 0;
  for (std::uint64_t w : words_) count += std::popcount(w);
  return count;
}

bool OcclusionMask::same_pixels(const OcclusionMask& other) const {
  return width_ == other.width_ && height_ == other.height_ && words_ == other.words_;
}

namespace {

OcclusionMask rasterize(std::span<const ObjectDetection> detections, int width, int height,
                        MaskTier tier) {
  OcclusionMask mask(width, height, tier);
  for (const ObjectDetection& det : detections) {
    if (!det.a_priori_dynamic) continue;
    const BoundingBox box = det.bbox.clipped(width, height);
    if (box.empty()) continue;
    if (tier == MaskTier::PixelWise && det.pixel_region) {
      const PixelRegion region = det.pixel_region->clipped(box);
      if (region.empty()) continue;
      mask.fill_region(region);
    } else {
      mask.fill_box(box);
    }
    mask.add_contributor(det.object_id);
  }
  return mask;
}

}  // namespace

OcclusionMask rasterize_bbox_mask(std::span<const ObjectDetection> detections, int width,
                                  int height) {
  return rasterize(detections, width, height, MaskTier::BBox);
}

OcclusionMask rasterize_pixelwise_mask(std::span<const ObjectDetection> detections, int width,
                                       int height) {
  return rasterize(detections, width, height, MaskTier::PixelWise);
}

double masked_area_ratio(const OcclusionMask& mask) {
  const double total = static_cast<double>(mask.width()) * mask.height();
  return static_cast<double>(mask.dynamic_pixel_count()) / total;
}

OcclusionMask hierarchical_mask(std::span<const ObjectDetection> detections, int width, int height,
                                const MarThreshold& tau) {
  tau.validate();
  OcclusionMask box_mask = rasterize_bbox_mask(detections, width, height);
  if (masked_area_ratio(box_mask) >= tau.tau_mar) {
    return rasterize_pixelwise_mask(detections, width, height);
  }
  return box_mask;
}

OcclusionMask unmask_objects(const OcclusionMask& mask, std::span<const int> static_ids,
                             std::span<const ObjectDetection> detections) {
  std::set<int> known(mask.contributor_ids().begin(), mask.contributor_ids().end());
  for (const ObjectDetection& det : detections) known.insert(det.object_id);
  std::set<int> statics;
  for (int id : static_ids) {
    if (!known.contains(id)) {
      throw UnknownObjectId("unmask_objects: id " + std::to_string(id) +
                            " is neither a contributor nor a detection");
    }
    statics.insert(id);
  }

  std::vector<ObjectDetection> remaining;
  remaining.reserve(detections.size());
  const std::vector<int>& contributors = mask.contributor_ids();
  for (const ObjectDetection& det : detections) {
    if (statics.contains(det.object_id)) continue;
    if (!std::binary_search(contributors.begin(), contributors.end(), det.object_id)) continue;
    remaining.push_back(det);
  }
  return rasterize(remaining, mask.width(), mask.height(), mask.tier());
}

double mask_cost(MaskTier tier, std::size_t frame_count) {
  const double per_frame = tier == MaskTier::BBox
                               ? kDetectionSecondsPerFrame
                               : kDetectionSecondsPerFrame + kSegmentationSecondsPerFrame;
  return per_frame * static_cast<double>(frame_count);
}

void write_pgm(const OcclusionMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_pgm: cannot open " + path.string());
  out << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
  std::string row(static_cast<std::size_t>(mask.width()), '\0');
  for (int v = 0; v < mask.height(); ++v) {
    for (int u = 0; u < mask.width(); ++u) {
      row[static_cast<std::size_t>(u)] = mask.test(u, v) ? static_cast<char>(255) : '\0';
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("write_pgm: failed writing " + path.string());
}

}  // namespace sitetrack
