#pragma once

#include <filesystem>
#include <vector>

#include "sitetrack/geometry.hpp"
#include "sitetrack/sim.hpp"

namespace sitetrack {

/// Timestamped pose sequence; timestamps strictly increasing.
struct Trajectory {
  struct Entry {
    double timestamp = 0.0;
    Pose pose;
  };
  std::vector<Entry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

Trajectory trajectory_from_groundtruth(const std::vector<GroundTruthFrame>& groundtruth);

/// Plain-text layout, one pose per line: timestamp tx ty tz qx qy qz qw.
void write_tum_trajectory(const Trajectory& trajectory, const std::filesystem::path& path);
Trajectory read_tum_trajectory(const std::filesystem::path& path);

}  // namespace sitetrack
