#include "sitetrack/trajectory.hpp"

#include <cstdio>
#include <fstream>

namespace sitetrack {

Trajectory trajectory_from_groundtruth(const std::vector<GroundTruthFrame>& groundtruth) {
  Trajectory out;
  out.entries.reserve(groundtruth.size());
  for (const GroundTruthFrame& gt : groundtruth) {
    out.entries.push_back({gt.timestamp, gt.camera_pose});
  }
  return out;
}

void write_tum_trajectory(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_tum_trajectory: cannot open " + path.string());
  char line[512];
  for (const Trajectory::Entry& entry : trajectory.entries) {
    const Eigen::Quaterniond q = to_quaternion(entry.pose);
    const Eigen::Vector3d& t = entry.pose.translation;
    std::snprintf(line, sizeof(line), "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  entry.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
    out << line;
  }
  if (!out) throw IoError("write_tum_trajectory: failed writing " + path.string());
}

Trajectory read_tum_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_tum_trajectory: cannot open " + path.string());

  Trajectory out;
  std::string line;
  std::size_t line_no = 0;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    double t, x, y, z, qx, qy, qz, qw;
    if (std::sscanf(line.c_str(), "%lf %lf %lf %lf %lf %lf %lf %lf", &t, &x, &y, &z, &qx, &qy,
                    &qz, &qw) != 8) {
      throw FormatError(path.filename().string() + ":" + std::to_string(line_no) +
                        ": expected 'timestamp tx ty tz qx qy qz qw'");
    }
    if (t <= last_t) {
      throw FormatError(path.filename().string() + ":" + std::to_string(line_no) +
                        ": timestamps must be strictly increasing");
    }
    last_t = t;
    const Eigen::Quaterniond q(qw, qx, qy, qz);
    if (q.norm() < 1e-9) {
      throw FormatError(path.filename().string() + ":" + std::to_string(line_no) +
                        ": zero quaternion");
    }
    out.entries.push_back({t, pose_from_quaternion(q, {x, y, z})});
  }
  return out;
}

}  // namespace sitetrack
