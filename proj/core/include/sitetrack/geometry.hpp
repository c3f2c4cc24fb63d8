#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "sitetrack/errors.hpp"

namespace sitetrack {

using Point3 = Eigen::Vector3d;

/// 6-vector increment for pose optimization: [translation; axis-angle rotation].
using Twist = Eigen::Matrix<double, 6, 1>;

/// Rigid transform p_out = rotation * p_in + translation.
/// The camera pose is stored as the camera-in-world transform T_wc
/// (maps camera coordinates to world coordinates).
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }

  Point3 operator*(const Point3& p) const { return rotation * p + translation; }
  Pose operator*(const Pose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }
  Pose inverse() const {
    Eigen::Matrix3d rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  /// Re-projects the rotation onto SO(3). Cheap hygiene after long compose chains.
  Pose orthonormalized() const;
};

inline Point3 transform_point(const Pose& pose, const Point3& p) { return pose * p; }
inline Pose compose(const Pose& a, const Pose& b) { return a * b; }
inline Pose invert(const Pose& p) { return p.inverse(); }

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// SE(3) exponential map. twist = [rho; phi].
Pose pose_exp(const Twist& twist);

/// SE(3) logarithm; requires rotation angle < pi. Throws NearPiRotation.
Twist pose_log(const Pose& p);

/// Rotation angle of the pose in [0, pi].
double rotation_angle(const Pose& p);

/// RtR = I and det(R) = +1 within tol.
bool is_rigid_transform(const Pose& p, double tol = 1e-9);

/// Normalized quaternion with canonical sign (w >= 0).
Eigen::Quaterniond to_quaternion(const Pose& p);
Pose pose_from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);

/// Rectified pinhole stereo rig. No distortion model.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double baseline = 0.0;  // meters
  int width = 0;
  int height = 0;

  void validate() const;  // throws ConfigInvalid
};

struct PixelMono {
  double u_l = 0.0;
  double v_l = 0.0;
};

struct PixelStereo {
  double u_l = 0.0;
  double v_l = 0.0;
  double u_r = 0.0;

  double disparity() const { return u_l - u_r; }
};

/// Disparities at or below this are degenerate: depth error explodes, so the
/// observation is discarded rather than clamped.
inline constexpr double kMinDisparity = 0.1;

/// Left-camera projection. Throws NonPositiveDepth for Z <= 0.
PixelMono project_mono(const CameraIntrinsics& K, const Point3& p_cam);

/// Rectified stereo projection; disparity is fx*baseline/Z.
/// Throws NonPositiveDepth for Z <= 0.
PixelStereo project_stereo(const CameraIntrinsics& K, const Point3& p_cam);

/// Closed-form inverse of project_stereo. Throws DegenerateDisparity when
/// disparity <= kMinDisparity.
Point3 triangulate_stereo(const CameraIntrinsics& K, const PixelStereo& obs);

/// IRLS weight of the Huber cost at the given squared residual:
/// 1 inside the quadratic region, delta/|r| outside.
double huber_weight(double squared_error, double delta);

}  // namespace sitetrack
