#include "sitetrack/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace sitetrack {

Pose Pose::orthonormalized() const {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return {r, translation};
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Pose pose_exp(const Twist& twist) {
  const Eigen::Vector3d rho = twist.head<3>();
  const Eigen::Vector3d phi = twist.tail<3>();
  const double theta2 = phi.squaredNorm();
  const Eigen::Matrix3d w = skew(phi);

  double a, b, c;  // sin/theta, (1-cos)/theta^2, (theta-sin)/theta^3
  if (theta2 < 1e-12) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }

  Pose out;
  out.rotation = Eigen::Matrix3d::Identity() + a * w + b * w * w;
  const Eigen::Matrix3d v = Eigen::Matrix3d::Identity() + b * w + c * w * w;
  out.translation = v * rho;
  return out;
}

Twist pose_log(const Pose& p) {
  const double cos_theta = std::clamp((p.rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  if (theta > M_PI - 1e-6) {
    throw NearPiRotation("pose_log: rotation angle too close to pi");
  }

  Eigen::Vector3d phi;
  const Eigen::Matrix3d r_asym = p.rotation - p.rotation.transpose();
  const Eigen::Vector3d vee(r_asym(2, 1), r_asym(0, 2), r_asym(1, 0));
  if (theta < 1e-6) {
    phi = 0.5 * vee * (1.0 + theta * theta / 6.0);
  } else {
    phi = vee * (theta / (2.0 * std::sin(theta)));
  }

  const Eigen::Matrix3d w = skew(phi);
  Eigen::Matrix3d v_inv;
  if (theta < 1e-6) {
    v_inv = Eigen::Matrix3d::Identity() - 0.5 * w + (1.0 / 12.0) * w * w;
  } else {
    const double half = 0.5 * theta;
    const double cot_half = std::cos(half) / std::sin(half);
    const double coeff = (1.0 - half * cot_half) / (theta * theta);
    v_inv = Eigen::Matrix3d::Identity() - 0.5 * w + coeff * w * w;
  }

  Twist out;
  out.head<3>() = v_inv * p.translation;
  out.tail<3>() = phi;
  return out;
}

double rotation_angle(const Pose& p) {
  const double cos_theta = std::clamp((p.rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(cos_theta);
}

bool is_rigid_transform(const Pose& p, double tol) {
  if (!p.rotation.allFinite() || !p.translation.allFinite()) return false;
  const Eigen::Matrix3d gram = p.rotation.transpose() * p.rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(p.rotation.determinant() - 1.0) <= tol;
}

Eigen::Quaterniond to_quaternion(const Pose& p) {
  Eigen::Quaterniond q(p.rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

Pose pose_from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
  return {q.normalized().toRotationMatrix(), t};
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigInvalid("intrinsics: focal lengths must be positive");
  if (!(baseline > 0.0)) throw ConfigInvalid("intrinsics: baseline must be positive");
  if (width <= 0 || height <= 0) throw ConfigInvalid("intrinsics: image size must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw ConfigInvalid("intrinsics: principal point must be finite");
}

PixelMono project_mono(const CameraIntrinsics& K, const Point3& p_cam) {
  if (p_cam.z() <= 0.0) throw NonPositiveDepth("project_mono: point behind camera");
  return {K.fx * p_cam.x() / p_cam.z() + K.cx, K.fy * p_cam.y() / p_cam.z() + K.cy};
}

PixelStereo project_stereo(const CameraIntrinsics& K, const Point3& p_cam) {
  if (p_cam.z() <= 0.0) throw NonPositiveDepth("project_stereo: point behind camera");
  const double inv_z = 1.0 / p_cam.z();
  return {K.fx * p_cam.x() * inv_z + K.cx,
          K.fy * p_cam.y() * inv_z + K.cy,
          K.fx * (p_cam.x() - K.baseline) * inv_z + K.cx};
}

Point3 triangulate_stereo(const CameraIntrinsics& K, const PixelStereo& obs) {
  const double disparity = obs.disparity();
  if (disparity <= kMinDisparity) {
    throw DegenerateDisparity("triangulate_stereo: disparity too small");
  }
  const double z = K.fx * K.baseline / disparity;
  return {(obs.u_l - K.cx) * z / K.fx, (obs.v_l - K.cy) * z / K.fy, z};
}

double huber_weight(double squared_error, double delta) {
  if (squared_error <= delta * delta) return 1.0;
  return delta / std::sqrt(squared_error);
}

}  // namespace sitetrack
