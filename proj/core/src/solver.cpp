#include <Eigen/Cholesky>

#include "sitetrack/tracking.hpp"

namespace sitetrack {

ResidualEval evaluate_match_residual(const CameraIntrinsics& K, const TrackMatch& match,
                                     const Pose& camera_from_world) {
  ResidualEval out;
  const Point3 q = camera_from_world * match.world;
  if (q.z() <= 1e-9) return out;

  const double inv_z = 1.0 / q.z();
  const double inv_z2 = inv_z * inv_z;
  const double u = K.fx * q.x() * inv_z + K.cx;
  const double v = K.fy * q.y() * inv_z + K.cy;

  out.dims = match.u_r ? 3 : 2;
  out.residual.x() = match.u_l - u;
  out.residual.y() = match.v_l - v;

  Eigen::Matrix3d proj_jac = Eigen::Matrix3d::Zero();
  proj_jac(0, 0) = K.fx * inv_z;
  proj_jac(0, 2) = -K.fx * q.x() * inv_z2;
  proj_jac(1, 1) = K.fy * inv_z;
  proj_jac(1, 2) = -K.fy * q.y() * inv_z2;
  if (out.dims == 3) {
    const double u_r = K.fx * (q.x() - K.baseline) * inv_z + K.cx;
    out.residual.z() = *match.u_r - u_r;
    proj_jac(2, 0) = K.fx * inv_z;
    proj_jac(2, 2) = -K.fx * (q.x() - K.baseline) * inv_z2;
  }

  // Left-multiplied twist on the camera-from-world transform:
  // d(exp(xi) * q)/dxi = [I | -skew(q)].
  Eigen::Matrix<double, 3, 6> point_jac;
  point_jac.leftCols<3>() = Eigen::Matrix3d::Identity();
  point_jac.rightCols<3>() = -skew(q);
  out.jacobian = -proj_jac * point_jac;
  out.valid = true;
  return out;
}

namespace {

struct MatchWeights {
  double inv_sigma2;
  double delta;
};

MatchWeights weights_for(const TrackMatch& match, const TrackingConfig& cfg) {
  const double sigma = std::pow(cfg.scale_factor, match.scale_level);
  return {1.0 / (sigma * sigma), match.u_r ? cfg.huber_delta_stereo : cfg.huber_delta_mono};
}

double squared_mahalanobis(const ResidualEval& eval, double inv_sigma2) {
  const double sq = eval.dims == 3 ? eval.residual.squaredNorm()
                                   : eval.residual.head<2>().squaredNorm();
  return sq * inv_sigma2;
}

struct CostEval {
  double cost = 0.0;
  int valid = 0;
};

CostEval robust_cost(std::span<const TrackMatch> matches, const CameraIntrinsics& K, const Pose& C,
                     const TrackingConfig& cfg) {
  CostEval out;
  for (const TrackMatch& match : matches) {
    const ResidualEval eval = evaluate_match_residual(K, match, C);
    if (!eval.valid) continue;
    const MatchWeights w = weights_for(match, cfg);
    const double e = squared_mahalanobis(eval, w.inv_sigma2);
    const double d2 = w.delta * w.delta;
    out.cost += e <= d2 ? e : 2.0 * w.delta * std::sqrt(e) - d2;
    ++out.valid;
  }
  return out;
}

}  // namespace

SolveStats solve_motion_only_ba(std::span<const TrackMatch> matches, const CameraIntrinsics& K,
                                const Pose& init, const TrackingConfig& cfg) {
  if (matches.size() < static_cast<std::size_t>(cfg.min_inliers)) {
    throw InsufficientMatches("solve_motion_only_ba: " + std::to_string(matches.size()) +
                              " matches, need " + std::to_string(cfg.min_inliers));
  }

  Pose C = init.inverse();
  CostEval current = robust_cost(matches, K, C, cfg);

  SolveStats stats;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (const TrackMatch& match : matches) {
      const ResidualEval eval = evaluate_match_residual(K, match, C);
      if (!eval.valid) continue;
      const MatchWeights mw = weights_for(match, cfg);
      const double e = squared_mahalanobis(eval, mw.inv_sigma2);
      const double w = huber_weight(e, mw.delta) * mw.inv_sigma2;
      const auto jac = eval.jacobian.topRows(eval.dims);
      const auto res = eval.residual.head(eval.dims);
      H.noalias() += w * jac.transpose() * jac;
      g.noalias() += w * jac.transpose() * res;
    }

    Twist step = H.ldlt().solve(-g);
    if (!step.allFinite()) {
      throw SolverDiverged("solve_motion_only_ba: singular normal equations");
    }

    // Full Gauss-Newton step, then up to five damped retries. Five consecutive
    // cost increases mean divergence. A step that pushes previously valid
    // points behind the camera does not count as an improvement.
    bool accepted = false;
    CostEval next;
    Pose candidate;
    for (int attempt = 0; attempt <= 5; ++attempt) {
      candidate = pose_exp(step) * C;
      next = robust_cost(matches, K, candidate, cfg);
      if (next.cost <= current.cost && next.valid >= current.valid) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw SolverDiverged("solve_motion_only_ba: cost increased on five damped steps");
    }

    C = candidate;
    current = next;
    stats.iterations = iter + 1;
    if (step.norm() < cfg.step_norm_epsilon) break;
  }

  stats.pose = C.inverse().orthonormalized();
  stats.final_cost = current.cost;
  stats.inlier_mask.assign(matches.size(), 0);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const ResidualEval eval = evaluate_match_residual(K, matches[i], C);
    if (!eval.valid) continue;
    const MatchWeights mw = weights_for(matches[i], cfg);
    if (squared_mahalanobis(eval, mw.inv_sigma2) < mw.delta * mw.delta) {
      stats.inlier_mask[i] = 1;
      ++stats.inlier_count;
    }
  }
  return stats;
}

}  // namespace sitetrack
