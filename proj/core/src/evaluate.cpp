#include "sitetrack/evaluate.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace sitetrack {

AlignmentResult umeyama_align(const Trajectory& est, const Trajectory& gt, bool with_scale) {
  const std::size_t n = est.size();
  if (n != gt.size()) {
    throw LengthMismatch("umeyama_align: " + std::to_string(n) + " vs " +
                         std::to_string(gt.size()) + " poses");
  }
  if (n < 3) throw DegenerateGeometry("umeyama_align: need at least 3 poses");

  Eigen::Matrix3Xd x(3, n), y(3, n);
  for (std::size_t i = 0; i < n; ++i) {
    x.col(static_cast<Eigen::Index>(i)) = est.entries[i].pose.translation;
    y.col(static_cast<Eigen::Index>(i)) = gt.entries[i].pose.translation;
  }
  const Eigen::Vector3d mu_x = x.rowwise().mean();
  const Eigen::Vector3d mu_y = y.rowwise().mean();
  x.colwise() -= mu_x;
  y.colwise() -= mu_y;

  const Eigen::Matrix3d sigma = y * x.transpose() / static_cast<double>(n);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();

  // Collinear point sets leave the rotation about the line axis undetermined.
  const double x_spread2 = x.squaredNorm() / static_cast<double>(n);
  Eigen::JacobiSVD<Eigen::Matrix3Xd> scatter(x);
  const Eigen::VectorXd sv = scatter.singularValues();
  if (sv.size() < 2 || sv(1) <= 1e-9 * std::max(1.0, sv(0))) {
    throw DegenerateGeometry("umeyama_align: positions are collinear");
  }

  Eigen::Matrix3d s_fix = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s_fix(2, 2) = -1.0;
  const Eigen::Matrix3d rotation = svd.matrixU() * s_fix * svd.matrixV().transpose();

  AlignmentResult out;
  out.scale = with_scale ? (d.asDiagonal() * s_fix).trace() / x_spread2 : 1.0;
  out.transform.rotation = rotation;
  out.transform.translation = mu_y - out.scale * (rotation * mu_x);

  out.per_pose_errors.reserve(n);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d mapped =
        out.scale * (rotation * est.entries[i].pose.translation) + out.transform.translation;
    const double err = (gt.entries[i].pose.translation - mapped).norm();
    out.per_pose_errors.push_back(err);
    sum_sq += err * err;
  }
  out.at_rmse = std::sqrt(sum_sq / static_cast<double>(n));
  return out;
}

double at_rmse(const Trajectory& est_aligned, const Trajectory& gt) {
  if (est_aligned.size() != gt.size()) {
    throw LengthMismatch("at_rmse: " + std::to_string(est_aligned.size()) + " vs " +
                         std::to_string(gt.size()) + " poses");
  }
  if (est_aligned.empty()) return 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < est_aligned.size(); ++i) {
    sum_sq +=
        (est_aligned.entries[i].pose.translation - gt.entries[i].pose.translation).squaredNorm();
  }
  return std::sqrt(sum_sq / static_cast<double>(est_aligned.size()));
}

std::vector<std::pair<std::size_t, std::size_t>> associate_by_timestamp(const Trajectory& est,
                                                                        const Trajectory& gt,
                                                                        double offset,
                                                                        double max_gap) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (est.empty() || gt.empty()) return pairs;

  // Nearest gt entry per est entry; each gt entry keeps only its closest taker.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> taker(gt.size(), kNone);
  std::vector<double> taker_gap(gt.size(), 0.0);

  std::size_t j = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double t = est.entries[i].timestamp;
    while (j + 1 < gt.size() && gt.entries[j + 1].timestamp + offset <= t) ++j;
    std::size_t best = j;
    double best_gap = std::abs(gt.entries[j].timestamp + offset - t);
    if (j + 1 < gt.size()) {
      const double gap = std::abs(gt.entries[j + 1].timestamp + offset - t);
      if (gap < best_gap) {
        best = j + 1;
        best_gap = gap;
      }
    }
    if (best_gap > max_gap) continue;
    if (taker[best] == kNone || best_gap < taker_gap[best]) {
      taker[best] = i;
      taker_gap[best] = best_gap;
    }
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (taker[g] != kNone) pairs.emplace_back(taker[g], g);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

namespace {

double median_spacing(const Trajectory& t) {
  if (t.size() < 2) return 0.0;
  std::vector<double> gaps;
  gaps.reserve(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) {
    gaps.push_back(t.entries[i].timestamp - t.entries[i - 1].timestamp);
  }
  std::sort(gaps.begin(), gaps.end());
  return (gaps[(gaps.size() - 1) / 2] + gaps[gaps.size() / 2]) * 0.5;
}

Trajectory select(const Trajectory& t, std::span<const std::pair<std::size_t, std::size_t>> pairs,
                  bool first) {
  Trajectory out;
  out.entries.reserve(pairs.size());
  for (const auto& [i, g] : pairs) {
    out.entries.push_back(t.entries[first ? i : g]);
  }
  return out;
}

}  // namespace

double sync_time_offset(const Trajectory& est, const Trajectory& gt, double search_window,
                        double step) {
  if (est.empty() || gt.empty()) throw NoOverlap("sync_time_offset: empty trajectory");
  if (!(step > 0.0)) throw ConfigInvalid("sync_time_offset: step must be positive");
  if (search_window < 0.0) throw ConfigInvalid("sync_time_offset: window must be non-negative");

  double spacing = median_spacing(est);
  if (spacing <= 0.0) spacing = median_spacing(gt);
  if (spacing <= 0.0) spacing = step;
  const double max_gap = 0.5 * spacing;

  const int half_steps = static_cast<int>(std::floor(search_window / step + 1e-9));
  bool found = false;
  double best_rmse = 0.0, best_offset = 0.0;
  for (int k = -half_steps; k <= half_steps; ++k) {
    const double offset = k * step;
    const auto pairs = associate_by_timestamp(est, gt, offset, max_gap);
    if (pairs.size() < 3) continue;
    double rmse;
    try {
      rmse = umeyama_align(select(est, pairs, true), select(gt, pairs, false), false).at_rmse;
    } catch (const DegenerateGeometry&) {
      continue;
    }
    const bool better =
        !found || rmse < best_rmse ||
        (rmse == best_rmse && std::abs(offset) < std::abs(best_offset));
    if (better) {
      found = true;
      best_rmse = rmse;
      best_offset = offset;
    }
  }
  if (!found) {
    throw NoOverlap("sync_time_offset: no offset in the window yields 3 associated poses");
  }
  return best_offset;
}

TrajectoryEvaluation evaluate_trajectories(const Trajectory& est, const Trajectory& gt,
                                           double search_window, double step, bool with_scale) {
  TrajectoryEvaluation out;
  out.offset = sync_time_offset(est, gt, search_window, step);
  double spacing = median_spacing(est);
  if (spacing <= 0.0) spacing = median_spacing(gt);
  if (spacing <= 0.0) spacing = step;
  const auto pairs = associate_by_timestamp(est, gt, out.offset, 0.5 * spacing);
  out.matched_poses = pairs.size();
  out.alignment = umeyama_align(select(est, pairs, true), select(gt, pairs, false), with_scale);
  return out;
}

RocCurve roc_auc(std::span<const RocRecord> records, std::span<const double> sigma_values) {
  if (records.empty()) throw EmptyRecords("roc_auc: no records");
  if (sigma_values.empty()) throw EmptyRecords("roc_auc: empty sigma sweep");

  std::size_t positives = 0, negatives = 0;
  for (const RocRecord& r : records) {
    (r.gt_static ? positives : negatives)++;
  }
  if (positives == 0 || negatives == 0) {
    throw EmptyRecords("roc_auc: need records of both classes");
  }

  RocCurve curve;
  curve.points.reserve(sigma_values.size());
  for (double sigma : sigma_values) {
    const double threshold = 3.0 * sigma;
    std::size_t tp = 0, fp = 0;
    for (const RocRecord& r : records) {
      if (r.score < threshold) {
        (r.gt_static ? tp : fp)++;
      }
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives), sigma});
  }
  std::sort(curve.points.begin(), curve.points.end(), [](const RocPoint& a, const RocPoint& b) {
    if (a.false_positive_rate != b.false_positive_rate) {
      return a.false_positive_rate < b.false_positive_rate;
    }
    return a.true_positive_rate < b.true_positive_rate;
  });

  // Trapezoid over the curve closed at (0,0) and (1,1).
  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (const RocPoint& p : curve.points) {
    auc += (p.false_positive_rate - prev_fpr) * (p.true_positive_rate + prev_tpr) * 0.5;
    prev_fpr = p.false_positive_rate;
    prev_tpr = p.true_positive_rate;
  }
  auc += (1.0 - prev_fpr) * (1.0 + prev_tpr) * 0.5;
  curve.auc = auc;
  return curve;
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 2) return {lo};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    out.push_back(lo + (hi - lo) * i / (steps - 1));
  }
  return out;
}

}  // namespace sitetrack
