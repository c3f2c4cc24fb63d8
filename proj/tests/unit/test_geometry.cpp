#include <doctest.h>

#include "sitetrack/geometry.hpp"
#include "sitetrack/rng.hpp"
#include "test_helpers.hpp"

using namespace sitetrack;

namespace {

CameraIntrinsics test_intrinsics() {
  CameraIntrinsics K;
  K.fx = K.fy = 500.0;
  K.cx = 480.0;
  K.cy = 270.0;
  K.baseline = 1.0;
  K.width = 960;
  K.height = 540;
  return K;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("transform_point basics") {
  const Point3 p(1.0, 2.0, 3.0);
  CHECK((transform_point(Pose::identity(), p) - p).norm() == doctest::Approx(0.0));

  Pose shift;
  shift.translation = {0.0, 0.0, 5.0};
  CHECK((transform_point(shift, Point3::Zero()) - Point3(0, 0, 5)).norm() ==
        doctest::Approx(0.0));

  Pose quarter;
  quarter.rotation = Eigen::AngleAxisd(M_PI_2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  CHECK((transform_point(quarter, Point3(1, 0, 0)) - Point3(0, 1, 0)).norm() <= 1e-12);
}

TEST_CASE("project_mono examples and errors") {
  const CameraIntrinsics K = test_intrinsics();
  const PixelMono on_axis = project_mono(K, {0, 0, 10});
  CHECK(on_axis.u_l == doctest::Approx(480.0));
  CHECK(on_axis.v_l == doctest::Approx(270.0));

  const PixelMono off_axis = project_mono(K, {1, 0, 10});
  CHECK(off_axis.u_l == doctest::Approx(530.0));
  CHECK(off_axis.v_l == doctest::Approx(270.0));

  CHECK_THROWS_AS(project_mono(K, {0, 0, -1}), NonPositiveDepth);
  CHECK_THROWS_AS(project_mono(K, {0, 0, 0}), NonPositiveDepth);
}

TEST_CASE("project_stereo examples and disparity") {
  const CameraIntrinsics K = test_intrinsics();
  const PixelStereo a = project_stereo(K, {0, 0, 10});
  CHECK(a.u_l == doctest::Approx(480.0));
  CHECK(a.v_l == doctest::Approx(270.0));
  CHECK(a.u_r == doctest::Approx(430.0));
  CHECK(a.disparity() == doctest::Approx(50.0));  // fx * b / Z

  const PixelStereo b = project_stereo(K, {1, 0, 10});
  CHECK(b.u_l == doctest::Approx(530.0));
  CHECK(b.u_r == doctest::Approx(480.0));

  CHECK_THROWS_AS(project_stereo(K, {0, 0, -1}), NonPositiveDepth);
}

TEST_CASE("mono projection equals the first two stereo components exactly") {
  const CameraIntrinsics K = test_intrinsics();
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Point3 p(rng.uniform(-20, 20), rng.uniform(-10, 10), rng.uniform(0.5, 80));
    const PixelMono m = project_mono(K, p);
    const PixelStereo s = project_stereo(K, p);
    CHECK(m.u_l == s.u_l);
    CHECK(m.v_l == s.v_l);
  }
}

TEST_CASE("triangulate_stereo examples and errors") {
  const CameraIntrinsics K = test_intrinsics();
  CHECK((triangulate_stereo(K, {480, 270, 430}) - Point3(0, 0, 10)).norm() <= 1e-9);
  CHECK((triangulate_stereo(K, {530, 270, 480}) - Point3(1, 0, 10)).norm() <= 1e-9);
  CHECK_THROWS_AS(triangulate_stereo(K, {480, 270, 480}), DegenerateDisparity);
  CHECK_THROWS_AS(triangulate_stereo(K, {480, 270, 479.95}), DegenerateDisparity);
}

TEST_CASE("triangulate/project round trip over random rigs") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    CameraIntrinsics K;
    K.fx = rng.uniform(200, 800);
    K.fy = rng.uniform(200, 800);
    K.cx = rng.uniform(300, 700);
    K.cy = rng.uniform(150, 400);
    K.baseline = rng.uniform(0.1, 2.0);
    K.width = 960;
    K.height = 540;
    const double z = rng.uniform(1.0, 100.0);
    const Point3 p(rng.uniform(-0.5, 0.5) * z, rng.uniform(-0.3, 0.3) * z, z);
    const Point3 q = triangulate_stereo(K, project_stereo(K, p));
    CHECK((q - p).norm() <= 1e-6);
  }
}

TEST_CASE("huber weight") {
  const double delta = 2.0;
  CHECK(huber_weight(0.0, delta) == doctest::Approx(1.0));
  CHECK(huber_weight(delta * delta, delta) == doctest::Approx(1.0));
  CHECK(huber_weight(4.0 * delta * delta, delta) == doctest::Approx(0.5));

  // continuity at the quadratic boundary
  const double d2 = delta * delta;
  const double left = huber_weight(d2 * (1.0 - 1e-13), delta);
  const double right = huber_weight(d2 * (1.0 + 1e-13), delta);
  CHECK(std::abs(left - right) <= 1e-12);
}

TEST_CASE("pose_exp of zero is identity") {
  const Pose p = pose_exp(Twist::Zero());
  CHECK((p.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(p.translation.norm() <= 1e-15);
}

TEST_CASE("pose_log inverts pose_exp") {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    Twist v;
    Eigen::Vector3d axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
    axis.normalize();
    v.head<3>() << rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5);
    v.tail<3>() = axis * rng.uniform(0.0, M_PI - 0.011);
    const Twist back = pose_log(pose_exp(v));
    CHECK((back - v).norm() <= 1e-9);
  }
}

TEST_CASE("compose with inverse gives identity") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Pose a = testing::random_pose(rng);
    const Pose id = compose(a, invert(a));
    CHECK((id.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(id.translation.norm() <= 1e-9);
  }
}

TEST_CASE("pose_log rejects rotations at pi") {
  Pose half_turn;
  half_turn.rotation = Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitX()).toRotationMatrix();
  CHECK_THROWS_AS(pose_log(half_turn), NearPiRotation);
}

TEST_CASE("SO(3) closure under long compose chains") {
  Rng rng(17);
  Pose chain;
  for (int i = 0; i < 500; ++i) {
    chain = compose(chain, testing::random_pose(rng, 1.0, 0.5));
    CHECK(is_rigid_transform(chain, 1e-9));
  }
}

TEST_CASE("quaternion round trip with canonical sign") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Pose p = testing::random_pose(rng);
    const Eigen::Quaterniond q = to_quaternion(p);
    CHECK(q.w() >= 0.0);
    const Pose back = pose_from_quaternion(q, p.translation);
    CHECK((back.rotation - p.rotation).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("intrinsics validation") {
  CameraIntrinsics K = test_intrinsics();
  CHECK_NOTHROW(K.validate());
  K.fx = 0.0;
  CHECK_THROWS_AS(K.validate(), ConfigInvalid);
  K = test_intrinsics();
  K.baseline = -1.0;
  CHECK_THROWS_AS(K.validate(), ConfigInvalid);
  K = test_intrinsics();
  K.width = 0;
  CHECK_THROWS_AS(K.validate(), ConfigInvalid);
}

}  // TEST_SUITE
