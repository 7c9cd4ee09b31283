#include <doctest.h>

#include <random>

#include "pamm/camera.hpp"
#include "support.hpp"

using namespace pamm;

namespace {

// Camera looking straight down from `height` above (x, y); image x runs along
// world +X and image y along world -Y.
CameraModel overhead(double x, double y, double height, const Eigen::Matrix3d& k = Eigen::Matrix3d::Identity()) {
  Eigen::Matrix3d r = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  return CameraModel("top", k, r, Eigen::Vector3d(x, y, height));
}

}  // namespace

TEST_SUITE("camera") {
  TEST_CASE("principal ray lands on the principal point") {
    const CameraModel cam = overhead(0.0, 0.0, 0.0);
    const PixelPoint px = project(cam, {0.0, 0.0, -1.0});
    CHECK(px.u == doctest::Approx(0.0));
    CHECK(px.v == doctest::Approx(0.0));
  }

  TEST_CASE("ground grid matches a direct 3x4 matrix product") {
    const Eigen::Matrix3d k = testing::intrinsics(620.0, 320.0, 240.0);
    const Eigen::Vector3d centre(2.0, -9.0, 4.5);
    const CameraModel cam = CameraModel::look_at("c", k, centre, Eigen::Vector3d(1.0, 2.0, 0.0));
    // Oracle: P = K [R | -R C], built here from the raw pieces.
    Eigen::Matrix<double, 3, 4> p;
    p.leftCols<3>() = k * cam.rotation();
    p.col(3) = -k * cam.rotation() * centre;
    for (double x = -3.0; x <= 5.0; x += 0.5) {
      for (double y = -2.0; y <= 8.0; y += 0.5) {
        const Eigen::Vector3d h = p * Eigen::Vector4d(x, y, 0.0, 1.0);
        const PixelPoint px = project(cam, {x, y, 0.0});
        CHECK(std::abs(px.u - h.x() / h.z()) < 1e-9);
        CHECK(std::abs(px.v - h.y() / h.z()) < 1e-9);
      }
    }
  }

  TEST_CASE("projection is invariant to scaling the homogeneous world point") {
    const CameraModel cam = testing::oblique_camera();
    const Eigen::Matrix<double, 3, 4> p = cam.projection_matrix();
    const Eigen::Vector4d x(1.5, 2.0, 0.3, 1.0);
    const PixelPoint ref = project(cam, {x.x(), x.y(), x.z()});
    for (double s : {0.01, 0.5, 3.0, 1e4}) {
      const Eigen::Vector3d h = p * (s * x);
      CHECK(std::abs(h.x() / h.z() - ref.u) < 1e-9);
      CHECK(std::abs(h.y() / h.z() - ref.v) < 1e-9);
    }
  }

  TEST_CASE("points at or behind the camera plane are rejected") {
    const CameraModel cam = overhead(0.0, 0.0, 10.0);
    CHECK(testing::error_code_of([&] { project(cam, {5.0, 5.0, 10.0}); }) == ErrorCode::DepthNonPositive);
    CHECK(testing::error_code_of([&] { project(cam, {0.0, 0.0, 11.0}); }) == ErrorCode::DepthNonPositive);
  }

  TEST_CASE("back projection round trip on random ground points") {
    const CameraModel cam = testing::oblique_camera();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-4.0, 4.0);
    std::uniform_real_distribution<double> uy(-3.0, 6.0);
    for (int i = 0; i < 100; ++i) {
      const WorldPoint g{ux(rng), uy(rng), 0.0};
      const PixelPoint px = project(cam, g);
      const WorldPoint back = back_project_to_ground(cam, px);
      CHECK(std::hypot(back.x - g.x, back.y - g.y) < 1e-6);
      CHECK(back.z == 0.0);
      const PixelPoint again = project(cam, back);
      CHECK(std::hypot(again.u - px.u, again.v - px.v) < 1e-6);
    }
  }

  TEST_CASE("pixels on or above the horizon never reach the ground") {
    // Level camera: the principal row is the horizon.
    const CameraModel level = CameraModel::look_at("lvl", testing::intrinsics(), Eigen::Vector3d(0.0, -10.0, 2.0),
                                                   Eigen::Vector3d(0.0, 0.0, 2.0));
    CHECK(testing::error_code_of([&] { back_project_to_ground(level, {352.0, 288.0}); }) ==
          ErrorCode::RayParallelToGround);
    CHECK(testing::error_code_of([&] { back_project_to_ground(level, {100.0, 50.0}); }) ==
          ErrorCode::RayParallelToGround);
    CHECK_NOTHROW(back_project_to_ground(level, {352.0, 400.0}));
  }

  TEST_CASE("overhead camera sees the point beneath it at the image centre") {
    const CameraModel cam = overhead(2.0, 3.0, 10.0);
    const WorldPoint g = back_project_to_ground(cam, {0.0, 0.0});
    CHECK(g.x == doctest::Approx(2.0));
    CHECK(g.y == doctest::Approx(3.0));
    CHECK(g.z == 0.0);
  }

  TEST_CASE("depth is measured along the optical axis") {
    const CameraModel cam = overhead(0.0, 0.0, 10.0);
    CHECK(cam.depth({3.0, -4.0, 0.0}) == doctest::Approx(10.0));
    CHECK(cam.depth({0.0, 0.0, 12.0}) == doctest::Approx(-2.0));
  }

  TEST_CASE("calibration json round trip") {
    const CameraModel cam = testing::oblique_camera();
    const CameraModel back = camera_from_json(camera_to_json(cam));
    CHECK(back.id() == cam.id());
    CHECK((back.intrinsics() - cam.intrinsics()).norm() < 1e-12);
    CHECK((back.rotation() - cam.rotation()).norm() < 1e-12);
    CHECK((back.position() - cam.position()).norm() < 1e-12);
  }

  TEST_CASE("non-orthonormal rotation is rejected") {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    r(0, 0) = 2.0;
    CHECK(testing::error_code_of([&] { CameraModel("x", Eigen::Matrix3d::Identity(), r, Eigen::Vector3d::Zero()); })
              .has_value());
  }
}
