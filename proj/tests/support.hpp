#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Core>

#include "pamm/camera.hpp"
#include "pamm/error.hpp"
#include "pamm/multipose.hpp"

namespace testing {

// Code of the pamm::Error thrown by `f`, or nullopt when nothing is thrown.
template <class F>
std::optional<pamm::ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const pamm::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline Eigen::Matrix3d intrinsics(double focal = 500.0, double cx = 352.0, double cy = 288.0) {
  Eigen::Matrix3d k;
  k << focal, 0.0, cx, 0.0, focal, cy, 0.0, 0.0, 1.0;
  return k;
}

// Elevated camera looking obliquely down at the ground around the origin.
inline pamm::CameraModel oblique_camera() {
  return pamm::CameraModel::look_at("cam", intrinsics(), Eigen::Vector3d(-3.0, -12.0, 6.0),
                                    Eigen::Vector3d(0.5, 0.0, 0.0));
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pamm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Model whose group p holds sizes[p] random d-dimensional members.
inline pamm::MultiPoseModel random_model(const std::array<int, 4>& sizes, int dim, std::mt19937_64& rng,
                                         pamm::ObjectId id = 1, const std::string& camera = "a") {
  std::normal_distribution<double> normal;
  pamm::MultiPoseModel m;
  m.object_id = id;
  m.camera_id = camera;
  int frame = 0;
  for (int p = 0; p < 4; ++p) {
    for (int i = 0; i < sizes[p]; ++i) {
      pamm::PoseGroupMember member;
      member.frame = frame++;
      member.feature.values = Eigen::VectorXd::NullaryExpr(dim, [&] { return normal(rng); });
      member.feature.descriptor_id = "test";
      m.groups[p].members.push_back(member);
    }
  }
  return m;
}

}  // namespace testing
