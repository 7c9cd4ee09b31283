#include "pamm/camera.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "pamm/error.hpp"

namespace pamm {
namespace {

constexpr double kOrthonormalTolerance = 1e-6;

Eigen::Matrix3d matrix_from_json(const nlohmann::json& j, const char* key) {
  const auto& rows = j.at(key);
  if (!rows.is_array()) {
    throw Error(ErrorCode::ParseError, std::string("calibration field '") + key + "' must be an array");
  }
  Eigen::Matrix3d m;
  if (rows.size() == 9 && rows[0].is_number()) {
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = rows[i].get<double>();
    return m;
  }
  if (rows.size() != 3) {
    throw Error(ErrorCode::ParseError, std::string("calibration field '") + key + "' must be 3x3");
  }
  for (int r = 0; r < 3; ++r) {
    if (!rows[r].is_array() || rows[r].size() != 3) {
      throw Error(ErrorCode::ParseError, std::string("calibration field '") + key + "' must be 3x3");
    }
    for (int c = 0; c < 3; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

nlohmann::json matrix_to_json(const Eigen::Matrix3d& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

}  // namespace

CameraModel::CameraModel(std::string camera_id, const Eigen::Matrix3d& intrinsics,
                         const Eigen::Matrix3d& rotation, const Eigen::Vector3d& position)
    : camera_id_(std::move(camera_id)),
      intrinsics_(intrinsics),
      rotation_(rotation),
      position_(position) {
  if (!intrinsics_.allFinite() || !rotation_.allFinite() || !position_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "camera '" + camera_id_ + "' has non-finite parameters");
  }
  if ((rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >
      kOrthonormalTolerance) {
    throw Error(ErrorCode::InvalidArgument, "camera '" + camera_id_ + "' rotation is not orthonormal");
  }
  if (intrinsics_(1, 0) != 0.0 || intrinsics_(2, 0) != 0.0 || intrinsics_(2, 1) != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "camera '" + camera_id_ + "' intrinsics are not upper-triangular");
  }
  if (intrinsics_(0, 0) <= 0.0 || intrinsics_(1, 1) <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "camera '" + camera_id_ + "' focal lengths must be positive");
  }
  // Homogeneous normalisation; K(2,2) is expected to be 1 but any positive value works.
  if (intrinsics_(2, 2) <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "camera '" + camera_id_ + "' intrinsics K(2,2) must be positive");
  }
  intrinsics_inverse_ = intrinsics_.inverse();
}

CameraModel CameraModel::look_at(std::string camera_id, const Eigen::Matrix3d& intrinsics,
                                 const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                                 const Eigen::Vector3d& up) {
  const Eigen::Vector3d forward = (target - position).normalized();
  Eigen::Vector3d right = forward.cross(up);
  if (right.norm() < 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "look_at: viewing direction is parallel to up");
  }
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d rotation;
  rotation.row(0) = right.transpose();
  rotation.row(1) = down.transpose();
  rotation.row(2) = forward.transpose();
  return CameraModel(std::move(camera_id), intrinsics, rotation, position);
}

Eigen::Matrix<double, 3, 4> CameraModel::projection_matrix() const {
  Eigen::Matrix<double, 3, 4> extrinsic;
  extrinsic.leftCols<3>() = rotation_;
  extrinsic.col(3) = -rotation_ * position_;
  return intrinsics_ * extrinsic;
}

double CameraModel::depth(const WorldPoint& point) const {
  const Eigen::Vector3d p(point.x, point.y, point.z);
  return rotation_.row(2).dot(p - position_);
}

PixelPoint project(const CameraModel& camera, const WorldPoint& point) {
  const Eigen::Vector3d p(point.x, point.y, point.z);
  const Eigen::Vector3d cam = camera.rotation() * (p - camera.position());
  if (!(cam.z() > 0.0)) {
    throw Error(ErrorCode::DepthNonPositive, "point lies at or behind the camera plane");
  }
  const Eigen::Vector3d h = camera.intrinsics() * cam;
  return {h.x() / h.z(), h.y() / h.z()};
}

WorldPoint back_project_to_ground(const CameraModel& camera, const PixelPoint& pixel) {
  const Eigen::Vector3d ray_cam = camera.intrinsics_inverse() * Eigen::Vector3d(pixel.u, pixel.v, 1.0);
  const Eigen::Vector3d ray = camera.rotation().transpose() * ray_cam;
  const Eigen::Vector3d& origin = camera.position();
  if (std::abs(ray.z()) <= 1e-12 * ray.norm()) {
    throw Error(ErrorCode::RayParallelToGround, "viewing ray is parallel to the ground plane");
  }
  const double s = -origin.z() / ray.z();
  if (!(s > 0.0)) {
    throw Error(ErrorCode::RayParallelToGround, "viewing ray meets the ground behind the camera");
  }
  const Eigen::Vector3d hit = origin + s * ray;
  return {hit.x(), hit.y(), 0.0};
}

CameraModel camera_from_json(const nlohmann::json& j) {
  try {
    const auto& t = j.at("t");
    if (!t.is_array() || t.size() != 3) {
      throw Error(ErrorCode::ParseError, "calibration field 't' must have 3 entries");
    }
    return CameraModel(j.at("camera_id").get<std::string>(), matrix_from_json(j, "K"),
                       matrix_from_json(j, "R"),
                       Eigen::Vector3d(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed calibration: ") + e.what());
  }
}

nlohmann::json camera_to_json(const CameraModel& camera) {
  const auto& t = camera.position();
  return {{"camera_id", camera.id()},
          {"K", matrix_to_json(camera.intrinsics())},
          {"R", matrix_to_json(camera.rotation())},
          {"t", {t.x(), t.y(), t.z()}}};
}

std::vector<CameraModel> load_cameras(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open calibration file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  std::vector<CameraModel> cameras;
  if (j.is_array()) {
    for (const auto& item : j) cameras.push_back(camera_from_json(item));
  } else {
    cameras.push_back(camera_from_json(j));
  }
  return cameras;
}

void save_cameras(const std::string& path, const std::vector<CameraModel>& cameras) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : cameras) j.push_back(camera_to_json(c));
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << j.dump(2) << '\n';
}

const CameraModel& find_camera(const std::vector<CameraModel>& cameras, const std::string& id) {
  for (const auto& c : cameras) {
    if (c.id() == id) return c;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown camera '" + id + "'");
}

}  // namespace pamm
