#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace pamm {

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

// Pinhole camera. `rotation` maps world directions into the camera frame and
// `position` is the camera centre in world coordinates, so a world point X
// lands at K * R * (X - position). The ground plane is Z = 0, units are metres.
class CameraModel {
 public:
  CameraModel(std::string camera_id, const Eigen::Matrix3d& intrinsics,
              const Eigen::Matrix3d& rotation, const Eigen::Vector3d& position);

  // Camera at `position` whose optical axis points at `target`; image y runs
  // along the projection of -`up`.
  static CameraModel look_at(std::string camera_id, const Eigen::Matrix3d& intrinsics,
                             const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                             const Eigen::Vector3d& up = Eigen::Vector3d::UnitZ());

  const std::string& id() const noexcept { return camera_id_; }
  const Eigen::Matrix3d& intrinsics() const noexcept { return intrinsics_; }
  const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  const Eigen::Vector3d& position() const noexcept { return position_; }
  const Eigen::Matrix3d& intrinsics_inverse() const noexcept { return intrinsics_inverse_; }

  // 3x4 matrix K [R | -R t].
  Eigen::Matrix<double, 3, 4> projection_matrix() const;

  // Depth of a world point along the optical axis.
  double depth(const WorldPoint& point) const;

 private:
  std::string camera_id_;
  Eigen::Matrix3d intrinsics_;
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d position_;
  Eigen::Matrix3d intrinsics_inverse_;
};

/// Projects a world point to pixels. Throws DepthNonPositive for points at or
/// behind the camera plane.
PixelPoint project(const CameraModel& camera, const WorldPoint& point);

/// Intersects the viewing ray of `pixel` with the ground plane Z = 0.
/// Throws RayParallelToGround when the ray never meets the ground in front of
/// the camera.
WorldPoint back_project_to_ground(const CameraModel& camera, const PixelPoint& pixel);

CameraModel camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const CameraModel& camera);

// Accepts a single calibration object or an array of them.
std::vector<CameraModel> load_cameras(const std::string& path);
void save_cameras(const std::string& path, const std::vector<CameraModel>& cameras);

const CameraModel& find_camera(const std::vector<CameraModel>& cameras, const std::string& id);

}  // namespace pamm
