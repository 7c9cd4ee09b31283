#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pamm/camera.hpp"
#include "pamm/features.hpp"
#include "pamm/track.hpp"

namespace pamm {

// A walkable ground curve made of straight pieces and circular arcs,
// parameterised by arc length.
class GroundPath {
 public:
  static GroundPath line(const Eigen::Vector2d& from, const Eigen::Vector2d& to);
  // Arc around `center` starting at `start_angle` (radians) and turning by
  // `sweep` (positive is counter-clockwise).
  static GroundPath arc(const Eigen::Vector2d& center, double radius, double start_angle, double sweep);
  // Polyline through `waypoints` with each interior corner replaced by a
  // circular fillet of at most `corner_radius`.
  static GroundPath waypoints(const std::vector<Eigen::Vector2d>& points, double corner_radius);

  double length() const noexcept { return length_; }
  Eigen::Vector2d position(double s) const;
  Eigen::Vector2d tangent(double s) const;  // unit

 private:
  struct Piece {
    bool is_arc = false;
    Eigen::Vector2d from = Eigen::Vector2d::Zero();
    Eigen::Vector2d to = Eigen::Vector2d::Zero();
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 0.0;
    double start_angle = 0.0;
    double sweep = 0.0;
    double length = 0.0;
  };

  const Piece& locate(double& s) const;
  void append(const Piece& piece);

  std::vector<Piece> pieces_;
  double length_ = 0.0;
};

// Observation of one walker along `path` as seen from `camera`: frames whose
// foot and head both project inside the image with positive depth.
struct PathObservation {
  int frame = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d tangent = Eigen::Vector2d::Zero();
  double true_angle = 0.0;  // degrees, signed camera-to-tangent angle in [0, 360)
  BoundingBox bbox;
};

struct ImageSize {
  int width = 704;
  int height = 576;
};

BoundingBox person_bbox(const CameraModel& camera, const Eigen::Vector2d& foot, double height_m);

// Samples `path` at constant `speed` starting at `start_frame`. Frames where
// the person leaves the image are dropped.
std::vector<PathObservation> observe_path(const GroundPath& path, const CameraModel& camera, const ImageSize& image,
                                          double speed, double frame_rate, int start_frame, double height_m);

struct SceneConfig {
  int identity_count = 100;
  int camera_count = 2;
  std::vector<CameraModel> cameras;  // empty: default layout of camera_count cameras
  ImageSize image;
  double frame_rate = 15.0;
  int duration = 3000;  // frames
  double walk_speed_min = 1.0;
  double walk_speed_max = 1.8;
  int appearance_dim = 32;
  double pose_appearance_strength = 1.0;
  double identity_spread = 1.0;   // norm scale of identity vectors
  double noise_sigma = 1.0;       // norm scale of per-sample feature noise
  double occlusion_probability = 0.01;  // per frame chance a passer-by crosses in front
  double position_noise_sigma = 0.02;   // metres, localisation noise
  int min_track_length = 20;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruthSample {
  ObjectId object_id = 0;
  std::string camera_id;
  int frame = 0;
  double true_angle = 0.0;
  double occlusion = 0.0;
  bool occluded = false;
};

struct GroundTruth {
  std::vector<GroundTruthSample> samples;
  std::vector<ObjectId> identities;   // seen by at least two cameras
  std::vector<ObjectId> distractors;  // passers-by used to inject occlusion
};

struct Scene {
  std::vector<CameraModel> cameras;
  std::vector<Track> tracks;
  FeatureTable features;
  GroundTruth truth;
};

inline constexpr ObjectId kFirstDistractorId = 1000000;
inline constexpr const char* kSyntheticDescriptorId = "synthetic";

// Cameras 6 m high, 12 m from the centre of their own ground zone; zones are
// 100 m apart so fields of view never overlap.
std::vector<CameraModel> default_cameras(int count, const ImageSize& image = {});

/// Deterministic in config.seed. Throws ConfigInvalid.
Scene generate_scene(const SceneConfig& config);

// tracks.csv, features.csv, cameras.json, ground_truth.json
void write_scene(const Scene& scene, const std::string& directory);

// Generator settings without the camera list (cameras travel in cameras.json).
nlohmann::json scene_config_to_json(const SceneConfig& config);
SceneConfig scene_config_from_json(const nlohmann::json& j);

}  // namespace pamm
