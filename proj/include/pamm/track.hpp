#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pamm {

using ObjectId = std::int64_t;

struct BoundingBox {
  double x = 0.0;  // top-left, pixels
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const noexcept { return w * h; }
  bool valid() const noexcept { return w > 0.0 && h > 0.0; }
};

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept;

struct ConfidenceReport {
  double delta = 0.0;      // degrees
  double speed = 0.0;      // m/s
  double occlusion = 0.0;  // [0, 1]
  double confidence = 0.0;
};

enum SampleFlag : unsigned {
  kAngleUndefined = 1u << 0,  // zero velocity or object at the camera; angle carried from a neighbour
  kZeroResultant = 1u << 1,   // smoothing window cancelled out; raw angle kept
};

struct TrackSample {
  ObjectId object_id = 0;
  std::string camera_id;
  int frame = 0;
  Eigen::Vector2d world_pos = Eigen::Vector2d::Zero();
  BoundingBox bbox;
  std::optional<Eigen::Vector2d> velocity;  // m/s
  std::optional<double> raw_angle;          // degrees in [0, 360)
  std::optional<double> smooth_angle;       // degrees in [0, 360)
  std::optional<ConfidenceReport> confidence;
  unsigned flags = 0;
};

// Time-ordered samples of one object in one camera.
class Track {
 public:
  Track() = default;
  // Validates ids and strictly increasing frames.
  Track(ObjectId object_id, std::string camera_id, std::vector<TrackSample> samples);

  ObjectId object_id() const noexcept { return object_id_; }
  const std::string& camera_id() const noexcept { return camera_id_; }
  const std::vector<TrackSample>& samples() const noexcept { return samples_; }
  std::vector<TrackSample>& samples() noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  int t_start() const;
  int t_end() const;

 private:
  ObjectId object_id_ = 0;
  std::string camera_id_;
  std::vector<TrackSample> samples_;
};

// Groups loose samples into tracks keyed by (camera, object), sorted by frame.
std::vector<Track> group_into_tracks(std::vector<TrackSample> samples);

std::vector<TrackSample> flatten_tracks(const std::vector<Track>& tracks);

}  // namespace pamm
