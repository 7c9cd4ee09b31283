#include "pamm/pose.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pamm/error.hpp"

namespace pamm {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kZeroResultantTolerance = 1e-12;

}  // namespace

double normalize_degrees(double degrees) noexcept {
  double r = std::fmod(degrees, 360.0);
  if (r < 0.0) r += 360.0;
  // fmod of a tiny negative value plus 360 rounds to exactly 360.
  if (r >= 360.0) r = 0.0;
  return r;
}

double pose_angle(const Eigen::Vector2d& to_camera, const Eigen::Vector2d& velocity) {
  if (velocity.norm() == 0.0) throw Error(ErrorCode::ZeroVelocity, "pose angle undefined for zero velocity");
  if (to_camera.norm() == 0.0) throw Error(ErrorCode::ObjectAtCamera, "object stands at the camera position");
  const double cross = to_camera.x() * velocity.y() - to_camera.y() * velocity.x();
  const double dot = to_camera.dot(velocity);
  return normalize_degrees(std::atan2(cross, dot) * kRadToDeg);
}

Track compute_velocity(Track track, double frame_rate) {
  auto& samples = track.samples();
  if (samples.size() < 2) {
    throw Error(ErrorCode::TrackTooShort, "velocity needs at least two samples (object " +
                                              std::to_string(track.object_id()) + ")");
  }
  if (!(frame_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "frame rate must be positive");
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double frames = samples[i + 1].frame - samples[i].frame;
    samples[i].velocity = (samples[i + 1].world_pos - samples[i].world_pos) * (frame_rate / frames);
  }
  samples.back().velocity = samples[samples.size() - 2].velocity;
  return track;
}

double estimate_pose_angle(const TrackSample& sample, const CameraModel& camera) {
  if (!sample.velocity) throw Error(ErrorCode::InvalidArgument, "sample has no velocity; run compute_velocity first");
  const Eigen::Vector2d to_camera = camera.position().head<2>() - sample.world_pos;
  return pose_angle(to_camera, *sample.velocity);
}

Track estimate_pose_angles(Track track, const CameraModel& camera) {
  auto& samples = track.samples();
  std::vector<bool> defined(samples.size(), false);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      samples[i].raw_angle = estimate_pose_angle(samples[i], camera);
      defined[i] = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroVelocity && e.code() != ErrorCode::ObjectAtCamera) throw;
      samples[i].flags |= kAngleUndefined;
    }
  }
  std::optional<double> last;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (defined[i]) {
      last = samples[i].raw_angle;
    } else if (last) {
      samples[i].raw_angle = last;
    }
  }
  last.reset();
  for (std::size_t i = samples.size(); i-- > 0;) {
    if (defined[i]) {
      last = samples[i].raw_angle;
    } else if (!samples[i].raw_angle) {
      samples[i].raw_angle = last.value_or(0.0);
    }
  }
  return track;
}

Track smooth_angles(Track track, int window_half_width) {
  if (window_half_width < 0) throw Error(ErrorCode::InvalidArgument, "smoothing half-width must be >= 0");
  auto& samples = track.samples();
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  std::vector<double> sines(samples.size());
  std::vector<double> cosines(samples.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!samples[i].raw_angle) throw Error(ErrorCode::InvalidArgument, "sample has no raw angle");
    const double rad = *samples[i].raw_angle * kDegToRad;
    sines[i] = std::sin(rad);
    cosines[i] = std::cos(rad);
  }
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, t - window_half_width);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, t + window_half_width);
    double s = 0.0;
    double c = 0.0;
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      s += sines[i];
      c += cosines[i];
    }
    if (std::abs(s) <= kZeroResultantTolerance && std::abs(c) <= kZeroResultantTolerance) {
      samples[t].smooth_angle = samples[t].raw_angle;
      samples[t].flags |= kZeroResultant;
    } else {
      samples[t].smooth_angle = normalize_degrees(std::atan2(s, c) * kRadToDeg);
    }
  }
  return track;
}

}  // namespace pamm
