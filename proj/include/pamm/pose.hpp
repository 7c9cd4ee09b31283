#pragma once

#include <Eigen/Core>

#include "pamm/camera.hpp"
#include "pamm/track.hpp"

namespace pamm {

inline constexpr int kDefaultSmoothingHalfWidth = 10;
inline constexpr double kDefaultFrameRate = 15.0;

/// Wraps any finite angle into [0, 360).
double normalize_degrees(double degrees) noexcept;

/// Signed angle from the camera-viewpoint vector `to_camera` to the walking
/// direction `velocity`, in [0, 360). 0 faces the camera, 180 faces away; the
/// sign of the 2D cross product decides between (0, 180) and (180, 360).
/// Throws ZeroVelocity / ObjectAtCamera for zero-length inputs.
double pose_angle(const Eigen::Vector2d& to_camera, const Eigen::Vector2d& velocity);

/// Forward-difference ground velocity in m/s. The final sample repeats its
/// predecessor's velocity. Throws TrackTooShort below two samples.
Track compute_velocity(Track track, double frame_rate);

/// Pose angle of one sample relative to `camera`; the sample must carry a velocity.
double estimate_pose_angle(const TrackSample& sample, const CameraModel& camera);

// Fills raw_angle for every sample. Samples whose angle is undefined (standing
// still, or at the camera's ground position) are flagged kAngleUndefined and
// take the nearest defined angle of the track, previous first; their zero
// speed makes the confidence stage reject them.
Track estimate_pose_angles(Track track, const CameraModel& camera);

/// Circular moving average of raw angles over [t - m, t + m], clamped to the
/// track. A window whose unit vectors cancel keeps the raw angle and sets
/// kZeroResultant on the sample.
Track smooth_angles(Track track, int window_half_width);

}  // namespace pamm
