#pragma once

#include <span>
#include <vector>

#include "pamm/camera.hpp"
#include "pamm/track.hpp"

namespace pamm {

inline constexpr double kDefaultConfidenceThreshold = 0.8;
inline constexpr double kDefaultSpeedReference = 1.0;  // m/s

/// Circular difference of two angles in degrees, in [0, 180].
double angle_variation(double prev_angle, double cur_angle) noexcept;

/// Largest fraction of `sample`'s box covered by a box of a person standing
/// strictly closer to the camera (ground-plane distance). Samples of the same
/// object are ignored; no occluder gives 0.
double occlusion_rate(const TrackSample& sample, std::span<const TrackSample> same_frame_samples,
                      const CameraModel& camera);

/// exp(-delta in radians) * tanh(speed / speed_ref) * (1 - occlusion).
double sample_confidence(double delta_degrees, double speed, double occlusion, double speed_ref);

// Attaches a ConfidenceReport to every sample of `tracks`, all of which must
// come from `camera` and carry velocity and smooth_angle. Occlusion is
// evaluated against every other sample of the same frame across the tracks.
// The first sample of each track has no predecessor and scores delta = 0.
std::vector<Track> score_tracks(std::vector<Track> tracks, const CameraModel& camera, double speed_ref);

/// Keeps samples with confidence strictly above `threshold`, in order.
/// Throws AllSamplesRejected rather than returning an empty track.
Track filter_samples(const Track& track, double threshold);

}  // namespace pamm
