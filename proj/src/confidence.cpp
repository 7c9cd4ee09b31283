#include "pamm/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "pamm/error.hpp"

namespace pamm {

double angle_variation(double prev_angle, double cur_angle) noexcept {
  const double d = std::abs(prev_angle - cur_angle);
  return std::min(d, std::abs(d - 360.0));
}

double occlusion_rate(const TrackSample& sample, std::span<const TrackSample> same_frame_samples,
                      const CameraModel& camera) {
  const Eigen::Vector2d cam = camera.position().head<2>();
  const double own_distance = (sample.world_pos - cam).norm();
  const double own_area = sample.bbox.area();
  if (own_area <= 0.0) return 0.0;
  double occ = 0.0;
  for (const auto& other : same_frame_samples) {
    if (other.object_id == sample.object_id) continue;
    if (!((other.world_pos - cam).norm() < own_distance)) continue;
    const double overlap = intersection_area(sample.bbox, other.bbox);
    if (overlap > 0.0) occ = std::max(occ, overlap / own_area);
  }
  return std::min(occ, 1.0);
}

double sample_confidence(double delta_degrees, double speed, double occlusion, double speed_ref) {
  if (!(speed_ref > 0.0)) throw Error(ErrorCode::InvalidArgument, "speed_ref must be positive");
  const double delta_rad = delta_degrees * std::numbers::pi / 180.0;
  return std::exp(-delta_rad) * std::tanh(speed / speed_ref) * (1.0 - occlusion);
}

std::vector<Track> score_tracks(std::vector<Track> tracks, const CameraModel& camera, double speed_ref) {
  std::map<int, std::vector<TrackSample>> by_frame;
  for (const auto& track : tracks) {
    if (track.camera_id() != camera.id()) {
      throw Error(ErrorCode::InvalidArgument, "track camera '" + track.camera_id() + "' does not match '" +
                                                  camera.id() + "'");
    }
    for (const auto& s : track.samples()) by_frame[s.frame].push_back(s);
  }
  for (auto& track : tracks) {
    auto& samples = track.samples();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto& s = samples[i];
      if (!s.velocity || !s.smooth_angle) {
        throw Error(ErrorCode::InvalidArgument, "sample needs velocity and smooth angle before scoring");
      }
      ConfidenceReport report;
      report.delta = i == 0 ? 0.0 : angle_variation(*samples[i - 1].smooth_angle, *s.smooth_angle);
      report.speed = s.velocity->norm();
      report.occlusion = occlusion_rate(s, by_frame[s.frame], camera);
      report.confidence = sample_confidence(report.delta, report.speed, report.occlusion, speed_ref);
      s.confidence = report;
    }
  }
  return tracks;
}

Track filter_samples(const Track& track, double threshold) {
  std::vector<TrackSample> kept;
  for (const auto& s : track.samples()) {
    if (!s.confidence) throw Error(ErrorCode::InvalidArgument, "sample has no confidence score");
    if (s.confidence->confidence > threshold) kept.push_back(s);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::AllSamplesRejected, "every sample of object " + std::to_string(track.object_id()) +
                                                   " in camera " + track.camera_id() + " was rejected");
  }
  return Track(track.object_id(), track.camera_id(), std::move(kept));
}

}  // namespace pamm
