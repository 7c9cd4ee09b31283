#include "pamm/pipeline.hpp"

#include <map>

#include "pamm/error.hpp"

namespace pamm {

std::vector<Track> estimate_track_poses(const std::vector<Track>& tracks, const std::vector<CameraModel>& cameras,
                                        const PipelineConfig& config, std::vector<std::string>* notes) {
  std::vector<Track> out;
  out.reserve(tracks.size());
  for (const auto& track : tracks) {
    if (track.size() < 2) {
      if (notes) {
        notes->push_back("TrackTooShort: object " + std::to_string(track.object_id()) + " in camera " +
                         track.camera_id() + " skipped");
      }
      continue;
    }
    const CameraModel& camera = find_camera(cameras, track.camera_id());
    out.push_back(smooth_angles(estimate_pose_angles(compute_velocity(track, config.frame_rate), camera),
                                config.window_half_width));
  }
  return out;
}

std::vector<Track> score_track_confidence(const std::vector<Track>& tracks, const std::vector<CameraModel>& cameras,
                                          const PipelineConfig& config) {
  std::map<std::string, std::vector<std::size_t>> by_camera;
  for (std::size_t i = 0; i < tracks.size(); ++i) by_camera[tracks[i].camera_id()].push_back(i);
  std::vector<Track> out(tracks.size());
  for (const auto& [camera_id, indices] : by_camera) {
    std::vector<Track> group;
    for (std::size_t i : indices) group.push_back(tracks[i]);
    group = score_tracks(std::move(group), find_camera(cameras, camera_id), config.speed_ref);
    for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] = std::move(group[k]);
  }
  return out;
}

std::vector<Track> filter_tracks(const std::vector<Track>& tracks, const PipelineConfig& config,
                                 std::vector<std::string>* notes) {
  std::vector<Track> out;
  for (const auto& track : tracks) {
    try {
      out.push_back(filter_samples(track, config.conf_threshold));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllSamplesRejected) throw;
      if (notes) notes->push_back(std::string("AllSamplesRejected: ") + e.what());
    }
  }
  return out;
}

std::vector<MultiPoseModel> build_models(const std::vector<Track>& filtered, const FeatureSource& features) {
  std::vector<MultiPoseModel> models;
  models.reserve(filtered.size());
  for (const auto& track : filtered) models.push_back(build_multipose_model(track, features));
  return models;
}

std::vector<MultiPoseModel> run_pipeline(const std::vector<Track>& raw_tracks, const std::vector<CameraModel>& cameras,
                                         const FeatureSource& features, const PipelineConfig& config,
                                         std::vector<std::string>* notes) {
  const auto posed = estimate_track_poses(raw_tracks, cameras, config, notes);
  const auto scored = score_track_confidence(posed, cameras, config);
  return build_models(filter_tracks(scored, config, notes), features);
}

}  // namespace pamm
