#pragma once

#include <string>
#include <vector>

#include "pamm/camera.hpp"
#include "pamm/confidence.hpp"
#include "pamm/features.hpp"
#include "pamm/multipose.hpp"
#include "pamm/pose.hpp"
#include "pamm/track.hpp"

namespace pamm {

struct PipelineConfig {
  double frame_rate = kDefaultFrameRate;
  int window_half_width = kDefaultSmoothingHalfWidth;
  double conf_threshold = kDefaultConfidenceThreshold;
  double speed_ref = kDefaultSpeedReference;
};

// Velocity, raw and smoothed angles for every track. Tracks shorter than two
// samples are dropped with a note.
std::vector<Track> estimate_track_poses(const std::vector<Track>& tracks, const std::vector<CameraModel>& cameras,
                                        const PipelineConfig& config, std::vector<std::string>* notes = nullptr);

// Confidence reports, one camera at a time so occlusion sees every person in the frame.
std::vector<Track> score_track_confidence(const std::vector<Track>& tracks, const std::vector<CameraModel>& cameras,
                                          const PipelineConfig& config);

// Keeps confident samples; a track with nothing left is dropped with a note.
std::vector<Track> filter_tracks(const std::vector<Track>& tracks, const PipelineConfig& config,
                                 std::vector<std::string>* notes = nullptr);

std::vector<MultiPoseModel> build_models(const std::vector<Track>& filtered, const FeatureSource& features);

// All of the above in sequence, from raw tracks to multi-pose models.
std::vector<MultiPoseModel> run_pipeline(const std::vector<Track>& raw_tracks, const std::vector<CameraModel>& cameras,
                                         const FeatureSource& features, const PipelineConfig& config,
                                         std::vector<std::string>* notes = nullptr);

}  // namespace pamm
