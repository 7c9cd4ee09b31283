#pragma once

#include <string>
#include <vector>

#include "pamm/track.hpp"

namespace pamm {

// Track CSV: `camera_id,object_id,frame,world_x,world_y,bbox_x,bbox_y,bbox_w,bbox_h`,
// optionally followed by `raw_angle,smooth_angle` and then
// `delta,speed,occlusion,confidence`. Columns are located by header name.
std::vector<TrackSample> read_track_csv(const std::string& path);

enum class TrackColumns { base, angles, confidence };

void write_track_csv(const std::string& path, const std::vector<TrackSample>& samples, TrackColumns columns);

}  // namespace pamm
