#include "pamm/track.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "pamm/error.hpp"

namespace pamm {

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double h = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

Track::Track(ObjectId object_id, std::string camera_id, std::vector<TrackSample> samples)
    : object_id_(object_id), camera_id_(std::move(camera_id)), samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.object_id != object_id_ || s.camera_id != camera_id_) {
      throw Error(ErrorCode::InvalidArgument, "track sample does not belong to object " +
                                                  std::to_string(object_id_) + " in camera " + camera_id_);
    }
    if (i > 0 && s.frame <= samples_[i - 1].frame) {
      throw Error(ErrorCode::InvalidArgument, "track frames must be strictly increasing (object " +
                                                  std::to_string(object_id_) + ")");
    }
  }
}

int Track::t_start() const {
  if (samples_.empty()) throw Error(ErrorCode::EmptyTrack, "empty track has no start frame");
  return samples_.front().frame;
}

int Track::t_end() const {
  if (samples_.empty()) throw Error(ErrorCode::EmptyTrack, "empty track has no end frame");
  return samples_.back().frame;
}

std::vector<Track> group_into_tracks(std::vector<TrackSample> samples) {
  std::map<std::pair<std::string, ObjectId>, std::vector<TrackSample>> grouped;
  for (auto& s : samples) {
    grouped[{s.camera_id, s.object_id}].push_back(std::move(s));
  }
  std::vector<Track> tracks;
  tracks.reserve(grouped.size());
  for (auto& [key, members] : grouped) {
    std::stable_sort(members.begin(), members.end(),
                     [](const TrackSample& a, const TrackSample& b) { return a.frame < b.frame; });
    tracks.emplace_back(key.second, key.first, std::move(members));
  }
  return tracks;
}

std::vector<TrackSample> flatten_tracks(const std::vector<Track>& tracks) {
  std::vector<TrackSample> out;
  for (const auto& t : tracks) out.insert(out.end(), t.samples().begin(), t.samples().end());
  return out;
}

}  // namespace pamm
