#pragma once

#include <array>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pamm/features.hpp"
#include "pamm/track.hpp"

namespace pamm {

enum class Pose : int { front = 0, right = 1, back = 2, left = 3 };

inline constexpr std::array<Pose, 4> kPoses = {Pose::front, Pose::right, Pose::back, Pose::left};

inline constexpr int index_of(Pose p) noexcept { return static_cast<int>(p); }
char pose_letter(Pose p) noexcept;
std::string_view pose_name(Pose p) noexcept;
Pose pose_from_letter(char c);

/// front [0,45) u [315,360), right [45,135), back [135,225), left [225,315).
/// The angle is wrapped into [0, 360) first.
Pose assign_pose_group(double angle_degrees) noexcept;

struct PoseGroupMember {
  int frame = 0;
  FeatureVector feature;
};

struct PoseGroup {
  Pose label = Pose::front;
  std::vector<PoseGroupMember> members;  // temporal order
};

struct MultiPoseModel {
  ObjectId object_id = 0;
  std::string camera_id;
  std::array<PoseGroup, 4> groups{{{Pose::front, {}}, {Pose::right, {}}, {Pose::back, {}}, {Pose::left, {}}}};

  const PoseGroup& group(Pose p) const { return groups[index_of(p)]; }
  std::size_t size() const noexcept;
  Eigen::Index dimension() const;
};

/// Groups a confidence-filtered track by smooth pose angle. Throws EmptyTrack
/// and MissingFeature (from the source).
MultiPoseModel build_multipose_model(const Track& track, const FeatureSource& features);
MultiPoseModel build_multipose_model(const Track& track, const FeatureTable& features);

nlohmann::json models_to_json(const std::vector<MultiPoseModel>& models);
std::vector<MultiPoseModel> models_from_json(const nlohmann::json& j);

}  // namespace pamm
