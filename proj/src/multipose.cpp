#include "pamm/multipose.hpp"

#include "pamm/error.hpp"
#include "pamm/pose.hpp"

namespace pamm {

char pose_letter(Pose p) noexcept {
  static constexpr char kLetters[] = {'f', 'r', 'b', 'l'};
  return kLetters[index_of(p)];
}

std::string_view pose_name(Pose p) noexcept {
  static constexpr std::string_view kNames[] = {"front", "right", "back", "left"};
  return kNames[index_of(p)];
}

Pose pose_from_letter(char c) {
  switch (c) {
    case 'f': return Pose::front;
    case 'r': return Pose::right;
    case 'b': return Pose::back;
    case 'l': return Pose::left;
    default: throw Error(ErrorCode::ParseError, std::string("unknown pose letter '") + c + "'");
  }
}

Pose assign_pose_group(double angle_degrees) noexcept {
  const double a = normalize_degrees(angle_degrees);
  if (a < 45.0 || a >= 315.0) return Pose::front;
  if (a < 135.0) return Pose::right;
  if (a < 225.0) return Pose::back;
  return Pose::left;
}

std::size_t MultiPoseModel::size() const noexcept {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.members.size();
  return n;
}

Eigen::Index MultiPoseModel::dimension() const {
  for (const auto& g : groups) {
    if (!g.members.empty()) return g.members.front().feature.values.size();
  }
  throw Error(ErrorCode::EmptyTrack, "multi-pose model has no members");
}

MultiPoseModel build_multipose_model(const Track& track, const FeatureSource& features) {
  if (track.empty()) {
    throw Error(ErrorCode::EmptyTrack, "cannot build a model from an empty track (object " +
                                           std::to_string(track.object_id()) + ")");
  }
  MultiPoseModel model;
  model.object_id = track.object_id();
  model.camera_id = track.camera_id();
  Eigen::Index dim = -1;
  for (const auto& s : track.samples()) {
    if (!s.smooth_angle) throw Error(ErrorCode::InvalidArgument, "sample has no smooth angle");
    FeatureVector f = features.features_for(s);
    if (dim >= 0 && f.values.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "feature dimensions differ within object " +
                                                    std::to_string(track.object_id()));
    }
    dim = f.values.size();
    model.groups[index_of(assign_pose_group(*s.smooth_angle))].members.push_back({s.frame, std::move(f)});
  }
  return model;
}

MultiPoseModel build_multipose_model(const Track& track, const FeatureTable& features) {
  // Copying the table would be wasteful; adapt it in place.
  struct TableView final : FeatureSource {
    const FeatureTable& table;
    explicit TableView(const FeatureTable& t) : table(t) {}
    FeatureVector features_for(const TrackSample& sample) const override {
      const auto it = table.find(key_of(sample));
      if (it == table.end()) {
        throw Error(ErrorCode::MissingFeature, "no feature for object " + std::to_string(sample.object_id) +
                                                   " camera " + sample.camera_id + " frame " +
                                                   std::to_string(sample.frame));
      }
      return it->second;
    }
  };
  return build_multipose_model(track, TableView(features));
}

nlohmann::json models_to_json(const std::vector<MultiPoseModel>& models) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& g : m.groups) {
      nlohmann::json members = nlohmann::json::array();
      for (const auto& member : g.members) {
        std::vector<double> values(member.feature.values.data(),
                                   member.feature.values.data() + member.feature.values.size());
        members.push_back({{"frame", member.frame}, {"descriptor_id", member.feature.descriptor_id},
                           {"feature", values}});
      }
      groups[std::string(pose_name(g.label))] = std::move(members);
    }
    out.push_back({{"object_id", m.object_id}, {"camera_id", m.camera_id}, {"groups", std::move(groups)}});
  }
  return {{"models", std::move(out)}};
}

std::vector<MultiPoseModel> models_from_json(const nlohmann::json& j) {
  std::vector<MultiPoseModel> models;
  try {
    for (const auto& item : j.at("models")) {
      MultiPoseModel m;
      m.object_id = item.at("object_id").get<ObjectId>();
      m.camera_id = item.at("camera_id").get<std::string>();
      for (Pose p : kPoses) {
        const auto& members = item.at("groups").at(std::string(pose_name(p)));
        for (const auto& member : members) {
          const auto values = member.at("feature").get<std::vector<double>>();
          FeatureVector f{Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
                          member.value("descriptor_id", std::string("precomputed"))};
          m.groups[index_of(p)].members.push_back({member.at("frame").get<int>(), std::move(f)});
        }
      }
      models.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed models file: ") + e.what());
  }
  return models;
}

}  // namespace pamm
