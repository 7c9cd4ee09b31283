#include "pamm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "pamm/error.hpp"
#include "pamm/multipose.hpp"
#include "pamm/pose.hpp"
#include "pamm/track_io.hpp"

namespace pamm {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kZoneRadius = 6.0;
constexpr double kCornerRadius = 1.0;
constexpr int kInteriorWaypoints = 3;
constexpr double kWaypointRadius = 4.0;
constexpr double kBoxAspect = 0.4;

Eigen::Vector2d unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

struct Agent {
  ObjectId id = 0;
  bool distractor = false;
  std::size_t appearance = 0;
  std::vector<PathObservation> obs;
  std::vector<Eigen::Vector2d> emitted;  // localised (noisy) positions
};

// Longest run of consecutive frames.
std::vector<PathObservation> longest_run(std::vector<PathObservation> obs) {
  std::size_t best_start = 0;
  std::size_t best_len = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= obs.size(); ++i) {
    if (i == obs.size() || (i > start && obs[i].frame != obs[i - 1].frame + 1)) {
      if (i - start > best_len) {
        best_len = i - start;
        best_start = start;
      }
      start = i;
    }
  }
  return {obs.begin() + static_cast<std::ptrdiff_t>(best_start),
          obs.begin() + static_cast<std::ptrdiff_t>(best_start + best_len)};
}

}  // namespace

GroundPath GroundPath::line(const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
  GroundPath path;
  Piece piece;
  piece.from = from;
  piece.to = to;
  piece.length = (to - from).norm();
  path.append(piece);
  return path;
}

GroundPath GroundPath::arc(const Eigen::Vector2d& center, double radius, double start_angle, double sweep) {
  GroundPath path;
  Piece piece;
  piece.is_arc = true;
  piece.center = center;
  piece.radius = radius;
  piece.start_angle = start_angle;
  piece.sweep = sweep;
  piece.length = radius * std::abs(sweep);
  path.append(piece);
  return path;
}

GroundPath GroundPath::waypoints(const std::vector<Eigen::Vector2d>& points, double corner_radius) {
  if (points.size() < 2) throw Error(ErrorCode::InvalidArgument, "a path needs at least two waypoints");
  GroundPath path;
  Eigen::Vector2d cursor = points.front();
  for (std::size_t i = 1; i + 1 < points.size(); ++i) {
    const Eigen::Vector2d in = points[i] - points[i - 1];
    const Eigen::Vector2d out = points[i + 1] - points[i];
    const Eigen::Vector2d d1 = in.normalized();
    const Eigen::Vector2d d2 = out.normalized();
    const double cross = d1.x() * d2.y() - d1.y() * d2.x();
    const double turn = std::atan2(cross, d1.dot(d2));
    if (std::abs(turn) < 1e-9) continue;
    // Fillet tangent length, limited so neighbouring fillets never overlap.
    double tangent_len = corner_radius * std::tan(std::abs(turn) / 2.0);
    const double limit = 0.5 * std::min(in.norm(), out.norm());
    double radius = corner_radius;
    if (tangent_len > limit) {
      tangent_len = limit;
      radius = tangent_len / std::tan(std::abs(turn) / 2.0);
    }
    const Eigen::Vector2d start = points[i] - tangent_len * d1;
    const Eigen::Vector2d end = points[i] + tangent_len * d2;
    Piece straight;
    straight.from = cursor;
    straight.to = start;
    straight.length = (start - cursor).norm();
    if (straight.length > 0.0) path.append(straight);

    const double side = turn > 0.0 ? 1.0 : -1.0;
    const Eigen::Vector2d normal(-d1.y() * side, d1.x() * side);
    Piece fillet;
    fillet.is_arc = true;
    fillet.center = start + radius * normal;
    fillet.radius = radius;
    const Eigen::Vector2d r0 = start - fillet.center;
    fillet.start_angle = std::atan2(r0.y(), r0.x());
    fillet.sweep = turn;
    fillet.length = radius * std::abs(turn);
    path.append(fillet);
    cursor = end;
  }
  Piece last;
  last.from = cursor;
  last.to = points.back();
  last.length = (points.back() - cursor).norm();
  if (last.length > 0.0 || path.pieces_.empty()) path.append(last);
  return path;
}

void GroundPath::append(const Piece& piece) {
  pieces_.push_back(piece);
  length_ += piece.length;
}

const GroundPath::Piece& GroundPath::locate(double& s) const {
  if (pieces_.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  s = std::clamp(s, 0.0, length_);
  for (const auto& piece : pieces_) {
    if (s <= piece.length) return piece;
    s -= piece.length;
  }
  s = pieces_.back().length;
  return pieces_.back();
}

Eigen::Vector2d GroundPath::position(double s) const {
  const Piece& p = locate(s);
  if (!p.is_arc) {
    if (p.length == 0.0) return p.from;
    return p.from + (p.to - p.from) * (s / p.length);
  }
  const double direction = p.sweep >= 0.0 ? 1.0 : -1.0;
  return p.center + p.radius * unit(p.start_angle + direction * s / p.radius);
}

Eigen::Vector2d GroundPath::tangent(double s) const {
  const Piece& p = locate(s);
  if (!p.is_arc) return (p.to - p.from).normalized();
  const double direction = p.sweep >= 0.0 ? 1.0 : -1.0;
  const double angle = p.start_angle + direction * s / p.radius;
  return direction * Eigen::Vector2d(-std::sin(angle), std::cos(angle));
}

BoundingBox person_bbox(const CameraModel& camera, const Eigen::Vector2d& foot, double height_m) {
  const PixelPoint f = project(camera, {foot.x(), foot.y(), 0.0});
  const PixelPoint h = project(camera, {foot.x(), foot.y(), height_m});
  const double top = std::min(f.v, h.v);
  const double bottom = std::max(f.v, h.v);
  const double height = bottom - top;
  const double half_width = 0.5 * kBoxAspect * height;
  const double left = std::min(f.u, h.u) - half_width;
  const double right = std::max(f.u, h.u) + half_width;
  return {left, top, right - left, height};
}

std::vector<PathObservation> observe_path(const GroundPath& path, const CameraModel& camera, const ImageSize& image,
                                          double speed, double frame_rate, int start_frame, double height_m) {
  std::vector<PathObservation> out;
  const Eigen::Vector2d cam = camera.position().head<2>();
  for (int k = 0;; ++k) {
    const double s = speed * k / frame_rate;
    if (s > path.length()) break;
    PathObservation o;
    o.frame = start_frame + k;
    o.position = path.position(s);
    o.tangent = path.tangent(s);
    if ((cam - o.position).norm() == 0.0) continue;
    if (camera.depth({o.position.x(), o.position.y(), 0.0}) <= 0.0 ||
        camera.depth({o.position.x(), o.position.y(), height_m}) <= 0.0) {
      continue;
    }
    o.bbox = person_bbox(camera, o.position, height_m);
    if (o.bbox.x < 0.0 || o.bbox.y < 0.0 || o.bbox.x + o.bbox.w > image.width || o.bbox.y + o.bbox.h > image.height) {
      continue;
    }
    o.true_angle = pose_angle(cam - o.position, o.tangent);
    out.push_back(o);
  }
  return out;
}

void SceneConfig::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); };
  if (identity_count <= 0) fail("identity_count must be positive");
  if (cameras.empty() && camera_count < 2) fail("camera_count must be at least 2");
  if (!cameras.empty() && cameras.size() < 2) fail("at least two cameras are required");
  if (!(frame_rate > 0.0)) fail("frame_rate must be positive");
  if (duration <= 0) fail("duration must be positive");
  if (!(walk_speed_min > 0.0) || walk_speed_max < walk_speed_min) fail("walk speed range is invalid");
  if (appearance_dim < 4) fail("appearance_dim must be at least 4");
  if (!(pose_appearance_strength >= 0.0 && pose_appearance_strength <= 1.0)) {
    fail("pose_appearance_strength must lie in [0, 1]");
  }
  if (!(occlusion_probability >= 0.0 && occlusion_probability <= 1.0)) fail("occlusion_probability must lie in [0, 1]");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (!(identity_spread > 0.0)) fail("identity_spread must be positive");
  if (!(position_noise_sigma >= 0.0)) fail("position_noise_sigma must be >= 0");
  if (min_track_length < 2) fail("min_track_length must be at least 2");
  if (image.width <= 0 || image.height <= 0) fail("image size must be positive");
}

std::vector<CameraModel> default_cameras(int count, const ImageSize& image) {
  Eigen::Matrix3d k;
  k << 500.0, 0.0, image.width / 2.0, 0.0, 500.0, image.height / 2.0, 0.0, 0.0, 1.0;
  std::vector<CameraModel> cameras;
  for (int c = 0; c < count; ++c) {
    const Eigen::Vector2d zone(100.0 * c, 0.0);
    // Each camera watches its zone from a different compass direction.
    const double heading = -kPi / 2.0 + c * (137.5 * kPi / 180.0);
    const Eigen::Vector2d ground = zone + 12.0 * unit(heading);
    cameras.push_back(CameraModel::look_at("cam" + std::to_string(c), k, {ground.x(), ground.y(), 6.0},
                                           {zone.x(), zone.y(), 0.0}));
  }
  return cameras;
}

Scene generate_scene(const SceneConfig& config) {
  config.validate();
  Scene scene;
  scene.cameras = config.cameras.empty() ? default_cameras(config.camera_count, config.image) : config.cameras;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const int d = config.appearance_dim;
  const double coord_scale = 1.0 / std::sqrt(static_cast<double>(d));

  // Appearance: an identity vector plus, per pose bin, one of four orthonormal
  // directions owned by that identity.
  struct Appearance {
    Eigen::VectorXd identity;
    Eigen::MatrixXd pose_directions;  // d x 4, empty for passers-by
    double height = 1.7;
  };
  std::vector<Appearance> appearances;
  const auto random_vector = [&](double scale) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = gauss(rng) * scale;
    return v;
  };
  for (int k = 0; k < config.identity_count; ++k) {
    Appearance a;
    a.identity = random_vector(config.identity_spread * coord_scale);
    Eigen::MatrixXd g(d, 4);
    for (int c = 0; c < 4; ++c) g.col(c) = random_vector(1.0);
    a.pose_directions = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(d, 4);
    a.height = 1.55 + 0.35 * uniform(rng);
    appearances.push_back(std::move(a));
  }

  ObjectId next_distractor = kFirstDistractorId;
  std::map<ObjectId, int> cameras_seen;

  for (const auto& camera : scene.cameras) {
    const PixelPoint principal{camera.intrinsics()(0, 2), camera.intrinsics()(1, 2)};
    const WorldPoint zone_world = back_project_to_ground(camera, principal);
    const Eigen::Vector2d zone(zone_world.x, zone_world.y);
    std::vector<Agent> agents;

    for (int k = 0; k < config.identity_count; ++k) {
      const double entry = 2.0 * kPi * uniform(rng);
      const double exit = entry + kPi + (uniform(rng) - 0.5) * (2.0 * kPi / 3.0);
      // Interior waypoints make people turn, so one visit shows several poses.
      std::vector<Eigen::Vector2d> points{zone + kZoneRadius * unit(entry)};
      for (int w = 0; w < kInteriorWaypoints; ++w) {
        const double r = kWaypointRadius * std::sqrt(uniform(rng));
        points.push_back(zone + r * unit(2.0 * kPi * uniform(rng)));
      }
      points.push_back(zone + kZoneRadius * unit(exit));
      const double speed = config.walk_speed_min + (config.walk_speed_max - config.walk_speed_min) * uniform(rng);
      const int start = static_cast<int>(uniform(rng) * config.duration);
      const GroundPath path = GroundPath::waypoints(points, kCornerRadius);
      auto obs = longest_run(observe_path(path, camera, config.image, speed, config.frame_rate, start,
                                          appearances[static_cast<std::size_t>(k)].height));
      if (static_cast<int>(obs.size()) < config.min_track_length) continue;
      Agent agent;
      agent.id = k;
      agent.appearance = static_cast<std::size_t>(k);
      agent.obs = std::move(obs);
      agents.push_back(std::move(agent));
    }

    // Passers-by crossing the line of sight between the camera and a walker.
    const Eigen::Vector2d cam = camera.position().head<2>();
    const std::size_t walkers = agents.size();
    for (std::size_t a = 0; a < walkers; ++a) {
      int busy_until = -1;
      for (std::size_t i = 0; i < agents[a].obs.size(); ++i) {
        const auto& o = agents[a].obs[i];
        if (o.frame <= busy_until || !(uniform(rng) < config.occlusion_probability)) continue;
        const Eigen::Vector2d sight = cam - o.position;
        const Eigen::Vector2d across(-sight.y() / sight.norm(), sight.x() / sight.norm());
        const Eigen::Vector2d middle = o.position + (0.3 + 0.3 * uniform(rng)) * sight;
        const double speed = config.walk_speed_min + (config.walk_speed_max - config.walk_speed_min) * uniform(rng);
        const double half = 1.2;
        const int half_frames = static_cast<int>(std::lround(half / speed * config.frame_rate));
        Appearance passer;
        passer.identity = random_vector(config.identity_spread * coord_scale);
        passer.height = 1.55 + 0.35 * uniform(rng);
        const GroundPath crossing = GroundPath::line(middle - half * across, middle + half * across);
        auto seen = longest_run(observe_path(crossing, camera, config.image, speed, config.frame_rate,
                                             o.frame - half_frames, passer.height));
        busy_until = o.frame + half_frames;
        if (seen.size() < 2) continue;
        appearances.push_back(std::move(passer));
        Agent agent;
        agent.id = next_distractor++;
        agent.distractor = true;
        agent.appearance = appearances.size() - 1;
        agent.obs = std::move(seen);
        scene.truth.distractors.push_back(agent.id);
        agents.push_back(std::move(agent));
      }
    }

    // Localisation noise; boxes follow the localised position.
    for (auto& agent : agents) {
      const double h = appearances[agent.appearance].height;
      for (auto& o : agent.obs) {
        Eigen::Vector2d p = o.position;
        if (config.position_noise_sigma > 0.0) {
          p += config.position_noise_sigma * Eigen::Vector2d(gauss(rng), gauss(rng));
        }
        agent.emitted.push_back(p);
        o.bbox = person_bbox(camera, p, h);
      }
    }

    // Clean appearance of an agent at one of its observations.
    const auto clean = [&](const Agent& agent, const PathObservation& o) -> Eigen::VectorXd {
      const auto& app = appearances[agent.appearance];
      if (agent.distractor || config.pose_appearance_strength == 0.0) return app.identity;
      return app.identity +
             config.pose_appearance_strength * app.pose_directions.col(index_of(assign_pose_group(o.true_angle)));
    };

    struct Slot {
      std::size_t agent;
      std::size_t obs;
    };
    std::map<int, std::vector<Slot>> by_frame;
    for (std::size_t a = 0; a < agents.size(); ++a) {
      for (std::size_t i = 0; i < agents[a].obs.size(); ++i) by_frame[agents[a].obs[i].frame].push_back({a, i});
    }

    for (std::size_t a = 0; a < agents.size(); ++a) {
      const Agent& agent = agents[a];
      std::vector<TrackSample> samples;
      for (std::size_t i = 0; i < agent.obs.size(); ++i) {
        const auto& o = agent.obs[i];
        // Ground-truth occlusion from true depths.
        double occ = 0.0;
        const Slot* occluder = nullptr;
        const double own_distance = (o.position - cam).norm();
        for (const Slot& other : by_frame[o.frame]) {
          if (other.agent == a) continue;
          const auto& oo = agents[other.agent].obs[other.obs];
          if (!((oo.position - cam).norm() < own_distance)) continue;
          const double ratio = intersection_area(o.bbox, oo.bbox) / o.bbox.area();
          if (ratio > occ) {
            occ = ratio;
            occluder = &other;
          }
        }
        occ = std::min(occ, 1.0);
        Eigen::VectorXd feature = clean(agent, o);
        if (occluder != nullptr) {
          feature = (1.0 - occ) * feature + occ * clean(agents[occluder->agent], agents[occluder->agent].obs[occluder->obs]);
        }
        if (config.noise_sigma > 0.0) feature += random_vector(config.noise_sigma * coord_scale);

        TrackSample s;
        s.object_id = agent.id;
        s.camera_id = camera.id();
        s.frame = o.frame;
        s.world_pos = agent.emitted[i];
        s.bbox = o.bbox;
        samples.push_back(s);
        scene.features.emplace(key_of(s), FeatureVector{std::move(feature), kSyntheticDescriptorId});
        scene.truth.samples.push_back({agent.id, camera.id(), o.frame, o.true_angle, occ, occ > 0.0});
      }
      if (!agent.distractor) ++cameras_seen[agent.id];
      scene.tracks.emplace_back(agent.id, camera.id(), std::move(samples));
    }
  }

  for (const auto& [id, count] : cameras_seen) {
    if (count >= 2) scene.truth.identities.push_back(id);
  }
  return scene;
}

void write_scene(const Scene& scene, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  write_track_csv((dir / "tracks.csv").string(), flatten_tracks(scene.tracks), TrackColumns::base);
  save_feature_file((dir / "features.csv").string(), scene.features);
  save_cameras((dir / "cameras.json").string(), scene.cameras);

  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : scene.truth.samples) {
    samples.push_back({{"object_id", s.object_id},
                       {"camera_id", s.camera_id},
                       {"frame", s.frame},
                       {"true_angle", s.true_angle},
                       {"occlusion", s.occlusion},
                       {"occluded", s.occluded}});
  }
  const nlohmann::json truth = {{"identities", scene.truth.identities},
                                {"distractors", scene.truth.distractors},
                                {"samples", std::move(samples)}};
  std::ofstream out(dir / "ground_truth.json");
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write ground truth in " + directory);
  out << truth.dump() << '\n';
}

nlohmann::json scene_config_to_json(const SceneConfig& c) {
  return {{"identity_count", c.identity_count},
          {"camera_count", c.camera_count},
          {"image_width", c.image.width},
          {"image_height", c.image.height},
          {"frame_rate", c.frame_rate},
          {"duration", c.duration},
          {"walk_speed_min", c.walk_speed_min},
          {"walk_speed_max", c.walk_speed_max},
          {"appearance_dim", c.appearance_dim},
          {"pose_appearance_strength", c.pose_appearance_strength},
          {"identity_spread", c.identity_spread},
          {"noise_sigma", c.noise_sigma},
          {"occlusion_probability", c.occlusion_probability},
          {"position_noise_sigma", c.position_noise_sigma},
          {"min_track_length", c.min_track_length},
          {"seed", c.seed}};
}

SceneConfig scene_config_from_json(const nlohmann::json& j) {
  try {
    SceneConfig c;
    c.identity_count = j.value("identity_count", c.identity_count);
    c.camera_count = j.value("camera_count", c.camera_count);
    c.image.width = j.value("image_width", c.image.width);
    c.image.height = j.value("image_height", c.image.height);
    c.frame_rate = j.value("frame_rate", c.frame_rate);
    c.duration = j.value("duration", c.duration);
    c.walk_speed_min = j.value("walk_speed_min", c.walk_speed_min);
    c.walk_speed_max = j.value("walk_speed_max", c.walk_speed_max);
    c.appearance_dim = j.value("appearance_dim", c.appearance_dim);
    c.pose_appearance_strength = j.value("pose_appearance_strength", c.pose_appearance_strength);
    c.identity_spread = j.value("identity_spread", c.identity_spread);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.occlusion_probability = j.value("occlusion_probability", c.occlusion_probability);
    c.position_noise_sigma = j.value("position_noise_sigma", c.position_noise_sigma);
    c.min_track_length = j.value("min_track_length", c.min_track_length);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scene config: ") + e.what());
  }
}

}  // namespace pamm
