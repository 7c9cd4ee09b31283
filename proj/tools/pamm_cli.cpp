// Command-line front end: one subcommand per pipeline stage plus `evaluate`,
// which runs the whole loop. Options may also come from a config file whose
// [section] names are subcommands; flags given on the command line win.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pamm/camera.hpp"
#include "pamm/error.hpp"
#include "pamm/evaluation.hpp"
#include "pamm/features.hpp"
#include "pamm/matching.hpp"
#include "pamm/metric.hpp"
#include "pamm/multipose.hpp"
#include "pamm/pipeline.hpp"
#include "pamm/synthetic.hpp"
#include "pamm/track.hpp"
#include "pamm/track_io.hpp"
#include "pamm/weights.hpp"

namespace fs = std::filesystem;
using namespace pamm;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitStage = 3;

// Offset between a synthetic scene's seed and the seed of the auxiliary scene
// used to train matching weights.
constexpr std::uint64_t kAuxiliarySeedOffset = 1000003;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << j.dump(2) << '\n';
}

void print_notes(const std::vector<std::string>& notes, bool verbose) {
  if (notes.empty()) return;
  if (!verbose) {
    std::cerr << "note: " << notes.size() << " pipeline notes (use --verbose to list)\n";
    return;
  }
  for (const auto& n : notes) std::cerr << "note: " << n << '\n';
}

std::vector<MultiPoseModel> load_models(const std::string& path) {
  try {
    return models_from_json(read_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

// Query and gallery cameras default to the first two camera ids in sorted order.
std::pair<std::string, std::string> pick_cameras(const std::vector<MultiPoseModel>& models, std::string query,
                                                 std::string gallery) {
  std::set<std::string> ids;
  for (const auto& m : models) ids.insert(m.camera_id);
  auto it = ids.begin();
  if (query.empty()) {
    if (it == ids.end()) throw Error(ErrorCode::InvalidArgument, "no models to choose a query camera from");
    query = *it;
  }
  if (gallery.empty()) {
    for (const auto& id : ids) {
      if (id != query) {
        gallery = id;
        break;
      }
    }
    if (gallery.empty()) throw Error(ErrorCode::InvalidArgument, "models come from a single camera");
  }
  return {query, gallery};
}

std::vector<std::size_t> all_indices(const MatchingSet& set) {
  std::vector<std::size_t> out(set.identities.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

struct Dataset {
  std::vector<CameraModel> cameras;
  std::vector<Track> tracks;
  std::unique_ptr<FeatureSource> features;
};

Dataset load_dataset(const std::string& dir, const std::string& patches) {
  const fs::path root(dir);
  Dataset d;
  d.cameras = load_cameras((root / "cameras.json").string());
  d.tracks = group_into_tracks(read_track_csv((root / "tracks.csv").string()));
  if (!patches.empty()) {
    d.features = std::make_unique<ImagePatchFeatures>(patches);
  } else {
    d.features = std::make_unique<PrecomputedFeatures>(load_feature_file((root / "features.csv").string()));
  }
  return d;
}

struct PipelineOptions {
  PipelineConfig config;
  void add_to(CLI::App* app, bool poses, bool confidence) {
    app->add_option("--frame-rate", config.frame_rate, "Video frame rate in Hz")->capture_default_str();
    if (poses) {
      app->add_option("--window", config.window_half_width, "Half-width of the polar smoothing window in samples")
          ->capture_default_str();
    }
    if (confidence) {
      app->add_option("--conf-threshold", config.conf_threshold, "Keep samples with confidence above this")
          ->capture_default_str();
      app->add_option("--speed-ref", config.speed_ref, "Speed (m/s) at which the speed term reaches tanh(1)")
          ->capture_default_str();
    }
  }
};

struct SceneOptions {
  SceneConfig config;
  void add_to(CLI::App* app) {
    app->add_option("--identities", config.identity_count, "Number of identities")->capture_default_str();
    app->add_option("--cameras", config.camera_count, "Number of cameras")->capture_default_str();
    app->add_option("--duration", config.duration, "Scene length in frames")->capture_default_str();
    app->add_option("--frame-rate", config.frame_rate, "Frame rate in Hz")->capture_default_str();
    app->add_option("--walk-speed-min", config.walk_speed_min, "Slowest walking speed (m/s)")->capture_default_str();
    app->add_option("--walk-speed-max", config.walk_speed_max, "Fastest walking speed (m/s)")->capture_default_str();
    app->add_option("--appearance-dim", config.appearance_dim, "Feature dimension")->capture_default_str();
    app->add_option("--pose-strength", config.pose_appearance_strength, "Pose dependence of appearance in [0,1]")
        ->capture_default_str();
    app->add_option("--identity-spread", config.identity_spread, "Scale of identity appearance vectors")
        ->capture_default_str();
    app->add_option("--noise-sigma", config.noise_sigma, "Scale of per-sample feature noise")->capture_default_str();
    app->add_option("--occlusion-prob", config.occlusion_probability, "Per-frame chance of a passer-by occluding")
        ->capture_default_str();
    app->add_option("--position-noise", config.position_noise_sigma, "Ground localisation noise (m)")
        ->capture_default_str();
    app->add_option("--min-track-length", config.min_track_length, "Shortest track kept, in frames")
        ->capture_default_str();
    app->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  }
};

struct MetricOptions {
  std::string learner{to_string(Learner::kissme)};
  MetricConfig config;
  void add_to(CLI::App* app) {
    app->add_option("--learner", learner, "euclidean, mahalanobis or kissme")
        ->check(CLI::IsMember({"euclidean", "mahalanobis", "kissme"}))
        ->capture_default_str();
    app->add_option("--pca-dim", config.pca_dim, "Dimensions kept by PCA before metric learning")
        ->capture_default_str();
    app->add_option("--regularization", config.regularization, "Ridge added to covariances, relative to trace")
        ->capture_default_str();
  }
  MetricConfig resolved() const {
    MetricConfig c = config;
    c.learner = learner_from_string(learner);
    return c;
  }
};

// Runs one subcommand, mapping failures to exit codes and a single
// machine-readable error line.
int run_stage(const std::string& stage, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: stage=" << stage << " code=" << to_string(e.code()) << " message=" << e.what() << '\n';
    return e.code() == ErrorCode::ParseError ? kExitParse : kExitStage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: stage=" << stage << " code=ParseError message=" << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: stage=" << stage << " code=Internal message=" << e.what() << '\n';
    return kExitStage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose-aware multi-shot person re-identification"};
  app.set_config("--config", "", "Config file; [section] names are subcommands, command-line flags win");
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("--verbose", verbose, "List every pipeline note");
  std::function<int()> action;

  // synth-gen
  auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic multi-camera scene with ground truth");
  SceneOptions scene;
  std::string synth_out;
  scene.add_to(synth);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->callback([&] {
    action = [&] {
      return run_stage("synth-gen", [&] {
        const Scene s = generate_scene(scene.config);
        write_scene(s, synth_out);
        write_json((fs::path(synth_out) / "scene_config.json").string(), scene_config_to_json(scene.config));
        std::cout << "wrote " << s.tracks.size() << " tracks for " << s.truth.identities.size()
                  << " identities seen by two or more cameras to " << synth_out << '\n';
      });
    };
  });

  // estimate-poses
  auto* poses = app.add_subcommand("estimate-poses", "Velocity, pose angle and polar smoothing per track");
  PipelineOptions pose_opts;
  std::string pose_tracks, pose_cameras, pose_out;
  poses->add_option("--tracks", pose_tracks, "Track CSV")->required();
  poses->add_option("--cameras", pose_cameras, "Calibration JSON")->required();
  poses->add_option("--out", pose_out, "Output track CSV with raw and smoothed angles")->required();
  pose_opts.add_to(poses, true, false);
  poses->callback([&] {
    action = [&] {
      return run_stage("estimate-poses", [&] {
        const auto cameras = load_cameras(pose_cameras);
        const auto tracks = group_into_tracks(read_track_csv(pose_tracks));
        std::vector<std::string> notes;
        const auto posed = estimate_track_poses(tracks, cameras, pose_opts.config, &notes);
        write_track_csv(pose_out, flatten_tracks(posed), TrackColumns::angles);
        print_notes(notes, verbose);
      });
    };
  });

  // filter
  auto* filter = app.add_subcommand("filter", "Score sample confidence and drop unreliable samples");
  PipelineOptions filter_opts;
  std::string filter_tracks_path, filter_cameras, filter_out;
  bool keep_all = false;
  filter->add_option("--tracks", filter_tracks_path, "Track CSV with smoothed angles")->required();
  filter->add_option("--cameras", filter_cameras, "Calibration JSON")->required();
  filter->add_option("--out", filter_out, "Output track CSV with confidence columns")->required();
  filter->add_flag("--keep-all", keep_all, "Write every scored sample instead of only confident ones");
  filter_opts.add_to(filter, false, true);
  filter->callback([&] {
    action = [&] {
      return run_stage("filter", [&] {
        const auto cameras = load_cameras(filter_cameras);
        std::vector<Track> tracks;
        std::vector<std::string> notes;
        for (auto& t : group_into_tracks(read_track_csv(filter_tracks_path))) {
          if (t.size() < 2) {
            notes.push_back("TrackTooShort: object " + std::to_string(t.object_id()) + " in camera " +
                            t.camera_id() + " skipped");
            continue;
          }
          tracks.push_back(compute_velocity(std::move(t), filter_opts.config.frame_rate));
        }
        auto scored = score_track_confidence(tracks, cameras, filter_opts.config);
        if (!keep_all) scored = filter_tracks(scored, filter_opts.config, &notes);
        write_track_csv(filter_out, flatten_tracks(scored), TrackColumns::confidence);
        print_notes(notes, verbose);
      });
    };
  });

  // build-models
  auto* build = app.add_subcommand("build-models", "Group filtered samples into multi-pose appearance models");
  std::string build_tracks, build_features, build_patches, build_out;
  build->add_option("--tracks", build_tracks, "Filtered track CSV")->required();
  auto* feat_opt = build->add_option("--features", build_features, "Precomputed feature file");
  auto* patch_opt = build->add_option("--patches", build_patches,
                                      "Directory of <camera>_<object>_<frame>.png/ppm/pgm patches");
  feat_opt->excludes(patch_opt);
  build->add_option("--out", build_out, "Output models JSON")->required();
  build->callback([&] {
    action = [&] {
      return run_stage("build-models", [&] {
        if (build_features.empty() && build_patches.empty()) {
          throw Error(ErrorCode::InvalidArgument, "give --features or --patches");
        }
        std::unique_ptr<FeatureSource> source;
        if (!build_patches.empty()) {
          source = std::make_unique<ImagePatchFeatures>(build_patches);
        } else {
          source = std::make_unique<PrecomputedFeatures>(load_feature_file(build_features));
        }
        const auto tracks = group_into_tracks(read_track_csv(build_tracks));
        write_json(build_out, models_to_json(build_models(tracks, *source)));
      });
    };
  });

  // train-metric
  auto* tmetric = app.add_subcommand("train-metric", "Learn PCA and a distance metric from cross-camera pairs");
  MetricOptions metric_opts;
  PairSampling metric_sampling;
  std::string tm_models, tm_out, tm_query, tm_gallery;
  std::uint64_t tm_seed = 1;
  tmetric->add_option("--models", tm_models, "Models JSON")->required();
  tmetric->add_option("--out", tm_out, "Output metric JSON")->required();
  tmetric->add_option("--query-camera", tm_query, "Camera of the first pair member (default: first camera id)");
  tmetric->add_option("--gallery-camera", tm_gallery, "Camera of the second pair member (default: second id)");
  tmetric->add_option("--pos", metric_sampling.metric_positive, "Same-identity pairs to sample")
      ->capture_default_str();
  tmetric->add_option("--neg", metric_sampling.metric_negative, "Different-identity pairs to sample")
      ->capture_default_str();
  tmetric->add_option("--seed", tm_seed, "Pair sampling seed")->capture_default_str();
  metric_opts.add_to(tmetric);
  tmetric->callback([&] {
    action = [&] {
      return run_stage("train-metric", [&] {
        const auto models = load_models(tm_models);
        const auto [q, g] = pick_cameras(models, tm_query, tm_gallery);
        const MatchingSet set = make_matching_set(models, q, g);
        std::mt19937_64 rng(tm_seed);
        const auto members = all_indices(set);
        save_metric(tm_out, train_metric_on(set, members, metric_opts.resolved(), metric_sampling, rng));
      });
    };
  });

  // train-weights
  auto* tweights = app.add_subcommand("train-weights", "Train pose-pair matching weights with a linear SVM");
  PairSampling weight_sampling;
  SvmConfig svm;
  std::string tw_pairs, tw_metric, tw_out, tw_query, tw_gallery;
  std::uint64_t tw_seed = 1;
  tweights->add_option("--pairs", tw_pairs, "Labelled pose pairs JSON, or a models JSON to sample pairs from")
      ->required();
  tweights->add_option("--metric", tw_metric, "Metric JSON")->required();
  tweights->add_option("--out", tw_out, "Output weights JSON")->required();
  tweights->add_option("--pos", weight_sampling.weight_positive_vectors, "Positive training vectors")
      ->capture_default_str();
  tweights->add_option("--neg", weight_sampling.weight_negative_vectors, "Negative training vectors")
      ->capture_default_str();
  tweights->add_option("--pair-pos", weight_sampling.weight_positive_pairs,
                       "Same-identity pairs sampled when --pairs is a models file")
      ->capture_default_str();
  tweights->add_option("--pair-neg", weight_sampling.weight_negative_pairs,
                       "Different-identity pairs sampled when --pairs is a models file")
      ->capture_default_str();
  tweights->add_option("--query-camera", tw_query, "First camera when sampling from models");
  tweights->add_option("--gallery-camera", tw_gallery, "Second camera when sampling from models");
  tweights->add_option("--lambda", svm.lambda, "SVM margin tradeoff")->capture_default_str();
  tweights->add_option("--seed", tw_seed, "Sampling seed")->capture_default_str();
  tweights->callback([&] {
    action = [&] {
      return run_stage("train-weights", [&] {
        const LearnedMetric metric = load_metric(tw_metric);
        const nlohmann::json input = read_json(tw_pairs);
        TrainedWeights trained;
        if (input.contains("models")) {
          const auto models = models_from_json(input);
          const auto [q, g] = pick_cameras(models, tw_query, tw_gallery);
          const MatchingSet set = make_matching_set(models, q, g);
          trained = train_weights_on(set, all_indices(set), metric, svm, weight_sampling, tw_seed);
        } else {
          const auto pairs = pose_pairs_from_json(input);
          const auto dist = build_distance_distributions(pairs, metric);
          const auto samples = sample_training_vectors(dist, weight_sampling.weight_positive_vectors,
                                                       weight_sampling.weight_negative_vectors, tw_seed);
          trained = train_weights(samples, svm);
          trained.warnings.insert(trained.warnings.begin(), dist.notes.begin(), dist.notes.end());
        }
        for (const auto& w : trained.warnings) std::cerr << "warning: " << w << '\n';
        save_weights(tw_out, trained.weights);
      });
    };
  });

  // match
  auto* match = app.add_subcommand("match", "Rank gallery models for every query model");
  std::string m_models, m_metric, m_weights, m_out, m_query, m_gallery, m_strategy{to_string(Strategy::pamm)};
  std::uint64_t m_seed = 1;
  match->add_option("--models", m_models, "Models JSON")->required();
  match->add_option("--metric", m_metric, "Metric JSON")->required();
  match->add_option("--weights", m_weights, "Weights JSON (default: uniform)");
  match->add_option("--strategy", m_strategy, "SingleMatch, MultiQ-max, MultiQ-avg, FullMatch-min, FullMatch-avg, PaMM")
      ->capture_default_str();
  match->add_option("--query-camera", m_query, "Query camera (default: first camera id)");
  match->add_option("--gallery-camera", m_gallery, "Gallery camera (default: second camera id)");
  match->add_option("--seed", m_seed, "Seed for SingleMatch's random appearance")->capture_default_str();
  match->add_option("--out", m_out, "Output JSON with costs and rankings")->required();
  match->callback([&] {
    action = [&] {
      return run_stage("match", [&] {
        const Strategy strategy = strategy_from_string(m_strategy);
        const auto models = load_models(m_models);
        const auto [q, g] = pick_cameras(models, m_query, m_gallery);
        const LearnedMetric metric = load_metric(m_metric);
        const MatchWeights weights = m_weights.empty() ? MatchWeights::uniform() : load_weights(m_weights);
        const MetricEmbedding embedding(metric);
        std::vector<const MultiPoseModel*> queries, gallery;
        for (const auto& m : models) {
          if (m.size() == 0) continue;
          if (m.camera_id == q) queries.push_back(&m);
          if (m.camera_id == g) gallery.push_back(&m);
        }
        std::vector<EmbeddedModel> eg;
        for (const auto* m : gallery) eg.push_back(embed_model(*m, embedding));
        std::mt19937_64 rng(m_seed);
        nlohmann::json rows = nlohmann::json::array();
        std::size_t fallbacks = 0;
        for (const auto* qm : queries) {
          const EmbeddedModel eq = embed_model(*qm, embedding);
          std::vector<double> costs;
          for (const auto& gm : eg) {
            const MatchCost c = match_cost(eq, gm, strategy, weights, rng);
            fallbacks += c.uniform_fallback ? 1 : 0;
            costs.push_back(c.cost);
          }
          std::vector<std::size_t> order(costs.size());
          for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
          std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
          nlohmann::json ranking = nlohmann::json::array();
          for (std::size_t i : order) ranking.push_back(gallery[i]->object_id);
          rows.push_back({{"query", qm->object_id}, {"costs", costs}, {"ranking", ranking}});
        }
        nlohmann::json gallery_ids = nlohmann::json::array();
        for (const auto* m : gallery) gallery_ids.push_back(m->object_id);
        write_json(m_out, {{"strategy", std::string(to_string(strategy))},
                           {"query_camera", q},
                           {"gallery_camera", g},
                           {"gallery", gallery_ids},
                           {"uniform_fallbacks", fallbacks},
                           {"queries", rows}});
      });
    };
  });

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Repeated split, train, match and CMC evaluation");
  eval->fallthrough();  // lets `evaluate --config run.toml` reach the top-level config option
  std::string e_data, e_patches, e_out = "results.json", e_cmc, e_query, e_gallery;
  std::string e_weights_source = "auxiliary", e_weights_file, e_aux_data;
  std::vector<std::string> e_strategies;
  for (Strategy s : kAllStrategies) e_strategies.emplace_back(to_string(s));
  PipelineOptions e_pipeline;
  MetricOptions e_metric;
  EvaluationConfig e_config;
  e_config.jobs = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  eval->add_option("--data", e_data, "Dataset directory with tracks.csv, cameras.json and features.csv")->required();
  eval->add_option("--patches", e_patches, "Use image patches from this directory instead of features.csv");
  eval->add_option("--out", e_out, "Results JSON")->capture_default_str();
  eval->add_option("--emit-cmc-csv", e_cmc, "Also write strategy,rank,accuracy,std rows here");
  eval->add_option("--query-camera", e_query, "Query camera (default: first camera id)");
  eval->add_option("--gallery-camera", e_gallery, "Gallery camera (default: second camera id)");
  eval->add_option("--trials", e_config.trials, "Number of random splits")->capture_default_str();
  eval->add_option("--seed", e_config.seed, "Seed of the first trial; trial t uses seed + t")->capture_default_str();
  eval->add_option("--split-fraction", e_config.split_fraction, "Share of identities used for training")
      ->capture_default_str();
  eval->add_option("--strategies", e_strategies, "Strategies to evaluate")->capture_default_str();
  eval->add_option("--single-match-repeats", e_config.single_match_repeats,
                   "Random appearance draws averaged for SingleMatch")
      ->capture_default_str();
  eval->add_option("--jobs", e_config.jobs, "Trials run in parallel (default: available cores)");
  eval->add_option("--metric-pos", e_config.sampling.metric_positive, "Same-identity pairs for metric learning")
      ->capture_default_str();
  eval->add_option("--metric-neg", e_config.sampling.metric_negative, "Different-identity pairs for metric learning")
      ->capture_default_str();
  eval->add_option("--weights-source", e_weights_source,
                   "auxiliary (separate dataset), per-split (train half), uniform, or file")
      ->check(CLI::IsMember({"auxiliary", "per-split", "uniform", "file"}))
      ->capture_default_str();
  eval->add_option("--weights-file", e_weights_file, "Weights JSON when --weights-source=file");
  eval->add_option("--aux-data", e_aux_data,
                   "Auxiliary dataset directory (default for synthetic data: a fresh scene with another seed)");
  eval->add_option("--weight-pos", e_config.sampling.weight_positive_vectors, "Positive weight training vectors")
      ->capture_default_str();
  eval->add_option("--weight-neg", e_config.sampling.weight_negative_vectors, "Negative weight training vectors")
      ->capture_default_str();
  eval->add_option("--weight-pair-pos", e_config.sampling.weight_positive_pairs,
                   "Same-identity pairs behind the weight distance distributions")
      ->capture_default_str();
  eval->add_option("--weight-pair-neg", e_config.sampling.weight_negative_pairs,
                   "Different-identity pairs behind the weight distance distributions")
      ->capture_default_str();
  eval->add_option("--lambda", e_config.svm.lambda, "SVM margin tradeoff")->capture_default_str();
  e_pipeline.add_to(eval, true, true);
  e_metric.add_to(eval);
  eval->callback([&] {
    action = [&] {
      return run_stage("evaluate", [&] {
        e_config.metric = e_metric.resolved();
        e_config.strategies.clear();
        for (const auto& name : e_strategies) e_config.strategies.push_back(strategy_from_string(name));

        const Dataset data = load_dataset(e_data, e_patches);
        std::vector<std::string> notes;
        const auto models = run_pipeline(data.tracks, data.cameras, *data.features, e_pipeline.config, &notes);
        const auto [q, g] = pick_cameras(models, e_query, e_gallery);
        const MatchingSet set = make_matching_set(models, q, g);

        nlohmann::json weights_meta = {{"source", e_weights_source}};
        if (e_weights_source == "per-split") {
          e_config.weight_source = WeightSource::per_split;
        } else {
          e_config.weight_source = WeightSource::fixed;
          if (e_weights_source == "uniform") {
            e_config.weights = MatchWeights::uniform();
          } else if (e_weights_source == "file") {
            if (e_weights_file.empty()) throw Error(ErrorCode::ConfigInvalid, "--weights-source=file needs --weights-file");
            e_config.weights = load_weights(e_weights_file);
          } else {
            std::vector<MultiPoseModel> aux_models;
            std::string aux_source;
            if (!e_aux_data.empty()) {
              const Dataset aux = load_dataset(e_aux_data, "");
              aux_models = run_pipeline(aux.tracks, aux.cameras, *aux.features, e_pipeline.config, nullptr);
              aux_source = e_aux_data;
            } else {
              const fs::path scene_file = fs::path(e_data) / "scene_config.json";
              if (!fs::exists(scene_file)) {
                throw Error(ErrorCode::ConfigInvalid,
                            "auxiliary weights need --aux-data or a synthetic dataset with scene_config.json");
              }
              SceneConfig aux_cfg = scene_config_from_json(read_json(scene_file.string()));
              aux_cfg.cameras = data.cameras;
              aux_cfg.seed += kAuxiliarySeedOffset;
              const Scene aux = generate_scene(aux_cfg);
              const PrecomputedFeatures aux_features(aux.features);
              aux_models = run_pipeline(aux.tracks, aux.cameras, aux_features, e_pipeline.config, nullptr);
              aux_source = "synthetic seed " + std::to_string(aux_cfg.seed);
            }
            const MatchingSet aux_set = make_matching_set(aux_models, q, g);
            const AuxiliaryTraining trained =
                train_on_all(aux_set, e_config.metric, e_config.svm, e_config.sampling, e_config.seed);
            e_config.weights = trained.weights.weights;
            weights_meta["auxiliary"] = aux_source;
            weights_meta["auxiliary_identities"] = aux_set.identities.size();
            weights_meta["warnings"] = trained.weights.warnings;
          }
          weights_meta["weights"] = weights_to_json(e_config.weights);
        }

        const EvaluationResult result = run_evaluation(set, e_config);
        std::vector<std::string> strategy_names;
        for (Strategy s : e_config.strategies) strategy_names.emplace_back(to_string(s));
        const nlohmann::json metadata = {
            {"data", e_data},
            {"query_camera", q},
            {"gallery_camera", g},
            {"identities", set.identities.size()},
            {"models", models.size()},
            {"pipeline_notes", notes.size()},
            {"split_fraction", e_config.split_fraction},
            {"strategies", strategy_names},
            {"single_match_repeats", e_config.single_match_repeats},
            {"pipeline",
             {{"frame_rate", e_pipeline.config.frame_rate},
              {"window", e_pipeline.config.window_half_width},
              {"conf_threshold", e_pipeline.config.conf_threshold},
              {"speed_ref", e_pipeline.config.speed_ref}}},
            {"metric",
             {{"learner", e_metric.learner},
              {"pca_dim", e_config.metric.pca_dim},
              {"regularization", e_config.metric.regularization},
              {"positive_pairs", e_config.sampling.metric_positive},
              {"negative_pairs", e_config.sampling.metric_negative}}},
            {"weights", weights_meta},
            {"svm_lambda", e_config.svm.lambda}};
        write_results_json(e_out, result, metadata);
        if (!e_cmc.empty()) write_cmc_csv(e_cmc, result);
        print_notes(notes, verbose);
        for (const auto& note : result.notes) {
          if (verbose) std::cerr << "note: " << note << '\n';
        }
        std::printf("%zu identities, gallery size %zu, %d trials\n", set.identities.size(), result.gallery_size,
                    e_config.trials);
        for (const auto& sr : result.strategies) {
          std::printf("%-14s rank-1 %6.2f%%  AUC %6.2f%%\n", std::string(to_string(sr.strategy)).c_str(),
                      100.0 * sr.mean_accuracy.front(), 100.0 * sr.auc);
        }
      });
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return 0;
    // A missing config file is an input problem rather than a usage one.
    if (dynamic_cast<const CLI::FileError*>(&e) != nullptr) return kExitParse;
    return code == 0 ? 0 : kExitUsage;
  }
  return action ? action() : kExitUsage;
}
