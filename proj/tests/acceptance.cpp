// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "pamm/confidence.hpp"
#include "pamm/evaluation.hpp"
#include "pamm/matching.hpp"
#include "pamm/multipose.hpp"
#include "pamm/pipeline.hpp"
#include "pamm/pose.hpp"
#include "pamm/synthetic.hpp"
#include "pamm/weights.hpp"

using namespace pamm;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double circular_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// ---------------------------------------------------------------------------

Track observed_track(const std::vector<PathObservation>& obs, const std::string& camera) {
  std::vector<TrackSample> samples;
  for (const auto& o : obs) {
    TrackSample s;
    s.object_id = 1;
    s.camera_id = camera;
    s.frame = o.frame;
    s.world_pos = o.position;
    s.bbox = o.bbox;
    samples.push_back(s);
  }
  return Track(1, camera, std::move(samples));
}

Outcome pose_oracle() {
  const auto cameras = default_cameras(2);
  double worst_raw = 0.0;
  double worst_smooth = 0.0;
  std::size_t frames = 0;
  int paths = 0;
  for (const auto& cam : cameras) {
    const Eigen::Vector2d c = cam.position().head<2>();
    const Eigen::Vector2d toward = (-c + Eigen::Vector2d(100.0 * (&cam - cameras.data()), 0.0)).normalized();
    const Eigen::Vector2d side(-toward.y(), toward.x());
    std::vector<GroundPath> set;
    for (double depth : {6.0, 10.0, 14.0}) {
      const Eigen::Vector2d mid = c + depth * toward;
      set.push_back(GroundPath::line(mid - 7.0 * side, mid + 7.0 * side));
      set.push_back(GroundPath::line(mid + 7.0 * side, mid - 7.0 * side));
      set.push_back(GroundPath::line(mid - 5.0 * toward - 4.0 * side, mid + 5.0 * toward + 4.0 * side));
    }
    const Eigen::Vector2d centre = c + 12.0 * toward;
    for (double radius : {2.0, 4.0}) {
      set.push_back(GroundPath::arc(centre, radius, 0.0, 2.0 * std::numbers::pi));
      set.push_back(GroundPath::arc(centre, radius, 1.0, -2.0 * std::numbers::pi));
    }
    for (const auto& path : set) {
      for (double speed : {0.8, 1.4}) {
        const auto obs = observe_path(path, cam, ImageSize{}, speed, kDefaultFrameRate, 0, 1.7);
        if (obs.size() < 2) continue;
        ++paths;
        Track t = compute_velocity(observed_track(obs, cam.id()), kDefaultFrameRate);
        t = smooth_angles(estimate_pose_angles(std::move(t), cam), kDefaultSmoothingHalfWidth);
        for (std::size_t i = 0; i < obs.size(); ++i) {
          const auto& s = t.samples()[i];
          if (!(s.velocity->norm() > 0.2)) continue;
          // Analytic angle from the path tangent, independent of the generator's own label.
          const Eigen::Vector2d to_cam = c - obs[i].position;
          const double analytic = std::atan2(to_cam.x() * obs[i].tangent.y() - to_cam.y() * obs[i].tangent.x(),
                                             to_cam.dot(obs[i].tangent)) * kDeg;
          worst_raw = std::max(worst_raw, circular_distance(*s.raw_angle, analytic));
          // Near the ends the window is one-sided and lags a turning angle.
          const int m = kDefaultSmoothingHalfWidth;
          if (i >= static_cast<std::size_t>(m) && i + m < obs.size()) {
            worst_smooth = std::max(worst_smooth, circular_distance(*s.smooth_angle, analytic));
          }
          ++frames;
        }
      }
    }
  }
  return {paths > 0 && worst_raw < 2.0 && worst_smooth < 2.0,
          fmt("%.0f paths, %.0f frames; max error estimated %.3f deg, smoothed (full window) %.3f deg", paths, static_cast<double>(frames),
              worst_raw, worst_smooth)};
}

// ---------------------------------------------------------------------------

Outcome wraparound_smoothing() {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> noise(0.0, 10.0);
  std::uniform_real_distribution<double> slope(0.3, 1.0);
  const int m = kDefaultSmoothingHalfWidth;
  double polar_err = 0.0;
  std::size_t polar_n = 0;
  double naive_err = 0.0;
  std::size_t naive_n = 0;
  for (int seq = 0; seq < 40; ++seq) {
    const double rate = (seq % 2 ? 1.0 : -1.0) * slope(rng);
    const int n = 240;
    const double start = -rate * n / 2.0;  // crosses 0 mid-sequence
    std::vector<double> truth(n), raw(n);
    std::vector<TrackSample> samples;
    for (int i = 0; i < n; ++i) {
      truth[i] = normalize_degrees(start + rate * i);
      raw[i] = normalize_degrees(truth[i] + noise(rng));
      TrackSample s;
      s.object_id = 1;
      s.camera_id = "c";
      s.frame = i;
      s.raw_angle = raw[i];
      samples.push_back(s);
    }
    const Track t = smooth_angles(Track(1, "c", std::move(samples)), m);
    for (int i = 0; i < n; ++i) {
      polar_err += circular_distance(*t.samples()[i].smooth_angle, truth[i]);
      ++polar_n;
      if (circular_distance(truth[i], 0.0) > 5.0) continue;  // crossing frames
      double naive = 0.0;
      int count = 0;
      for (int j = std::max(0, i - m); j <= std::min(n - 1, i + m); ++j, ++count) naive += raw[j];
      naive_err += circular_distance(naive / count, truth[i]);
      ++naive_n;
    }
  }
  polar_err /= static_cast<double>(polar_n);
  naive_err /= static_cast<double>(naive_n);
  return {polar_err < 5.0 && naive_err > 45.0,
          fmt("polar mean error %.2f deg over %.0f frames; arithmetic mean error %.1f deg on %.0f crossing frames",
              polar_err, static_cast<double>(polar_n), naive_err, static_cast<double>(naive_n))};
}

// ---------------------------------------------------------------------------

Outcome confidence_contract() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> delta(0.0, 180.0), speed(0.0, 5.0), occ(0.0, 1.0), step(1e-6, 1.0);
  std::size_t violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const double d = delta(rng), s = speed(rng), o = occ(rng);
    const double c = sample_confidence(d, s, o, kDefaultSpeedReference);
    if (!(c >= 0.0 && c <= 1.0)) ++violations;
    if (sample_confidence(std::min(180.0, d + 20.0 * step(rng)), s, o, 1.0) > c) ++violations;
    if (sample_confidence(d, s + step(rng), o, 1.0) < c) ++violations;
    if (sample_confidence(d, s, std::min(1.0, o + 0.2 * step(rng)), 1.0) > c) ++violations;
    if (sample_confidence(d, 0.0, o, 1.0) != 0.0) ++violations;
    if (sample_confidence(d, s, 1.0, 1.0) != 0.0) ++violations;
  }
  return {violations == 0, fmt("1e5 triples, %.0f violations", static_cast<double>(violations))};
}

// ---------------------------------------------------------------------------

Outcome bin_partition() {
  std::size_t mismatches = 0;
  std::array<std::size_t, 4> counts{};
  for (int k = 0; k < 720; ++k) {
    const double a = 0.5 * k;
    Pose expected;
    if (a >= 315.0 || a < 45.0) expected = Pose::front;
    else if (a < 135.0) expected = Pose::right;
    else if (a < 225.0) expected = Pose::back;
    else expected = Pose::left;
    const Pose got = assign_pose_group(a);
    ++counts[index_of(got)];
    if (got != expected) ++mismatches;
  }
  const bool boundaries = assign_pose_group(45.0) == Pose::right && assign_pose_group(315.0) == Pose::front;
  const bool full = std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == 720 &&
                    std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 180; });
  return {mismatches == 0 && boundaries && full,
          fmt("720 grid angles, %.0f mismatches, 180 per bin: ", static_cast<double>(mismatches)) +
              (full ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

MultiPoseModel random_model(std::mt19937_64& rng, int dim) {
  std::uniform_int_distribution<int> size(0, 5);
  std::normal_distribution<double> n;
  MultiPoseModel m;
  std::size_t total = 0;
  while (total == 0) {
    for (auto& g : m.groups) {
      g.members.clear();
      const int k = size(rng);
      for (int i = 0; i < k; ++i) {
        g.members.push_back({static_cast<int>(total), {Eigen::VectorXd::NullaryExpr(dim, [&] { return n(rng); }), "r"}});
        ++total;
      }
    }
  }
  return m;
}

Outcome uniform_equivalence() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const int dim = 12;
  LearnedMetric metric;
  metric.pca_mean = Eigen::VectorXd::NullaryExpr(dim, [&] { return n(rng); });
  metric.pca_basis = Eigen::MatrixXd::Identity(dim, 8);
  const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(8, 8, [&] { return n(rng); });
  metric.M = a * a.transpose();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const MultiPoseModel x = random_model(rng, dim);
    const MultiPoseModel y = random_model(rng, dim);
    const double pamm = pamm_cost(pairwise_distances(x, y, metric), MatchWeights::uniform()).cost;
    const double avg = baseline_cost(x, y, metric, Strategy::fullmatch_avg, rng).cost;
    worst = std::max(worst, std::abs(pamm - avg));
  }
  return {worst <= 1e-12, fmt("1000 model pairs, max |PaMM(w=1) - FullMatch-avg| = %.2e", worst)};
}

// ---------------------------------------------------------------------------

// Rank-1 of single-sample matching on held-out identities whose within-identity
// variation is concentrated in a few directions.
double cluster_rank1(Learner learner, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  const int dim = 12;
  Eigen::VectorXd spread = Eigen::VectorXd::Constant(dim, 0.25);
  spread.head(3).setConstant(4.0);
  const auto draw = [&](const Eigen::VectorXd& centre) {
    return Eigen::VectorXd(centre + spread.cwiseProduct(Eigen::VectorXd::NullaryExpr(dim, [&] { return n(rng); })));
  };
  std::vector<Eigen::VectorXd> centres(160);
  for (auto& c : centres) c = Eigen::VectorXd::NullaryExpr(dim, [&] { return n(rng); });
  std::vector<PairLabel> pairs;
  std::uniform_int_distribution<int> train_id(0, 79);
  for (int i = 0; i < 3000; ++i) {
    const int p = train_id(rng);
    pairs.push_back({draw(centres[p]), draw(centres[p]), true});
    int q = train_id(rng);
    while (q == p) q = train_id(rng);
    pairs.push_back({draw(centres[p]), draw(centres[q]), false});
  }
  const LearnedMetric metric = learn_metric(pairs, MetricConfig{learner, kDefaultRegularization, dim});
  std::vector<Eigen::VectorXd> query, gallery;
  for (int id = 80; id < 160; ++id) {
    query.push_back(draw(centres[id]));
    gallery.push_back(draw(centres[id]));
  }
  Eigen::MatrixXd cost(80, 80);
  for (int i = 0; i < 80; ++i) {
    for (int j = 0; j < 80; ++j) cost(i, j) = metric_distance(metric, query[i], gallery[j]);
  }
  std::vector<Eigen::Index> truth(80);
  std::iota(truth.begin(), truth.end(), 0);
  return compute_cmc(cost, truth).accuracy.front();
}

Outcome metric_correctness() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    LearnedMetric m;
    m.pca_mean = Eigen::VectorXd::NullaryExpr(9, [&] { return n(rng); });
    m.pca_basis = Eigen::MatrixXd::NullaryExpr(9, 5, [&] { return n(rng); });
    const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(5, 5, [&] { return n(rng); });
    m.M = a * a.transpose();
    const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(9, [&] { return n(rng); });
    const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(9, [&] { return n(rng); });
    const Eigen::VectorXd d = m.pca_basis.transpose() * (x - m.pca_mean) - m.pca_basis.transpose() * (y - m.pca_mean);
    worst = std::max(worst, std::abs(metric_distance(m, x, y) - std::sqrt(d.dot(m.M * d))));
  }
  double min_eig = std::numeric_limits<double>::infinity();
  for (Learner l : {Learner::mahalanobis, Learner::kissme}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<PairLabel> pairs;
      for (int i = 0; i < 400; ++i) {
        pairs.push_back({Eigen::VectorXd::NullaryExpr(10, [&] { return n(rng); }),
                         Eigen::VectorXd::NullaryExpr(10, [&] { return n(rng) * (i % 2 ? 1.0 : 0.3); }), i % 2 == 0});
      }
      const LearnedMetric m = learn_metric(pairs, MetricConfig{l, kDefaultRegularization, 8});
      min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.M).eigenvalues().minCoeff());
    }
  }
  double eu = 0.0, ma = 0.0, ki = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    eu += cluster_rank1(Learner::euclidean, seed) / 3.0;
    ma += cluster_rank1(Learner::mahalanobis, seed) / 3.0;
    ki += cluster_rank1(Learner::kissme, seed) / 3.0;
  }
  return {worst <= 1e-10 && min_eig >= -1e-8 && ki > eu && ma > eu,
          fmt("oracle gap %.1e, min eigenvalue %.1e, rank-1 euclidean %.3f mahalanobis %.3f", worst, min_eig, eu, ma) +
              fmt(" kissme %.3f", ki)};
}

// ---------------------------------------------------------------------------

double grid_minimum(const Eigen::MatrixXd& x, const std::vector<int>& y, double lambda) {
  const int k = static_cast<int>(x.cols());
  const int n = k == 3 ? 21 : 41;
  Eigen::VectorXd centre = Eigen::VectorXd::Zero(k);
  double best = svm_objective(centre, x, y, lambda);
  // Halving the window each level keeps the minimiser well inside it even in
  // narrow valleys of the objective.
  double half = 16.0;
  for (int level = 0; level < 32; ++level) {
    Eigen::VectorXd best_w = centre;
    const int total = static_cast<int>(std::pow(n, k));
    for (int idx = 0; idx < total; ++idx) {
      Eigen::VectorXd w(k);
      int rem = idx;
      for (int c = 0; c < k; ++c) {
        w[c] = centre[c] - half + 2.0 * half * (rem % n) / (n - 1);
        rem /= n;
      }
      const double f = svm_objective(w, x, y, lambda);
      if (f < best) {
        best = f;
        best_w = w;
      }
    }
    centre = best_w;
    half /= 2.0;
  }
  return best;
}

Outcome svm_oracle() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  double worst_gap = 0.0;
  double worst_violation = 0.0;
  int problems = 0;
  for (int dims = 1; dims <= 3; ++dims) {
    for (int trial = 0; trial < 4; ++trial) {
      const int count = 40;
      Eigen::MatrixXd x(count, dims);
      std::vector<int> y(count);
      for (int a = 0; a < count; ++a) {
        y[a] = a % 3 == 0 ? 1 : -1;
        for (int c = 0; c < dims; ++c) x(a, c) = std::abs((y[a] == 1 ? 1.0 : 2.0 + 0.5 * c) + 0.6 * n(rng));
      }
      for (double lambda : {0.1, 1.0, 10.0}) {
        const SvmSolution s = solve_linear_svm(x, y, SvmConfig{lambda, 1000, 1e-10});
        const double oracle = grid_minimum(x, y, lambda);
        worst_gap = std::max(worst_gap, std::abs(s.objective - oracle));
        for (int a = 0; a < count; ++a) {
          worst_violation = std::max(worst_violation, (1.0 - s.slack[a]) - y[a] * x.row(a).dot(s.w));
          worst_violation = std::max(worst_violation, -s.slack[a]);
        }
        ++problems;
      }
    }
  }
  // Full ten-coordinate training with only two informative pose pairs.
  std::vector<DistanceSample> samples(2);
  samples[0].y = 1;
  samples[0].x[0] = samples[0].x[7] = 0.1;
  samples[1].y = -1;
  samples[1].x[0] = samples[1].x[7] = 1.0;
  const TrainedWeights t = train_weights(samples, SvmConfig{});
  Eigen::MatrixXd x2(2, 2);
  x2 << 0.1, 0.1, 1.0, 1.0;
  worst_gap = std::max(worst_gap, std::abs(t.raw.objective - grid_minimum(x2, {1, -1}, 1.0)));
  ++problems;
  return {worst_gap <= 1e-4 && worst_violation <= 1e-6,
          fmt("%.0f problems, max |objective - grid oracle| %.1e, max margin violation %.1e", problems, worst_gap,
              worst_violation)};
}

// ---------------------------------------------------------------------------

struct SceneModels {
  Scene scene;
  std::vector<MultiPoseModel> models;
  MatchingSet set;
};

std::unique_ptr<SceneModels> scene_models(const SceneConfig& config) {
  auto out = std::make_unique<SceneModels>();
  out->scene = generate_scene(config);
  out->models =
      run_pipeline(out->scene.tracks, out->scene.cameras, PrecomputedFeatures(out->scene.features), PipelineConfig{});
  out->set = make_matching_set(out->models, out->scene.cameras[0].id(), out->scene.cameras[1].id());
  return out;
}

Outcome weight_tendency() {
  const auto data = scene_models(SceneConfig{});
  std::string detail;
  bool pass = true;
  for (Learner l : {Learner::euclidean, Learner::mahalanobis, Learner::kissme}) {
    const AuxiliaryTraining t = train_on_all(data->set, MetricConfig{l}, SvmConfig{}, PairSampling{}, 1);
    double same = 0.0, cross = 0.0;
    for (std::size_t k = 0; k < kPosePairCount; ++k) {
      (is_same_pose_pair(static_cast<int>(k)) ? same : cross) += t.weights.weights.w[k];
    }
    same /= 4.0;
    cross /= 6.0;
    pass = pass && same > cross;
    detail += std::string(to_string(l)) + fmt(" same %.3f cross %.3f; ", same, cross);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome end_to_end() {
  SceneConfig config;
  config.identity_count = 100;
  config.camera_count = 2;
  const auto test = scene_models(config);
  SceneConfig aux_config = config;
  aux_config.seed += 1000003;
  const auto aux = scene_models(aux_config);
  EvaluationConfig eval;
  eval.trials = 10;
  eval.weights = train_on_all(aux->set, eval.metric, eval.svm, eval.sampling, eval.seed).weights.weights;
  const EvaluationResult r = run_evaluation(test->set, eval);
  const double pamm = r.of(Strategy::pamm).mean_accuracy.front();
  const double full = r.of(Strategy::fullmatch_avg).mean_accuracy.front();
  const double single = r.of(Strategy::single_match).mean_accuracy.front();
  return {pamm >= full && full >= single && pamm - single >= 0.10,
          fmt("strength %.1f, %.0f identities; rank-1 PaMM %.3f FullMatch-avg %.3f", config.pose_appearance_strength,
              static_cast<double>(test->set.identities.size()), pamm, full) +
              fmt(" SingleMatch %.3f", single)};
}

// ---------------------------------------------------------------------------

Outcome cmc_statistics() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int g = 20;
  const int queries = 10000;
  Eigen::MatrixXd cost(queries, g);
  for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = u(rng);
  std::vector<Eigen::Index> truth(queries);
  std::uniform_int_distribution<Eigen::Index> pick(0, g - 1);
  for (auto& t : truth) t = pick(rng);
  const CmcCurve c = compute_cmc(cost, truth);
  const double p = 1.0 / g;
  const double sigma = std::sqrt(p * (1.0 - p) / queries);
  bool monotone = c.accuracy.back() == 1.0;
  for (std::size_t i = 1; i < c.accuracy.size(); ++i) monotone = monotone && c.accuracy[i] >= c.accuracy[i - 1];
  const double mean = std::accumulate(c.accuracy.begin(), c.accuracy.end(), 0.0) / g;
  const double auc_gap = std::abs(c.auc - mean);
  const double z = std::abs(c.accuracy.front() - p) / sigma;
  return {z <= 3.0 && monotone && auc_gap <= 1e-12,
          fmt("rank-1 %.4f vs %.4f (%.2f sigma), monotone ", c.accuracy.front(), p, z) + (monotone ? "yes" : "no") +
              fmt(", |auc - mean| %.1e", auc_gap)};
}

// ---------------------------------------------------------------------------

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string("\"") + PAMM_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome reproducibility() {
  const auto dir = std::filesystem::temp_directory_path() / "pamm_acceptance_repro";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto log = dir / "log.txt";
  if (run_cli("synth-gen --out \"" + (dir / "scene").string() + "\" --seed 5", log) != 0) {
    return {false, "synth-gen failed: " + slurp(log)};
  }
  for (const char* name : {"a", "b"}) {
    std::ofstream(dir / (std::string(name) + ".toml"))
        << "[evaluate]\ndata = \"" << (dir / "scene").string() << "\"\nout = \""
        << (dir / (std::string(name) + ".json")).string() << "\"\nemit-cmc-csv = \""
        << (dir / (std::string(name) + ".csv")).string() << "\"\n";
    if (run_cli("--config \"" + (dir / (std::string(name) + ".toml")).string() + "\" evaluate", log) != 0) {
      return {false, "evaluate failed: " + slurp(log)};
    }
  }
  const std::string a = slurp(dir / "a.json");
  const bool same = !a.empty() && a == slurp(dir / "b.json") && slurp(dir / "a.csv") == slurp(dir / "b.csv");
  return {same, fmt("results.json %.0f bytes, ", static_cast<double>(a.size())) +
                    (same ? "byte-identical across runs" : "runs differ")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0: no stated limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "pose estimation oracle", 10.0, pose_oracle},
      {2, "wraparound smoothing", 5.0, wraparound_smoothing},
      {3, "confidence contract", 5.0, confidence_contract},
      {4, "bin partition", 1.0, bin_partition},
      {5, "uniform-weight equivalence", 0.0, uniform_equivalence},
      {6, "metric correctness", 0.0, metric_correctness},
      {7, "SVM oracle agreement", 0.0, svm_oracle},
      {8, "same-pose weight tendency", 30.0, weight_tendency},
      {9, "end-to-end ordering", 300.0, end_to_end},
      {10, "CMC statistics", 0.0, cmc_statistics},
      {11, "reproducibility", 0.0, reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0.0 && elapsed >= c.limit_s) {
      o.pass = false;
      o.detail += fmt("; exceeded %.0f s limit", c.limit_s);
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                elapsed);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
