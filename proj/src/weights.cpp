#include "pamm/weights.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <random>

#include "pamm/error.hpp"

namespace pamm {
namespace {

constexpr int kRightLeft = 6;
constexpr int kFrontBack = 2;

}  // namespace

namespace {

Pose pose_from_name(const std::string& name) {
  for (Pose p : kPoses) {
    if (pose_name(p) == name) return p;
  }
  if (name.size() == 1) return pose_from_letter(name[0]);
  throw Error(ErrorCode::ParseError, "unknown pose '" + name + "'");
}

}  // namespace

nlohmann::json pose_pairs_to_json(std::span<const PosePairSample> pairs) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : pairs) {
    list.push_back({{"a", std::vector<double>(p.a.data(), p.a.data() + p.a.size())},
                    {"pose_a", std::string(pose_name(p.pose_a))},
                    {"b", std::vector<double>(p.b.data(), p.b.data() + p.b.size())},
                    {"pose_b", std::string(pose_name(p.pose_b))},
                    {"same_identity", p.same_identity}});
  }
  return {{"pairs", std::move(list)}};
}

std::vector<PosePairSample> pose_pairs_from_json(const nlohmann::json& j) {
  try {
    std::vector<PosePairSample> out;
    for (const auto& item : j.at("pairs")) {
      const auto a = item.at("a").get<std::vector<double>>();
      const auto b = item.at("b").get<std::vector<double>>();
      if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::ParseError, "pair members differ in length");
      PosePairSample p;
      p.a = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
      p.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
      p.pose_a = pose_from_name(item.at("pose_a").get<std::string>());
      p.pose_b = pose_from_name(item.at("pose_b").get<std::string>());
      p.same_identity = item.at("same_identity").get<bool>();
      out.push_back(std::move(p));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("pairs: ") + e.what());
  }
}

DistanceDistributions build_distance_distributions(std::span<const PosePairSample> pairs,
                                                   const LearnedMetric& metric) {
  const MetricEmbedding embed(metric);
  DistanceDistributions out;
  for (const auto& pair : pairs) {
    const double d = (embed(pair.a) - embed(pair.b)).norm();
    const int k = pose_pair_index(pair.pose_a, pair.pose_b);
    (pair.same_identity ? out.positive : out.negative)[k].push_back(d);
  }
  for (std::size_t k = 0; k < kPosePairCount; ++k) {
    if (static_cast<int>(k) == kRightLeft) continue;
    if (out.positive[k].empty() || out.negative[k].empty()) {
      throw Error(ErrorCode::MissingPosePair, "pose pair '" + std::string(kPosePairNames[k]) + "' has no " +
                                                  (out.positive[k].empty() ? "positive" : "negative") + " samples");
    }
  }
  if (out.positive[kRightLeft].empty()) {
    out.positive[kRightLeft] = out.positive[kFrontBack];
    out.notes.emplace_back("positive rl distances copied from fb");
  }
  if (out.negative[kRightLeft].empty()) {
    out.negative[kRightLeft] = out.negative[kFrontBack];
    out.notes.emplace_back("negative rl distances copied from fb");
  }
  return out;
}

std::vector<DistanceSample> sample_training_vectors(const DistanceDistributions& distributions,
                                                    std::size_t count_pos, std::size_t count_neg,
                                                    std::uint64_t seed) {
  for (std::size_t k = 0; k < kPosePairCount; ++k) {
    if ((count_pos > 0 && distributions.positive[k].empty()) ||
        (count_neg > 0 && distributions.negative[k].empty())) {
      throw Error(ErrorCode::EmptyDistribution, "distance distribution '" + std::string(kPosePairNames[k]) +
                                                    "' is empty");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<DistanceSample> samples;
  samples.reserve(count_pos + count_neg);
  const auto draw = [&](const std::array<std::vector<double>, kPosePairCount>& source, int label) {
    DistanceSample s;
    s.y = label;
    for (std::size_t k = 0; k < kPosePairCount; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, source[k].size() - 1);
      s.x[k] = source[k][pick(rng)];
    }
    samples.push_back(s);
  };
  for (std::size_t i = 0; i < count_pos; ++i) draw(distributions.positive, +1);
  for (std::size_t i = 0; i < count_neg; ++i) draw(distributions.negative, -1);
  return samples;
}

double svm_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> y, double lambda) {
  double hinge = 0.0;
  for (Eigen::Index a = 0; a < x.rows(); ++a) {
    hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(a)] * x.row(a).dot(w));
  }
  return 0.5 * w.squaredNorm() + lambda * hinge;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double hinge_objective(const RowMatrix& z, const Eigen::VectorXd& w, double lambda) {
  return 0.5 * w.squaredNorm() + lambda * (1.0 - (z * w).array()).max(0.0).sum();
}

// Hinge with its kink rounded off over a margin interval of width mu.
double smoothed_objective(const RowMatrix& z, const Eigen::VectorXd& w, double lambda, double mu) {
  const Eigen::ArrayXd slack = 1.0 - (z * w).array();
  double sum = 0.0;
  for (double s : slack) {
    if (s >= mu) {
      sum += s - 0.5 * mu;
    } else if (s > 0.0) {
      sum += 0.5 * s * s / mu;
    }
  }
  return 0.5 * w.squaredNorm() + lambda * sum;
}

}  // namespace

SvmSolution solve_linear_svm(const Eigen::MatrixXd& x, std::span<const int> y, const SvmConfig& config) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (static_cast<std::size_t>(n) != y.size()) throw Error(ErrorCode::InvalidArgument, "label count != sample count");
  if (!(config.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  const double lambda = config.lambda;
  // Rows y_a x_a, so every margin is simply z_a . w.
  RowMatrix z = x;
  for (Eigen::Index i = 0; i < n; ++i) z.row(i) *= static_cast<double>(y[static_cast<std::size_t>(i)]);

  // Newton's method on the smoothed primal, shrinking the smoothing width
  // until the dual point read off the smoothed derivatives certifies the
  // requested duality gap for the true hinge objective.
  SvmSolution sol;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double mu = 1.0;
  int steps = 0;
  while (steps < config.max_iterations) {
    for (; steps < config.max_iterations; ++steps) {
      const Eigen::VectorXd margin = z * w;
      Eigen::VectorXd grad = w;
      Eigen::MatrixXd hessian = Eigen::MatrixXd::Identity(d, d);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s = 1.0 - margin[i];
        if (s >= mu) {
          grad -= lambda * z.row(i).transpose();
        } else if (s > 0.0) {
          grad -= (lambda * s / mu) * z.row(i).transpose();
          hessian.noalias() += (lambda / mu) * z.row(i).transpose() * z.row(i);
        }
      }
      if (grad.norm() <= 1e-13 * std::max(1.0, w.norm())) break;
      const Eigen::VectorXd step = hessian.ldlt().solve(-grad);
      const double f0 = smoothed_objective(z, w, lambda, mu);
      const double slope = grad.dot(step);
      double t = 1.0;
      Eigen::VectorXd candidate = w + step;
      while (smoothed_objective(z, candidate, lambda, mu) > f0 + 1e-4 * t * slope && t > 1e-12) {
        t *= 0.5;
        candidate = w + t * step;
      }
      if (t <= 1e-12) break;  // no further progress at this smoothing width
      const bool tiny = (candidate - w).norm() <= 1e-15 * std::max(1.0, w.norm());
      w = candidate;
      if (tiny) break;
    }

    const Eigen::VectorXd margin = z * w;
    Eigen::VectorXd alpha(n);
    for (Eigen::Index i = 0; i < n; ++i) alpha[i] = lambda * std::clamp((1.0 - margin[i]) / mu, 0.0, 1.0);
    const Eigen::VectorXd w_dual = z.transpose() * alpha;
    const double dual = alpha.sum() - 0.5 * w_dual.squaredNorm();
    double primal = hinge_objective(z, w, lambda);
    const double primal_dual = hinge_objective(z, w_dual, lambda);
    if (primal_dual < primal) {
      primal = primal_dual;
      w = w_dual;
    }
    sol.duality_gap = primal - dual;
    if (sol.duality_gap <= config.tolerance * std::max(1.0, primal)) {
      sol.converged = true;
      break;
    }
    if (mu < 1e-300) break;
    mu *= 0.1;
  }
  sol.iterations = steps;
  sol.w = w;
  sol.slack = (1.0 - (z * w).array()).max(0.0).matrix();
  sol.slack_active = (sol.slack.array() > 0.0).any();
  sol.objective = 0.5 * w.squaredNorm() + lambda * sol.slack.sum();
  return sol;
}

MatchWeights weights_from_hyperplane(const Eigen::VectorXd& raw) {
  if (raw.size() != static_cast<Eigen::Index>(kPosePairCount)) {
    throw Error(ErrorCode::DimensionMismatch, "hyperplane must have 10 coordinates");
  }
  MatchWeights weights;
  double largest = 0.0;
  for (std::size_t k = 0; k < kPosePairCount; ++k) {
    weights.w[k] = std::max(0.0, -raw[static_cast<Eigen::Index>(k)]);
    largest = std::max(largest, weights.w[k]);
  }
  if (!(largest > 0.0)) {
    throw Error(ErrorCode::Degenerate, "trained hyperplane assigns no positive weight to any pose pair");
  }
  for (double& v : weights.w) v *= kWeightCeiling / largest;
  return weights;
}

TrainedWeights train_weights(std::span<const DistanceSample> samples, const SvmConfig& config) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "no training samples");
  bool has_pos = false;
  bool has_neg = false;
  bool all_same = true;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(kPosePairCount));
  std::vector<int> y(samples.size());
  for (std::size_t a = 0; a < samples.size(); ++a) {
    const auto& s = samples[a];
    if (s.y != 1 && s.y != -1) throw Error(ErrorCode::InvalidArgument, "labels must be +1 or -1");
    for (std::size_t k = 0; k < kPosePairCount; ++k) {
      if (!std::isfinite(s.x[k]) || s.x[k] < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "distance samples must be finite and >= 0");
      }
      x(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = s.x[k];
    }
    y[a] = s.y;
    has_pos = has_pos || s.y == 1;
    has_neg = has_neg || s.y == -1;
    all_same = all_same && s.x == samples.front().x;
  }
  if (!has_pos || !has_neg) throw Error(ErrorCode::InvalidArgument, "weight training needs both classes");
  if (all_same) throw Error(ErrorCode::Degenerate, "all training samples are identical");

  TrainedWeights out;
  out.raw = solve_linear_svm(x, y, config);
  if (!out.raw.converged) {
    out.warnings.emplace_back("SVM solver stopped at the iteration limit with duality gap " +
                              std::to_string(out.raw.duality_gap));
  }
  if (out.raw.slack_active) {
    out.warnings.emplace_back("NonSeparableWarning: some margin constraints use slack");
  }
  out.weights = weights_from_hyperplane(out.raw.w);
  return out;
}

}  // namespace pamm
