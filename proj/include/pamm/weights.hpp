#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pamm/matching.hpp"
#include "pamm/metric.hpp"
#include "pamm/multipose.hpp"

namespace pamm {

inline constexpr double kWeightCeiling = 2.0;

struct PosePairSample {
  Eigen::VectorXd a;
  Pose pose_a = Pose::front;
  Eigen::VectorXd b;
  Pose pose_b = Pose::front;
  bool same_identity = false;
};

// {"pairs": [{"a": [...], "pose_a": "front", "b": [...], "pose_b": "right", "same_identity": true}, ...]}
nlohmann::json pose_pairs_to_json(std::span<const PosePairSample> pairs);
std::vector<PosePairSample> pose_pairs_from_json(const nlohmann::json& j);

// Per unordered pose pair (kPosePairNames order), distances of same-identity
// and different-identity pairs.
struct DistanceDistributions {
  std::array<std::vector<double>, kPosePairCount> positive;
  std::array<std::vector<double>, kPosePairCount> negative;
  std::vector<std::string> notes;
};

// Right/left pairs are rarely observable, so a class of the "rl" distribution
// with no data is copied from "fb". Any other pose pair lacking a class throws
// MissingPosePair naming the first such pair.
DistanceDistributions build_distance_distributions(std::span<const PosePairSample> pairs, const LearnedMetric& metric);

struct DistanceSample {
  std::array<double, kPosePairCount> x{};
  int y = 1;  // +1 same identity, -1 different
};

/// Each coordinate is drawn independently and uniformly from its pose pair's
/// distribution of the sample's class. Positives come first. Throws EmptyDistribution.
std::vector<DistanceSample> sample_training_vectors(const DistanceDistributions& distributions,
                                                    std::size_t count_pos, std::size_t count_neg,
                                                    std::uint64_t seed);

struct SvmConfig {
  double lambda = 1.0;
  int max_iterations = 1000;  // Newton steps, summed over all smoothing widths
  double tolerance = 1e-10;  // duality gap relative to the objective
};

struct SvmSolution {
  Eigen::VectorXd w;
  Eigen::VectorXd slack;
  double objective = 0.0;
  int iterations = 0;
  double duality_gap = 0.0;
  bool converged = false;
  bool slack_active = false;
};

/// 0.5 |w|^2 + lambda * sum_a max(0, 1 - y_a w^T x_a).
double svm_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> y, double lambda);

// Linear SVM without an offset: min 0.5 |w|^2 + lambda sum xi_a subject to
// y_a w^T x_a >= 1 - xi_a, xi_a >= 0. Rows of `x` are samples. Convergence is
// certified by a duality gap, so `objective` is within `duality_gap` of optimal.
SvmSolution solve_linear_svm(const Eigen::MatrixXd& x, std::span<const int> y, const SvmConfig& config);

struct TrainedWeights {
  MatchWeights weights;
  SvmSolution raw;
  std::vector<std::string> warnings;
};

/// Negates the hyperplane (positives have small distances), clips negative
/// entries to zero and rescales so the largest weight is 2. Throws Degenerate
/// when nothing positive survives.
MatchWeights weights_from_hyperplane(const Eigen::VectorXd& raw);

/// Throws Degenerate when all samples coincide, InvalidArgument when a class is missing.
TrainedWeights train_weights(std::span<const DistanceSample> samples, const SvmConfig& config);

}  // namespace pamm
