#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pamm/matching.hpp"
#include "pamm/metric.hpp"
#include "pamm/multipose.hpp"
#include "pamm/weights.hpp"

namespace pamm {

/// Shuffles the (sorted) ids with `seed`; the first ceil(n * fraction) form
/// the training half. Throws TooFewIdentities below two ids.
std::pair<std::vector<ObjectId>, std::vector<ObjectId>> split_identities(std::vector<ObjectId> ids,
                                                                         std::uint64_t seed,
                                                                         double fraction = 0.5);

struct CmcCurve {
  std::vector<double> accuracy;  // accuracy[n - 1] = fraction of queries with rank <= n
  double auc = 0.0;              // mean of the curve
};

/// Rank of a query = 1 + entries with strictly lower cost than its true match
/// + equal-cost entries at a lower gallery index. `truth[q]` is the gallery
/// column of query q's match. Throws TruthMissing.
CmcCurve compute_cmc(const Eigen::MatrixXd& cost, std::span<const Eigen::Index> truth);

// Query models in one camera matched against gallery models in another.
struct MatchingSet {
  std::string query_camera;
  std::string gallery_camera;
  std::vector<ObjectId> identities;  // present in both cameras, ascending
  std::vector<const MultiPoseModel*> query;
  std::vector<const MultiPoseModel*> gallery;
};

MatchingSet make_matching_set(const std::vector<MultiPoseModel>& models, const std::string& query_camera,
                              const std::string& gallery_camera);

struct PairSampling {
  std::size_t metric_positive = 5000;
  std::size_t metric_negative = 20000;
  std::size_t weight_positive_pairs = 20000;
  std::size_t weight_negative_pairs = 100000;
  std::size_t weight_positive_vectors = 3520;
  std::size_t weight_negative_vectors = 35200;
};

// Cross-camera member pairs of the identities at `members` indices of `set`.
// Each pair picks an identity (two distinct ones for negatives) and one member
// per camera uniformly at random.
std::vector<PairLabel> sample_metric_pairs(const MatchingSet& set, std::span<const std::size_t> members,
                                           std::size_t positives, std::size_t negatives, std::mt19937_64& rng);
std::vector<PosePairSample> sample_pose_pairs(const MatchingSet& set, std::span<const std::size_t> members,
                                              std::size_t positives, std::size_t negatives, std::mt19937_64& rng);

// PCA + metric learned from every identity of `members`.
LearnedMetric train_metric_on(const MatchingSet& set, std::span<const std::size_t> members, const MetricConfig& config,
                              const PairSampling& sampling, std::mt19937_64& rng);

// Distance distributions under `metric`, sampled training vectors and SVM.
TrainedWeights train_weights_on(const MatchingSet& set, std::span<const std::size_t> members,
                                const LearnedMetric& metric, const SvmConfig& svm, const PairSampling& sampling,
                                std::uint64_t seed);

// Metric and weights learned from every identity of a separate dataset, the
// way matching weights are meant to come from data disjoint from the test set.
struct AuxiliaryTraining {
  LearnedMetric metric;
  TrainedWeights weights;
};
AuxiliaryTraining train_on_all(const MatchingSet& set, const MetricConfig& metric, const SvmConfig& svm,
                               const PairSampling& sampling, std::uint64_t seed);

enum class WeightSource { fixed, per_split };

struct EvaluationConfig {
  int trials = 10;
  std::uint64_t seed = 1;
  double split_fraction = 0.5;
  std::vector<Strategy> strategies{kAllStrategies.begin(), kAllStrategies.end()};
  MetricConfig metric;
  PairSampling sampling;
  WeightSource weight_source = WeightSource::fixed;
  MatchWeights weights = MatchWeights::uniform();  // used when weight_source is fixed
  SvmConfig svm;
  int single_match_repeats = 10;
  int jobs = 1;
};

struct StrategyResult {
  Strategy strategy = Strategy::pamm;
  std::vector<double> mean_accuracy;
  std::vector<double> std;
  double auc = 0.0;
  std::vector<double> trial_auc;
};

struct EvaluationResult {
  std::vector<StrategyResult> strategies;
  std::vector<std::uint64_t> seeds;
  std::size_t gallery_size = 0;
  std::vector<std::string> notes;

  const StrategyResult& of(Strategy s) const;
};

/// Repeated split / train / match / CMC over `config.trials` seeds
/// (config.seed + trial). Trials may run on `config.jobs` threads; results
/// are merged in trial order.
EvaluationResult run_evaluation(const MatchingSet& set, const EvaluationConfig& config);

nlohmann::json results_to_json(const EvaluationResult& result, const nlohmann::json& metadata);
void write_results_json(const std::string& path, const EvaluationResult& result, const nlohmann::json& metadata);
void write_cmc_csv(const std::string& path, const EvaluationResult& result);

}  // namespace pamm
