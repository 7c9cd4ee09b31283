#pragma once

#include <array>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pamm/metric.hpp"
#include "pamm/multipose.hpp"

namespace pamm {

inline constexpr std::size_t kPosePairCount = 10;

// Unordered pose pairs; this order is also the coordinate order of training vectors.
inline constexpr std::array<std::string_view, kPosePairCount> kPosePairNames = {
    "ff", "fr", "fb", "fl", "rr", "rb", "rl", "bb", "bl", "ll"};

int pose_pair_index(Pose p, Pose q) noexcept;
bool is_same_pose_pair(int pair_index) noexcept;

// Ten weights, one per unordered pose pair, so w(p, q) == w(q, p) structurally.
struct MatchWeights {
  std::array<double, kPosePairCount> w{};

  static MatchWeights uniform(double value = 1.0);
  double operator()(Pose p, Pose q) const noexcept { return w[pose_pair_index(p, q)]; }
  // Entries finite and >= 0 with at least one positive.
  void validate() const;
};

nlohmann::json weights_to_json(const MatchWeights& weights);
MatchWeights weights_from_json(const nlohmann::json& j);
MatchWeights load_weights(const std::string& path);
void save_weights(const std::string& path, const MatchWeights& weights);

// Distances x_{p_i q_j}; cell (p, q) holds N_p(a) * N_q(b) values, row-major in (i, j).
struct PoseDistanceTable {
  std::array<std::array<std::vector<double>, 4>, 4> cells;

  const std::vector<double>& cell(Pose p, Pose q) const { return cells[index_of(p)][index_of(q)]; }
  std::size_t count() const noexcept;
};

struct MatchCost {
  double cost = 0.0;
  std::size_t pair_count = 0;
  std::array<std::array<bool, 4>, 4> existence{};
  bool uniform_fallback = false;  // see pamm_cost_or_mean
};

/// Throws DimensionMismatch.
PoseDistanceTable pairwise_distances(const MultiPoseModel& a, const MultiPoseModel& b, const LearnedMetric& metric);

/// Weighted mean of all distances, each weighted by its pose pair's w:
/// sum w_pq e_pq x / sum w_pq e_pq over every (p, i, q, j). Throws
/// NoExistingPairs and ZeroWeightMass.
MatchCost pamm_cost(const PoseDistanceTable& distances, const MatchWeights& weights);

// As pamm_cost, but a pair whose existing pose pairs all have zero weight gets
// the plain mean of its distances (the limit of a vanishing uniform weight
// floor) and is flagged, so a gallery can always be ranked.
MatchCost pamm_cost_or_mean(const PoseDistanceTable& distances, const MatchWeights& weights);

enum class Strategy { single_match, multiq_max, multiq_avg, fullmatch_min, fullmatch_avg, pamm };

inline constexpr std::array<Strategy, 6> kAllStrategies = {Strategy::single_match,  Strategy::multiq_max,
                                                           Strategy::multiq_avg,    Strategy::fullmatch_min,
                                                           Strategy::fullmatch_avg, Strategy::pamm};

std::string_view to_string(Strategy s) noexcept;
Strategy strategy_from_string(std::string_view name);

/// The five pose-agnostic baselines. SingleMatch draws one member of each
/// model from `rng`. Throws InvalidArgument for Strategy::pamm.
MatchCost baseline_cost(const MultiPoseModel& a, const MultiPoseModel& b, const LearnedMetric& metric,
                        Strategy strategy, std::mt19937_64& rng);

// Models with every member already mapped through a MetricEmbedding, plus the
// pooled vectors MultiQ needs. Matching a gallery reuses these.
struct EmbeddedModel {
  std::array<std::vector<Eigen::VectorXd>, 4> groups;
  Eigen::VectorXd pooled_max;
  Eigen::VectorXd pooled_avg;
  std::size_t size() const noexcept;
};

EmbeddedModel embed_model(const MultiPoseModel& model, const MetricEmbedding& embedding);
PoseDistanceTable pairwise_distances(const EmbeddedModel& a, const EmbeddedModel& b);
// PaMM here uses pamm_cost_or_mean.
MatchCost match_cost(const EmbeddedModel& a, const EmbeddedModel& b, Strategy strategy, const MatchWeights& weights,
                     std::mt19937_64& rng);

}  // namespace pamm
