#include "pamm/matching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "pamm/error.hpp"

namespace pamm {
namespace {

constexpr std::array<std::array<int, 4>, 4> kPairIndex = {{
    {0, 1, 2, 3},
    {1, 4, 5, 6},
    {2, 5, 7, 8},
    {3, 6, 8, 9},
}};

MatchCost summarize(const PoseDistanceTable& table) {
  MatchCost cost;
  for (int p = 0; p < 4; ++p) {
    for (int q = 0; q < 4; ++q) cost.existence[p][q] = !table.cells[p][q].empty();
  }
  cost.pair_count = table.count();
  return cost;
}

const Eigen::VectorXd& pick_member(const EmbeddedModel& m, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
  std::size_t k = pick(rng);
  for (const auto& g : m.groups) {
    if (k < g.size()) return g[k];
    k -= g.size();
  }
  throw Error(ErrorCode::EmptyTrack, "model has no members");
}

}  // namespace

int pose_pair_index(Pose p, Pose q) noexcept { return kPairIndex[index_of(p)][index_of(q)]; }

bool is_same_pose_pair(int pair_index) noexcept {
  return pair_index == 0 || pair_index == 4 || pair_index == 7 || pair_index == 9;
}

MatchWeights MatchWeights::uniform(double value) {
  MatchWeights weights;
  weights.w.fill(value);
  return weights;
}

void MatchWeights::validate() const {
  bool any_positive = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "matching weight " + std::string(kPosePairNames[i]) +
                                                  " must be finite and >= 0");
    }
    any_positive = any_positive || w[i] > 0.0;
  }
  if (!any_positive) throw Error(ErrorCode::InvalidArgument, "all matching weights are zero");
}

nlohmann::json weights_to_json(const MatchWeights& weights) {
  nlohmann::json j = nlohmann::json::object();
  // Key order of the weights file.
  for (const std::string_view name : {"ff", "rr", "bb", "ll", "fr", "fb", "fl", "rb", "rl", "bl"}) {
    const auto it = std::find(kPosePairNames.begin(), kPosePairNames.end(), name);
    j[std::string(name)] = weights.w[static_cast<std::size_t>(it - kPosePairNames.begin())];
  }
  return j;
}

MatchWeights weights_from_json(const nlohmann::json& j) {
  MatchWeights weights;
  try {
    for (std::size_t i = 0; i < kPosePairCount; ++i) {
      const std::string name(kPosePairNames[i]);
      const std::string swapped{name[1], name[0]};
      if (j.contains(name)) {
        weights.w[i] = j.at(name).get<double>();
      } else if (j.contains(swapped)) {
        weights.w[i] = j.at(swapped).get<double>();
      } else {
        throw Error(ErrorCode::ParseError, "weights file lacks entry '" + name + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed weights file: ") + e.what());
  }
  weights.validate();
  return weights;
}

MatchWeights load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open weights file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return weights_from_json(j);
}

void save_weights(const std::string& path, const MatchWeights& weights) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << weights_to_json(weights).dump(2) << '\n';
}

std::size_t PoseDistanceTable::count() const noexcept {
  std::size_t n = 0;
  for (const auto& row : cells) {
    for (const auto& c : row) n += c.size();
  }
  return n;
}

std::size_t EmbeddedModel::size() const noexcept {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

EmbeddedModel embed_model(const MultiPoseModel& model, const MetricEmbedding& embedding) {
  EmbeddedModel out;
  const Eigen::Index dim = model.dimension();
  if (dim != embedding.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "model features have dimension " + std::to_string(dim) +
                                                  ", metric expects " + std::to_string(embedding.input_dim()));
  }
  Eigen::VectorXd max_pool = Eigen::VectorXd::Constant(dim, -std::numeric_limits<double>::infinity());
  Eigen::VectorXd sum_pool = Eigen::VectorXd::Zero(dim);
  for (int p = 0; p < 4; ++p) {
    for (const auto& member : model.groups[p].members) {
      if (member.feature.values.size() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "feature dimensions differ within a model");
      }
      out.groups[p].push_back(embedding(member.feature.values));
      max_pool = max_pool.cwiseMax(member.feature.values);
      sum_pool += member.feature.values;
    }
  }
  out.pooled_max = embedding(max_pool);
  out.pooled_avg = embedding(sum_pool / static_cast<double>(model.size()));
  return out;
}

PoseDistanceTable pairwise_distances(const EmbeddedModel& a, const EmbeddedModel& b) {
  PoseDistanceTable table;
  for (int p = 0; p < 4; ++p) {
    for (int q = 0; q < 4; ++q) {
      auto& cell = table.cells[p][q];
      cell.reserve(a.groups[p].size() * b.groups[q].size());
      for (const auto& fa : a.groups[p]) {
        for (const auto& fb : b.groups[q]) cell.push_back((fa - fb).norm());
      }
    }
  }
  return table;
}

PoseDistanceTable pairwise_distances(const MultiPoseModel& a, const MultiPoseModel& b, const LearnedMetric& metric) {
  if (a.size() == 0 || b.size() == 0) throw Error(ErrorCode::EmptyTrack, "cannot match an empty model");
  PoseDistanceTable table;
  for (int p = 0; p < 4; ++p) {
    for (int q = 0; q < 4; ++q) {
      auto& cell = table.cells[p][q];
      for (const auto& ma : a.groups[p].members) {
        for (const auto& mb : b.groups[q].members) {
          cell.push_back(metric_distance(metric, ma.feature.values, mb.feature.values));
        }
      }
    }
  }
  return table;
}

MatchCost pamm_cost(const PoseDistanceTable& distances, const MatchWeights& weights) {
  MatchCost cost = summarize(distances);
  if (cost.pair_count == 0) throw Error(ErrorCode::NoExistingPairs, "no pose pair exists between the models");
  double numerator = 0.0;
  double denominator = 0.0;
  for (Pose p : kPoses) {
    for (Pose q : kPoses) {
      const auto& cell = distances.cell(p, q);
      if (cell.empty()) continue;
      const double w = weights(p, q);
      double sum = 0.0;
      for (double x : cell) sum += x;
      numerator += w * sum;
      denominator += w * static_cast<double>(cell.size());
    }
  }
  if (!(denominator > 0.0)) {
    throw Error(ErrorCode::ZeroWeightMass, "every existing pose pair has zero matching weight");
  }
  cost.cost = numerator / denominator;
  return cost;
}

MatchCost pamm_cost_or_mean(const PoseDistanceTable& distances, const MatchWeights& weights) {
  try {
    return pamm_cost(distances, weights);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroWeightMass) throw;
  }
  MatchCost cost = pamm_cost(distances, MatchWeights::uniform());
  cost.uniform_fallback = true;
  return cost;
}

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::single_match: return "SingleMatch";
    case Strategy::multiq_max: return "MultiQ-max";
    case Strategy::multiq_avg: return "MultiQ-avg";
    case Strategy::fullmatch_min: return "FullMatch-min";
    case Strategy::fullmatch_avg: return "FullMatch-avg";
    case Strategy::pamm: return "PaMM";
  }
  return "PaMM";
}

Strategy strategy_from_string(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + std::string(name) + "'");
}

MatchCost match_cost(const EmbeddedModel& a, const EmbeddedModel& b, Strategy strategy, const MatchWeights& weights,
                     std::mt19937_64& rng) {
  if (a.size() == 0 || b.size() == 0) throw Error(ErrorCode::EmptyTrack, "cannot match an empty model");
  switch (strategy) {
    case Strategy::single_match: {
      const Eigen::VectorXd& fa = pick_member(a, rng);
      const Eigen::VectorXd& fb = pick_member(b, rng);
      return {(fa - fb).norm(), 1, {}};
    }
    case Strategy::multiq_max:
      return {(a.pooled_max - b.pooled_max).norm(), 1, {}};
    case Strategy::multiq_avg:
      return {(a.pooled_avg - b.pooled_avg).norm(), 1, {}};
    case Strategy::fullmatch_min:
    case Strategy::fullmatch_avg: {
      const PoseDistanceTable table = pairwise_distances(a, b);
      MatchCost cost = summarize(table);
      double best = std::numeric_limits<double>::infinity();
      double sum = 0.0;
      for (const auto& row : table.cells) {
        for (const auto& cell : row) {
          for (double x : cell) {
            best = std::min(best, x);
            sum += x;
          }
        }
      }
      cost.cost = strategy == Strategy::fullmatch_min ? best : sum / static_cast<double>(cost.pair_count);
      return cost;
    }
    case Strategy::pamm:
      return pamm_cost_or_mean(pairwise_distances(a, b), weights);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown strategy");
}

MatchCost baseline_cost(const MultiPoseModel& a, const MultiPoseModel& b, const LearnedMetric& metric,
                        Strategy strategy, std::mt19937_64& rng) {
  if (strategy == Strategy::pamm) {
    throw Error(ErrorCode::InvalidArgument, "PaMM is not a baseline; use pamm_cost");
  }
  const MetricEmbedding embedding(metric);
  return match_cost(embed_model(a, embedding), embed_model(b, embedding), strategy, MatchWeights::uniform(), rng);
}

}  // namespace pamm
