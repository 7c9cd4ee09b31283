#include "pamm/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "pamm/error.hpp"

namespace pamm {

std::pair<std::vector<ObjectId>, std::vector<ObjectId>> split_identities(std::vector<ObjectId> ids,
                                                                         std::uint64_t seed, double fraction) {
  if (ids.size() < 2) {
    throw Error(ErrorCode::TooFewIdentities, "need at least 2 identities to split, got " + std::to_string(ids.size()));
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "split fraction must lie in (0, 1)");
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::InvalidArgument, "identity list contains duplicates");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  auto train_count = static_cast<std::size_t>(std::ceil(static_cast<double>(ids.size()) * fraction));
  train_count = std::clamp<std::size_t>(train_count, 1, ids.size() - 1);
  std::vector<ObjectId> train(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(train_count));
  std::vector<ObjectId> test(ids.begin() + static_cast<std::ptrdiff_t>(train_count), ids.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

CmcCurve compute_cmc(const Eigen::MatrixXd& cost, std::span<const Eigen::Index> truth) {
  const Eigen::Index queries = cost.rows();
  const Eigen::Index gallery = cost.cols();
  if (queries == 0 || gallery == 0) throw Error(ErrorCode::InvalidArgument, "empty cost matrix");
  if (static_cast<Eigen::Index>(truth.size()) != queries) {
    throw Error(ErrorCode::TruthMissing, "truth has " + std::to_string(truth.size()) + " entries for " +
                                             std::to_string(queries) + " queries");
  }
  if (!cost.allFinite()) throw Error(ErrorCode::InvalidArgument, "cost matrix contains non-finite values");
  std::vector<std::size_t> rank_count(static_cast<std::size_t>(gallery), 0);
  for (Eigen::Index q = 0; q < queries; ++q) {
    const Eigen::Index t = truth[static_cast<std::size_t>(q)];
    if (t < 0 || t >= gallery) {
      throw Error(ErrorCode::TruthMissing, "query " + std::to_string(q) + " has no true match in the gallery");
    }
    const double c = cost(q, t);
    Eigen::Index rank = 0;  // zero-based
    for (Eigen::Index g = 0; g < gallery; ++g) {
      if (cost(q, g) < c || (cost(q, g) == c && g < t)) ++rank;
    }
    ++rank_count[static_cast<std::size_t>(rank)];
  }
  CmcCurve curve;
  curve.accuracy.resize(static_cast<std::size_t>(gallery));
  std::size_t cumulative = 0;
  double sum = 0.0;
  for (std::size_t n = 0; n < rank_count.size(); ++n) {
    cumulative += rank_count[n];
    curve.accuracy[n] = static_cast<double>(cumulative) / static_cast<double>(queries);
    sum += curve.accuracy[n];
  }
  curve.auc = sum / static_cast<double>(gallery);
  return curve;
}

namespace {

const MultiPoseModel* larger(const MultiPoseModel* current, const MultiPoseModel* candidate) {
  if (!current || candidate->size() > current->size()) return candidate;
  return current;
}

}  // namespace

MatchingSet make_matching_set(const std::vector<MultiPoseModel>& models, const std::string& query_camera,
                              const std::string& gallery_camera) {
  if (query_camera == gallery_camera) {
    throw Error(ErrorCode::InvalidArgument, "query and gallery cameras must differ");
  }
  // An identity seen in several tracks of one camera keeps its largest model.
  std::map<ObjectId, std::pair<const MultiPoseModel*, const MultiPoseModel*>> by_id;
  for (const auto& model : models) {
    if (model.size() == 0) continue;
    if (model.camera_id == query_camera) {
      by_id[model.object_id].first = larger(by_id[model.object_id].first, &model);
    } else if (model.camera_id == gallery_camera) {
      by_id[model.object_id].second = larger(by_id[model.object_id].second, &model);
    }
  }
  MatchingSet set;
  set.query_camera = query_camera;
  set.gallery_camera = gallery_camera;
  for (const auto& [id, pair] : by_id) {
    if (!pair.first || !pair.second) continue;
    set.identities.push_back(id);
    set.query.push_back(pair.first);
    set.gallery.push_back(pair.second);
  }
  return set;
}

namespace {

struct MemberRef {
  const Eigen::VectorXd* feature;
  Pose pose;
};

std::vector<MemberRef> members_of(const MultiPoseModel& model) {
  std::vector<MemberRef> out;
  for (const auto& group : model.groups) {
    for (const auto& member : group.members) out.push_back({&member.feature.values, group.label});
  }
  return out;
}

// Member lists of the query and gallery models of each selected identity.
struct MemberPool {
  std::vector<std::vector<MemberRef>> query;
  std::vector<std::vector<MemberRef>> gallery;
};

MemberPool pool_of(const MatchingSet& set, std::span<const std::size_t> members) {
  if (members.size() < 2) {
    throw Error(ErrorCode::TooFewIdentities, "pair sampling needs at least 2 identities");
  }
  MemberPool pool;
  for (std::size_t i : members) {
    if (i >= set.identities.size()) throw Error(ErrorCode::InvalidArgument, "identity index out of range");
    pool.query.push_back(members_of(*set.query[i]));
    pool.gallery.push_back(members_of(*set.gallery[i]));
  }
  return pool;
}

template <class Emit>
void sample_pairs(const MemberPool& pool, std::size_t positives, std::size_t negatives, std::mt19937_64& rng,
                  Emit&& emit) {
  const std::size_t n = pool.query.size();
  std::uniform_int_distribution<std::size_t> pick_id(0, n - 1);
  auto pick = [&rng](const std::vector<MemberRef>& list) -> const MemberRef& {
    std::uniform_int_distribution<std::size_t> d(0, list.size() - 1);
    return list[d(rng)];
  };
  for (std::size_t k = 0; k < positives; ++k) {
    const std::size_t i = pick_id(rng);
    const MemberRef& a = pick(pool.query[i]);
    const MemberRef& b = pick(pool.gallery[i]);
    emit(a, b, true);
  }
  std::uniform_int_distribution<std::size_t> pick_other(0, n - 2);
  for (std::size_t k = 0; k < negatives; ++k) {
    const std::size_t i = pick_id(rng);
    std::size_t j = pick_other(rng);
    if (j >= i) ++j;
    const MemberRef& a = pick(pool.query[i]);
    const MemberRef& b = pick(pool.gallery[j]);
    emit(a, b, false);
  }
}

}  // namespace

std::vector<PairLabel> sample_metric_pairs(const MatchingSet& set, std::span<const std::size_t> members,
                                           std::size_t positives, std::size_t negatives, std::mt19937_64& rng) {
  const MemberPool pool = pool_of(set, members);
  std::vector<PairLabel> pairs;
  pairs.reserve(positives + negatives);
  sample_pairs(pool, positives, negatives, rng, [&](const MemberRef& a, const MemberRef& b, bool same) {
    pairs.push_back({*a.feature, *b.feature, same});
  });
  return pairs;
}

std::vector<PosePairSample> sample_pose_pairs(const MatchingSet& set, std::span<const std::size_t> members,
                                              std::size_t positives, std::size_t negatives, std::mt19937_64& rng) {
  const MemberPool pool = pool_of(set, members);
  std::vector<PosePairSample> pairs;
  pairs.reserve(positives + negatives);
  sample_pairs(pool, positives, negatives, rng, [&](const MemberRef& a, const MemberRef& b, bool same) {
    pairs.push_back({*a.feature, a.pose, *b.feature, b.pose, same});
  });
  return pairs;
}

LearnedMetric train_metric_on(const MatchingSet& set, std::span<const std::size_t> members, const MetricConfig& config,
                              const PairSampling& sampling, std::mt19937_64& rng) {
  const MemberPool pool = pool_of(set, members);
  std::vector<Eigen::VectorXd> features;
  for (const auto* side : {&pool.query, &pool.gallery}) {
    for (const auto& list : *side) {
      for (const auto& m : list) features.push_back(*m.feature);
    }
  }
  const auto dim = static_cast<int>(features.front().size());
  const int target = std::max(1, std::min({config.pca_dim, dim, static_cast<int>(features.size()) - 1}));
  const PcaProjection pca = fit_pca(std::span<const Eigen::VectorXd>(features), target);
  const Eigen::Index r = pca.basis.cols();

  // Pairs are learned from in the reduced space to keep memory independent of
  // the descriptor length; the reduced problem is then re-attached to the
  // full projection.
  std::vector<PairLabel> pairs;
  pairs.reserve(sampling.metric_positive + sampling.metric_negative);
  sample_pairs(pool, sampling.metric_positive, sampling.metric_negative, rng,
               [&](const MemberRef& a, const MemberRef& b, bool same) {
                 pairs.push_back({pca.basis.transpose() * (*a.feature - pca.mean),
                                  pca.basis.transpose() * (*b.feature - pca.mean), same});
               });
  PcaProjection reduced;
  reduced.mean = Eigen::VectorXd::Zero(r);
  reduced.basis = Eigen::MatrixXd::Identity(r, r);
  reduced.eigenvalues = pca.eigenvalues;
  LearnedMetric metric = learn_metric(std::span<const PairLabel>(pairs), reduced, config.learner,
                                      config.regularization);
  metric.pca_mean = pca.mean;
  metric.pca_basis = pca.basis;
  return metric;
}

TrainedWeights train_weights_on(const MatchingSet& set, std::span<const std::size_t> members,
                                const LearnedMetric& metric, const SvmConfig& svm, const PairSampling& sampling,
                                std::uint64_t seed) {
  const MemberPool pool = pool_of(set, members);
  // Distances are taken between embedded members, which equal metric distances
  // on the raw features.
  const MetricEmbedding embedding(metric);
  std::mt19937_64 rng(seed);
  std::vector<PosePairSample> pairs;
  pairs.reserve(sampling.weight_positive_pairs + sampling.weight_negative_pairs);
  std::map<const Eigen::VectorXd*, Eigen::VectorXd> cache;
  auto embedded = [&](const Eigen::VectorXd* f) -> const Eigen::VectorXd& {
    auto it = cache.find(f);
    if (it == cache.end()) it = cache.emplace(f, embedding(*f)).first;
    return it->second;
  };
  sample_pairs(pool, sampling.weight_positive_pairs, sampling.weight_negative_pairs, rng,
               [&](const MemberRef& a, const MemberRef& b, bool same) {
                 pairs.push_back({embedded(a.feature), a.pose, embedded(b.feature), b.pose, same});
               });
  const Eigen::Index r = embedding(metric.pca_mean).size();
  const LearnedMetric plain = identity_metric(r, Eigen::MatrixXd::Identity(r, r));
  const DistanceDistributions dist = build_distance_distributions(std::span<const PosePairSample>(pairs), plain);
  const auto samples =
      sample_training_vectors(dist, sampling.weight_positive_vectors, sampling.weight_negative_vectors, seed + 1);
  TrainedWeights trained = train_weights(std::span<const DistanceSample>(samples), svm);
  trained.warnings.insert(trained.warnings.begin(), dist.notes.begin(), dist.notes.end());
  return trained;
}

AuxiliaryTraining train_on_all(const MatchingSet& set, const MetricConfig& metric, const SvmConfig& svm,
                               const PairSampling& sampling, std::uint64_t seed) {
  std::vector<std::size_t> all(set.identities.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  AuxiliaryTraining out;
  out.metric = train_metric_on(set, all, metric, sampling, rng);
  out.weights = train_weights_on(set, all, out.metric, svm, sampling, seed + 0x5bd1e995);
  return out;
}

const StrategyResult& EvaluationResult::of(Strategy s) const {
  for (const auto& r : strategies) {
    if (r.strategy == s) return r;
  }
  throw Error(ErrorCode::InvalidArgument, "strategy " + std::string(to_string(s)) + " was not evaluated");
}

namespace {

struct TrialOutput {
  std::vector<CmcCurve> curves;  // one per configured strategy
  std::vector<std::string> notes;
};

std::vector<std::size_t> indices_of(const MatchingSet& set, const std::vector<ObjectId>& ids) {
  std::vector<std::size_t> out;
  for (ObjectId id : ids) {
    const auto it = std::lower_bound(set.identities.begin(), set.identities.end(), id);
    out.push_back(static_cast<std::size_t>(it - set.identities.begin()));
  }
  return out;
}

CmcCurve average_curves(const std::vector<CmcCurve>& curves) {
  CmcCurve mean;
  mean.accuracy.assign(curves.front().accuracy.size(), 0.0);
  for (const auto& c : curves) {
    for (std::size_t n = 0; n < c.accuracy.size(); ++n) mean.accuracy[n] += c.accuracy[n];
  }
  double sum = 0.0;
  for (double& a : mean.accuracy) {
    a /= static_cast<double>(curves.size());
    sum += a;
  }
  mean.auc = sum / static_cast<double>(mean.accuracy.size());
  return mean;
}

TrialOutput run_trial(const MatchingSet& set, const EvaluationConfig& config, std::uint64_t trial_seed) {
  TrialOutput out;
  const auto [train_ids, test_ids] = split_identities(set.identities, trial_seed, config.split_fraction);
  const auto train = indices_of(set, train_ids);
  const auto test = indices_of(set, test_ids);

  std::mt19937_64 pair_rng(trial_seed ^ 0x9e3779b97f4a7c15ULL);
  const LearnedMetric metric = train_metric_on(set, train, config.metric, config.sampling, pair_rng);

  const bool wants_pamm =
      std::find(config.strategies.begin(), config.strategies.end(), Strategy::pamm) != config.strategies.end();
  MatchWeights weights = config.weights;
  if (wants_pamm && config.weight_source == WeightSource::per_split) {
    TrainedWeights trained = train_weights_on(set, train, metric, config.svm, config.sampling, trial_seed + 0x5bd1e995);
    weights = trained.weights;
    for (auto& w : trained.warnings) out.notes.push_back(std::move(w));
  }

  const MetricEmbedding embedding(metric);
  std::vector<EmbeddedModel> queries, gallery;
  for (std::size_t i : test) {
    queries.push_back(embed_model(*set.query[i], embedding));
    gallery.push_back(embed_model(*set.gallery[i], embedding));
  }
  const auto g = static_cast<Eigen::Index>(test.size());
  std::vector<Eigen::Index> truth(test.size());
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<Eigen::Index>(i);

  // Strategies built on the full distance table share one table per model pair.
  std::map<Strategy, Eigen::MatrixXd> costs;
  for (Strategy s : config.strategies) {
    if (s != Strategy::single_match) costs[s] = Eigen::MatrixXd(g, g);
  }
  std::mt19937_64 unused(0);
  std::size_t unweighted = 0;
  for (Eigen::Index q = 0; q < g; ++q) {
    for (Eigen::Index c = 0; c < g; ++c) {
      const auto& a = queries[static_cast<std::size_t>(q)];
      const auto& b = gallery[static_cast<std::size_t>(c)];
      const bool needs_table = costs.count(Strategy::fullmatch_min) || costs.count(Strategy::fullmatch_avg) ||
                               costs.count(Strategy::pamm);
      PoseDistanceTable table;
      if (needs_table) table = pairwise_distances(a, b);
      for (auto& [s, matrix] : costs) {
        switch (s) {
          case Strategy::multiq_max:
          case Strategy::multiq_avg:
            matrix(q, c) = match_cost(a, b, s, weights, unused).cost;
            break;
          case Strategy::fullmatch_min: {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& row : table.cells) {
              for (const auto& cell : row) {
                for (double x : cell) best = std::min(best, x);
              }
            }
            matrix(q, c) = best;
            break;
          }
          case Strategy::fullmatch_avg: {
            double sum = 0.0;
            for (const auto& row : table.cells) {
              for (const auto& cell : row) {
                for (double x : cell) sum += x;
              }
            }
            matrix(q, c) = sum / static_cast<double>(table.count());
            break;
          }
          case Strategy::pamm: {
            const MatchCost m = pamm_cost_or_mean(table, weights);
            matrix(q, c) = m.cost;
            if (m.uniform_fallback) ++unweighted;
            break;
          }
          case Strategy::single_match:
            break;
        }
      }
    }
  }

  if (unweighted > 0) {
    out.notes.push_back("ZeroWeightMass: " + std::to_string(unweighted) + " of " + std::to_string(g * g) +
                        " PaMM pairs fell back to uniform weights");
  }

  for (Strategy s : config.strategies) {
    if (s != Strategy::single_match) {
      out.curves.push_back(compute_cmc(costs.at(s), truth));
      continue;
    }
    // One random appearance per model, redrawn for every repeat.
    std::vector<CmcCurve> repeats;
    for (int rep = 0; rep < config.single_match_repeats; ++rep) {
      std::mt19937_64 rng(trial_seed * 1000003ULL + static_cast<std::uint64_t>(rep) + 0x51ULL);
      Eigen::MatrixXd matrix(g, g);
      for (Eigen::Index q = 0; q < g; ++q) {
        for (Eigen::Index c = 0; c < g; ++c) {
          matrix(q, c) = match_cost(queries[static_cast<std::size_t>(q)], gallery[static_cast<std::size_t>(c)],
                                    Strategy::single_match, weights, rng)
                             .cost;
        }
      }
      repeats.push_back(compute_cmc(matrix, truth));
    }
    out.curves.push_back(average_curves(repeats));
  }
  return out;
}

}  // namespace

EvaluationResult run_evaluation(const MatchingSet& set, const EvaluationConfig& config) {
  if (config.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");
  if (config.strategies.empty()) throw Error(ErrorCode::InvalidArgument, "no strategies configured");
  if (config.single_match_repeats < 1) throw Error(ErrorCode::InvalidArgument, "single_match_repeats must be >= 1");
  if (set.identities.size() < 4) {
    throw Error(ErrorCode::TooFewIdentities, "evaluation needs at least 4 identities seen by both cameras, got " +
                                                 std::to_string(set.identities.size()));
  }
  if (config.weight_source == WeightSource::fixed) config.weights.validate();

  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<TrialOutput> outputs(trials);
  std::vector<std::exception_ptr> failures(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < trials; t = next++) {
      try {
        outputs[t] = run_trial(set, config, config.seed + t);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.jobs, 1)), 1, trials);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  EvaluationResult result;
  for (std::size_t t = 0; t < trials; ++t) {
    result.seeds.push_back(config.seed + t);
    for (const auto& note : outputs[t].notes) result.notes.push_back("trial " + std::to_string(t) + ": " + note);
  }
  result.gallery_size = outputs.front().curves.front().accuracy.size();
  for (std::size_t k = 0; k < config.strategies.size(); ++k) {
    StrategyResult sr;
    sr.strategy = config.strategies[k];
    std::vector<CmcCurve> curves;
    for (const auto& o : outputs) {
      curves.push_back(o.curves[k]);
      sr.trial_auc.push_back(o.curves[k].auc);
    }
    const CmcCurve mean = average_curves(curves);
    sr.mean_accuracy = mean.accuracy;
    sr.auc = mean.auc;
    // Population standard deviation across trials, per rank.
    sr.std.assign(mean.accuracy.size(), 0.0);
    for (const auto& c : curves) {
      for (std::size_t n = 0; n < c.accuracy.size(); ++n) {
        const double d = c.accuracy[n] - mean.accuracy[n];
        sr.std[n] += d * d;
      }
    }
    for (double& s : sr.std) s = std::sqrt(s / static_cast<double>(curves.size()));
    result.strategies.push_back(std::move(sr));
  }
  return result;
}

nlohmann::json results_to_json(const EvaluationResult& result, const nlohmann::json& metadata) {
  nlohmann::json meta = metadata.is_object() ? metadata : nlohmann::json::object();
  meta["gallery_size"] = result.gallery_size;
  meta["auc_rank_range"] = {1, result.gallery_size};
  meta["notes"] = result.notes;
  nlohmann::json list = nlohmann::json::array();
  std::vector<std::size_t> ranks(result.gallery_size);
  for (std::size_t n = 0; n < ranks.size(); ++n) ranks[n] = n + 1;
  for (const auto& sr : result.strategies) {
    nlohmann::json j;
    j["strategy"] = std::string(to_string(sr.strategy));
    j["ranks"] = ranks;
    j["mean_accuracy"] = sr.mean_accuracy;
    j["std"] = sr.std;
    j["auc"] = sr.auc;
    j["trial_auc"] = sr.trial_auc;
    j["trials"] = result.seeds.size();
    j["seeds"] = result.seeds;
    list.push_back(std::move(j));
  }
  return {{"metadata", meta}, {"results", list}};
}

void write_results_json(const std::string& path, const EvaluationResult& result, const nlohmann::json& metadata) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << results_to_json(result, metadata).dump(2) << '\n';
}

void write_cmc_csv(const std::string& path, const EvaluationResult& result) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << "strategy,rank,accuracy,std\n";
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& sr : result.strategies) {
    for (std::size_t n = 0; n < sr.mean_accuracy.size(); ++n) {
      out << to_string(sr.strategy) << ',' << n + 1 << ',' << fmt(sr.mean_accuracy[n]) << ',' << fmt(sr.std[n])
          << '\n';
    }
  }
}

}  // namespace pamm
