#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "pamm/matching.hpp"
#include "support.hpp"

using namespace pamm;

namespace {

MultiPoseModel scalar_model(const std::array<std::vector<double>, 4>& values) {
  MultiPoseModel m;
  int frame = 0;
  for (int p = 0; p < 4; ++p) {
    for (double v : values[p]) m.groups[p].members.push_back({frame++, {Eigen::VectorXd::Constant(1, v), "t"}});
  }
  return m;
}

// Nested loops over every member pair, weights looked up by pose letters.
double brute_force_pamm(const MultiPoseModel& a, const MultiPoseModel& b, const LearnedMetric& metric,
                        const MatchWeights& w) {
  double num = 0.0;
  double den = 0.0;
  for (Pose p : kPoses) {
    for (Pose q : kPoses) {
      for (const auto& x : a.group(p).members) {
        for (const auto& y : b.group(q).members) {
          const double d = metric_distance(metric, x.feature.values, y.feature.values);
          num += w(p, q) * d;
          den += w(p, q);
        }
      }
    }
  }
  return num / den;
}

std::vector<double> all_distances(const MultiPoseModel& a, const MultiPoseModel& b, const LearnedMetric& metric) {
  std::vector<double> out;
  for (const auto& ga : a.groups) {
    for (const auto& x : ga.members) {
      for (const auto& gb : b.groups) {
        for (const auto& y : gb.members) out.push_back(metric_distance(metric, x.feature.values, y.feature.values));
      }
    }
  }
  return out;
}

std::array<int, 4> random_sizes(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, 4);
  std::array<int, 4> s{};
  do {
    for (auto& x : s) x = u(rng);
  } while (s[0] + s[1] + s[2] + s[3] == 0);
  return s;
}

MatchWeights random_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  MatchWeights w;
  for (auto& x : w.w) x = u(rng);
  return w;
}

}  // namespace

TEST_SUITE("matching") {
  TEST_CASE("pose pair indices are symmetric and cover ten pairs") {
    std::set<int> seen;
    for (Pose p : kPoses) {
      for (Pose q : kPoses) {
        CHECK(pose_pair_index(p, q) == pose_pair_index(q, p));
        const int i = pose_pair_index(p, q);
        seen.insert(i);
        const std::string name{pose_letter(std::min(p, q)), pose_letter(std::max(p, q))};
        CHECK(kPosePairNames[i] == name);
        CHECK(is_same_pose_pair(i) == (p == q));
      }
    }
    CHECK(seen.size() == kPosePairCount);
  }

  TEST_CASE("single front against single right gives one (f, r) distance") {
    const MultiPoseModel a = scalar_model({{{0.0}, {}, {}, {}}});
    const MultiPoseModel b = scalar_model({{{}, {2.0}, {}, {}}});
    const PoseDistanceTable t = pairwise_distances(a, b, identity_metric(1, Eigen::MatrixXd::Identity(1, 1)));
    CHECK(t.count() == 1);
    CHECK(t.cell(Pose::front, Pose::right).size() == 1);
    CHECK(t.cell(Pose::front, Pose::right)[0] == doctest::Approx(2.0));
  }

  TEST_CASE("identical single-sample models have zero same-pose distance") {
    std::mt19937_64 rng(1);
    const MultiPoseModel a = testing::random_model({0, 0, 1, 0}, 5, rng);
    const PoseDistanceTable t = pairwise_distances(a, a, identity_metric(5, Eigen::MatrixXd::Identity(5, 5)));
    CHECK(t.cell(Pose::back, Pose::back)[0] == 0.0);
  }

  TEST_CASE("distance count matches a nested-loop enumeration") {
    std::mt19937_64 rng(2);
    const MultiPoseModel a = testing::random_model({2, 1, 0, 3}, 4, rng);
    const MultiPoseModel b = testing::random_model({1, 1, 1, 1}, 4, rng);
    const PoseDistanceTable t = pairwise_distances(a, b, identity_metric(4, Eigen::MatrixXd::Identity(4, 4)));
    std::size_t oracle = 0;
    for (const auto& ga : a.groups) {
      for (const auto& gb : b.groups) oracle += ga.members.size() * gb.members.size();
    }
    CHECK(oracle == 24);
    CHECK(t.count() == oracle);
    for (Pose p : kPoses) {
      for (Pose q : kPoses) CHECK(t.cell(p, q).size() == a.group(p).members.size() * b.group(q).members.size());
    }
  }

  TEST_CASE("hand example with two weighted pose pairs") {
    const MultiPoseModel a = scalar_model({{{0.0}, {}, {}, {}}});
    const MultiPoseModel b = scalar_model({{{1.0}, {3.0}, {}, {}}});
    const LearnedMetric metric = identity_metric(1, Eigen::MatrixXd::Identity(1, 1));
    MatchWeights w;
    w.w[pose_pair_index(Pose::front, Pose::front)] = 2.0;
    w.w[pose_pair_index(Pose::front, Pose::right)] = 0.5;
    const MatchCost c = pamm_cost(pairwise_distances(a, b, metric), w);
    CHECK(c.cost == doctest::Approx(1.4).epsilon(1e-14));
    CHECK(c.cost == doctest::Approx(brute_force_pamm(a, b, metric, w)).epsilon(1e-14));
    CHECK(c.pair_count == 2);
    CHECK(c.existence[0][0]);
    CHECK(c.existence[0][1]);
    CHECK_FALSE(c.existence[1][1]);
  }

  TEST_CASE("a single pair returns its distance for any positive weight") {
    const MultiPoseModel a = scalar_model({{{0.0}, {}, {}, {}}});
    const MultiPoseModel b = scalar_model({{{3.7}, {}, {}, {}}});
    const auto t = pairwise_distances(a, b, identity_metric(1, Eigen::MatrixXd::Identity(1, 1)));
    for (double w : {0.01, 1.0, 2.0, 50.0}) CHECK(pamm_cost(t, MatchWeights::uniform(w)).cost == doctest::Approx(3.7));
  }

  TEST_CASE("randomised pamm cost properties") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
      const MultiPoseModel a = testing::random_model(random_sizes(rng), 6, rng);
      const MultiPoseModel b = testing::random_model(random_sizes(rng), 6, rng);
      const LearnedMetric metric = identity_metric(6, Eigen::MatrixXd::Identity(6, 6));
      MatchWeights w = random_weights(rng);
      w.w[0] += 0.1;
      w.w[4] += 0.1;
      w.w[7] += 0.1;
      w.w[9] += 0.1;
      const auto tab = pairwise_distances(a, b, metric);
      const double cost = pamm_cost(tab, w).cost;
      CHECK(std::abs(cost - brute_force_pamm(a, b, metric, w)) < 1e-12);
      CHECK(std::abs(cost - pamm_cost(pairwise_distances(b, a, metric), w).cost) < 1e-12);
      MatchWeights scaled = w;
      for (auto& x : scaled.w) x *= 7.5;
      CHECK(std::abs(cost - pamm_cost(tab, scaled).cost) < 1e-12);
      const auto d = all_distances(a, b, metric);
      CHECK(cost >= *std::min_element(d.begin(), d.end()) - 1e-12);
      CHECK(cost <= *std::max_element(d.begin(), d.end()) + 1e-12);
      double mean = 0.0;
      for (double x : d) mean += x;
      mean /= static_cast<double>(d.size());
      CHECK(std::abs(pamm_cost(tab, MatchWeights::uniform()).cost - mean) < 1e-12);
    }
  }

  TEST_CASE("zero weight on every existing pair") {
    const MultiPoseModel a = scalar_model({{{0.0}, {}, {}, {}}});
    const MultiPoseModel b = scalar_model({{{}, {1.0, 5.0}, {}, {}}});
    const auto t = pairwise_distances(a, b, identity_metric(1, Eigen::MatrixXd::Identity(1, 1)));
    MatchWeights w;
    w.w[pose_pair_index(Pose::front, Pose::front)] = 2.0;
    CHECK(testing::error_code_of([&] { pamm_cost(t, w); }) == ErrorCode::ZeroWeightMass);
    const MatchCost fallback = pamm_cost_or_mean(t, w);
    CHECK(fallback.uniform_fallback);
    CHECK(fallback.cost == doctest::Approx(3.0));
    CHECK_FALSE(pamm_cost_or_mean(t, MatchWeights::uniform()).uniform_fallback);
    CHECK(testing::error_code_of([] { pamm_cost(PoseDistanceTable{}, MatchWeights::uniform()); }) ==
          ErrorCode::NoExistingPairs);
  }

  TEST_CASE("weights validation") {
    MatchWeights w;
    CHECK(testing::error_code_of([&] { w.validate(); }).has_value());
    w.w[3] = -1.0;
    w.w[0] = 1.0;
    CHECK(testing::error_code_of([&] { w.validate(); }).has_value());
    CHECK_NOTHROW(MatchWeights::uniform().validate());
  }

  TEST_CASE("baselines agree on single-sample models") {
    std::mt19937_64 rng(4);
    const LearnedMetric metric = identity_metric(3, Eigen::MatrixXd::Identity(3, 3));
    for (int i = 0; i < 20; ++i) {
      const MultiPoseModel a = testing::random_model({0, 1, 0, 0}, 3, rng);
      const MultiPoseModel b = testing::random_model({0, 0, 0, 1}, 3, rng);
      const double ref = baseline_cost(a, b, metric, Strategy::fullmatch_avg, rng).cost;
      for (Strategy s : {Strategy::single_match, Strategy::multiq_max, Strategy::multiq_avg, Strategy::fullmatch_min}) {
        CHECK(baseline_cost(a, b, metric, s, rng).cost == doctest::Approx(ref).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("baseline definitions against direct oracles") {
    std::mt19937_64 rng(5);
    const LearnedMetric metric = identity_metric(4, Eigen::MatrixXd::Identity(4, 4));
    for (int i = 0; i < 50; ++i) {
      const MultiPoseModel a = testing::random_model(random_sizes(rng), 4, rng);
      const MultiPoseModel b = testing::random_model(random_sizes(rng), 4, rng);
      const auto d = all_distances(a, b, metric);
      const double mn = baseline_cost(a, b, metric, Strategy::fullmatch_min, rng).cost;
      const double avg = baseline_cost(a, b, metric, Strategy::fullmatch_avg, rng).cost;
      CHECK(mn <= avg + 1e-12);
      CHECK(std::abs(mn - *std::min_element(d.begin(), d.end())) < 1e-12);
      // Pooled vectors, pose groups ignored.
      Eigen::VectorXd amax = Eigen::VectorXd::Constant(4, -1e300), bmax = amax;
      Eigen::VectorXd aavg = Eigen::VectorXd::Zero(4), bavg = aavg;
      for (const auto& g : a.groups) {
        for (const auto& m : g.members) {
          amax = amax.cwiseMax(m.feature.values);
          aavg += m.feature.values / static_cast<double>(a.size());
        }
      }
      for (const auto& g : b.groups) {
        for (const auto& m : g.members) {
          bmax = bmax.cwiseMax(m.feature.values);
          bavg += m.feature.values / static_cast<double>(b.size());
        }
      }
      CHECK(std::abs(baseline_cost(a, b, metric, Strategy::multiq_max, rng).cost - (amax - bmax).norm()) < 1e-12);
      CHECK(std::abs(baseline_cost(a, b, metric, Strategy::multiq_avg, rng).cost - (aavg - bavg).norm()) < 1e-12);
      const double single = baseline_cost(a, b, metric, Strategy::single_match, rng).cost;
      CHECK(std::any_of(d.begin(), d.end(), [&](double x) { return std::abs(x - single) < 1e-12; }));
    }
  }

  TEST_CASE("multiq-avg of two copies is zero under any metric") {
    std::mt19937_64 rng(6);
    const MultiPoseModel a = testing::random_model({3, 0, 2, 1}, 5, rng);
    Eigen::MatrixXd r = Eigen::MatrixXd::Random(5, 5);
    const LearnedMetric metric = identity_metric(5, r * r.transpose());
    CHECK(baseline_cost(a, a, metric, Strategy::multiq_avg, rng).cost == 0.0);
    CHECK(testing::error_code_of([&] { baseline_cost(a, a, metric, Strategy::pamm, rng); }) ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("embedded matching agrees with direct matching") {
    std::mt19937_64 rng(7);
    Eigen::MatrixXd r = Eigen::MatrixXd::Random(4, 4);
    const LearnedMetric metric = identity_metric(4, r * r.transpose());
    const MetricEmbedding e(metric);
    for (int i = 0; i < 30; ++i) {
      const MultiPoseModel a = testing::random_model(random_sizes(rng), 4, rng);
      const MultiPoseModel b = testing::random_model(random_sizes(rng), 4, rng);
      const EmbeddedModel ea = embed_model(a, e);
      const EmbeddedModel eb = embed_model(b, e);
      const MatchWeights w = MatchWeights::uniform();
      for (Strategy s : {Strategy::fullmatch_min, Strategy::fullmatch_avg, Strategy::pamm}) {
        const double direct = s == Strategy::pamm ? pamm_cost(pairwise_distances(a, b, metric), w).cost
                                                  : baseline_cost(a, b, metric, s, rng).cost;
        CHECK(std::abs(match_cost(ea, eb, s, w, rng).cost - direct) < 1e-9);
      }
    }
  }

  TEST_CASE("strategy names round trip") {
    for (Strategy s : kAllStrategies) CHECK(strategy_from_string(to_string(s)) == s);
  }

  TEST_CASE("weights json round trip") {
    std::mt19937_64 rng(8);
    const MatchWeights w = random_weights(rng);
    CHECK(weights_from_json(weights_to_json(w)).w == w.w);
  }
}
