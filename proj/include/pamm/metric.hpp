#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace pamm {

enum class Learner { euclidean, mahalanobis, kissme };

std::string_view to_string(Learner learner) noexcept;
Learner learner_from_string(std::string_view name);

inline constexpr int kDefaultPcaDimension = 64;
inline constexpr double kDefaultRegularization = 1e-3;

struct PcaProjection {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;        // d x r, orthonormal columns, descending variance
  Eigen::VectorXd eigenvalues;  // variance along each basis column
  std::vector<std::string> warnings;
};

/// Top-r principal directions of the rows of `data` (count x d). Each column's
/// largest-magnitude entry is made positive. When fewer than r directions
/// carry variance the basis is truncated and a RankDeficient warning is
/// attached instead of throwing.
PcaProjection fit_pca(const Eigen::MatrixXd& data, int target_dim);
PcaProjection fit_pca(std::span<const Eigen::VectorXd> features, int target_dim);

struct PairLabel {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  bool same_identity = false;
};

// Distance sqrt((P(a) - P(b))^T M (P(a) - P(b))) with P(x) = basis^T (x - mean).
struct LearnedMetric {
  Eigen::VectorXd pca_mean;
  Eigen::MatrixXd pca_basis;
  Eigen::MatrixXd M;
  Learner learner = Learner::euclidean;

  Eigen::Index input_dim() const noexcept { return pca_basis.rows(); }
  Eigen::Index reduced_dim() const noexcept { return pca_basis.cols(); }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
};

// Metric without any reduction: identity basis, zero mean.
LearnedMetric identity_metric(Eigen::Index dim, const Eigen::MatrixXd& M);

struct MetricConfig {
  Learner learner = Learner::kissme;
  double regularization = kDefaultRegularization;
  int pca_dim = kDefaultPcaDimension;
};

/// Clips negative eigenvalues of a symmetric matrix to zero.
Eigen::MatrixXd project_to_psd(const Eigen::MatrixXd& symmetric);

/// Learns M in the subspace of `pca` from labelled difference vectors.
/// euclidean: M = I. mahalanobis: M = inv(S+). kissme: M = psd(inv(S+) - inv(S-)).
/// S+/S- are second moments of projected differences, each ridged by
/// regularization * trace / r. Throws InsufficientPairs, SingularCovariance.
LearnedMetric learn_metric(std::span<const PairLabel> pairs, const PcaProjection& pca, Learner learner,
                           double regularization);

// Fits the PCA on the pair members, truncating pca_dim to what the data allows.
LearnedMetric learn_metric(std::span<const PairLabel> pairs, const MetricConfig& config);

/// Throws DimensionMismatch.
double metric_distance(const LearnedMetric& metric, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Linear map E with |E a - E b| equal to metric_distance(a, b); used to
// precompute embeddings when many distances share one metric.
class MetricEmbedding {
 public:
  explicit MetricEmbedding(const LearnedMetric& metric);
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  Eigen::Index input_dim() const noexcept { return map_.cols(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd map_;
};

nlohmann::json metric_to_json(const LearnedMetric& metric);
LearnedMetric metric_from_json(const nlohmann::json& j);
LearnedMetric load_metric(const std::string& path);
void save_metric(const std::string& path, const LearnedMetric& metric);

}  // namespace pamm
