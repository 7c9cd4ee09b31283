#include "pamm/metric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "pamm/error.hpp"

namespace pamm {
namespace {

// Singular values below this fraction of the largest one count as zero variance.
constexpr double kRankTolerance = 1e-10;

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& s, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  if (!(values.minCoeff() > 1e-12 * std::max(largest, 1e-300))) {
    throw Error(ErrorCode::SingularCovariance, std::string(what) + " covariance is singular after regularisation");
  }
  return eig.eigenvectors() * values.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd regularised_second_moment(const Eigen::MatrixXd& diffs, double regularization) {
  const Eigen::Index r = diffs.cols();
  Eigen::MatrixXd s = diffs.transpose() * diffs / static_cast<double>(diffs.rows());
  s = 0.5 * (s + s.transpose());
  const double ridge = regularization * s.trace() / static_cast<double>(r);
  s.diagonal().array() += ridge;
  return s;
}

Eigen::MatrixXd matrix_from_rows(const nlohmann::json& rows, Eigen::Index expected_rows, Eigen::Index expected_cols,
                                 const char* name) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expected_rows) {
    throw Error(ErrorCode::ParseError, std::string("metric field '") + name + "' has the wrong number of rows");
  }
  Eigen::MatrixXd m(expected_rows, expected_cols);
  for (Eigen::Index i = 0; i < expected_rows; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expected_cols) {
      throw Error(ErrorCode::ParseError, std::string("metric field '") + name + "' has the wrong number of columns");
    }
    for (Eigen::Index k = 0; k < expected_cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

nlohmann::json rows_of(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string_view to_string(Learner learner) noexcept {
  switch (learner) {
    case Learner::euclidean: return "euclidean";
    case Learner::mahalanobis: return "mahalanobis";
    case Learner::kissme: return "kissme";
  }
  return "euclidean";
}

Learner learner_from_string(std::string_view name) {
  if (name == "euclidean") return Learner::euclidean;
  if (name == "mahalanobis") return Learner::mahalanobis;
  if (name == "kissme") return Learner::kissme;
  throw Error(ErrorCode::InvalidArgument, "unknown metric learner '" + std::string(name) + "'");
}

PcaProjection fit_pca(const Eigen::MatrixXd& data, int target_dim) {
  const Eigen::Index count = data.rows();
  const Eigen::Index dim = data.cols();
  if (count < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least two samples");
  if (target_dim < 1 || target_dim > std::min(dim, count)) {
    throw Error(ErrorCode::InvalidArgument, "PCA target dimension " + std::to_string(target_dim) +
                                                " outside [1, min(d, count)]");
  }
  PcaProjection pca;
  pca.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - pca.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& singular = svd.singularValues();

  Eigen::Index keep = target_dim;
  const double largest = singular.size() > 0 ? singular[0] : 0.0;
  Eigen::Index nonzero = 0;
  for (Eigen::Index i = 0; i < singular.size(); ++i) {
    if (singular[i] > kRankTolerance * largest && singular[i] > 0.0) ++nonzero;
  }
  if (nonzero < keep) {
    pca.warnings.push_back("RankDeficient: only " + std::to_string(nonzero) + " of " + std::to_string(target_dim) +
                           " requested principal directions carry variance; basis truncated");
    keep = std::max<Eigen::Index>(nonzero, 1);
  }
  pca.basis = svd.matrixV().leftCols(keep);
  pca.eigenvalues = singular.head(keep).array().square() / static_cast<double>(count - 1);
  for (Eigen::Index c = 0; c < keep; ++c) {
    Eigen::Index arg = 0;
    pca.basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (pca.basis(arg, c) < 0.0) pca.basis.col(c) *= -1.0;
  }
  return pca;
}

PcaProjection fit_pca(std::span<const Eigen::VectorXd> features, int target_dim) {
  if (features.empty()) throw Error(ErrorCode::InvalidArgument, "PCA needs at least two samples");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(features.size()), features.front().size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != data.cols()) throw Error(ErrorCode::DimensionMismatch, "PCA input dimensions differ");
    data.row(static_cast<Eigen::Index>(i)) = features[i].transpose();
  }
  return fit_pca(data, target_dim);
}

Eigen::VectorXd LearnedMetric::project(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "feature has dimension " + std::to_string(x.size()) +
                                                  ", metric expects " + std::to_string(input_dim()));
  }
  return pca_basis.transpose() * (x - pca_mean);
}

LearnedMetric identity_metric(Eigen::Index dim, const Eigen::MatrixXd& M) {
  LearnedMetric metric;
  metric.pca_mean = Eigen::VectorXd::Zero(dim);
  metric.pca_basis = Eigen::MatrixXd::Identity(dim, dim);
  metric.M = M;
  return metric;
}

Eigen::MatrixXd project_to_psd(const Eigen::MatrixXd& symmetric) {
  const Eigen::MatrixXd s = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

LearnedMetric learn_metric(std::span<const PairLabel> pairs, const PcaProjection& pca, Learner learner,
                           double regularization) {
  const Eigen::Index r = pca.basis.cols();
  LearnedMetric metric;
  metric.pca_mean = pca.mean;
  metric.pca_basis = pca.basis;
  metric.learner = learner;
  if (learner == Learner::euclidean) {
    metric.M = Eigen::MatrixXd::Identity(r, r);
    return metric;
  }
  if (!(regularization >= 0.0)) throw Error(ErrorCode::InvalidArgument, "regularization must be >= 0");

  std::size_t positives = 0;
  for (const auto& p : pairs) positives += p.same_identity ? 1 : 0;
  const std::size_t negatives = pairs.size() - positives;
  if (positives < static_cast<std::size_t>(r) + 1) {
    throw Error(ErrorCode::InsufficientPairs, "need at least " + std::to_string(r + 1) + " positive pairs, got " +
                                                  std::to_string(positives));
  }
  if (learner == Learner::kissme && negatives == 0) {
    throw Error(ErrorCode::InsufficientPairs, "KISSME needs at least one negative pair");
  }

  Eigen::MatrixXd pos(static_cast<Eigen::Index>(positives), r);
  Eigen::MatrixXd neg(static_cast<Eigen::Index>(negatives), r);
  Eigen::Index ip = 0;
  Eigen::Index in = 0;
  for (const auto& p : pairs) {
    if (p.a.size() != pca.mean.size() || p.b.size() != pca.mean.size()) {
      throw Error(ErrorCode::DimensionMismatch, "pair feature dimension does not match the PCA input");
    }
    const Eigen::VectorXd diff = pca.basis.transpose() * (p.a - p.b);
    if (p.same_identity) {
      pos.row(ip++) = diff.transpose();
    } else {
      neg.row(in++) = diff.transpose();
    }
  }

  const Eigen::MatrixXd pos_inv = symmetric_inverse(regularised_second_moment(pos, regularization), "positive");
  if (learner == Learner::mahalanobis) {
    metric.M = 0.5 * (pos_inv + pos_inv.transpose());
    return metric;
  }
  const Eigen::MatrixXd neg_inv = symmetric_inverse(regularised_second_moment(neg, regularization), "negative");
  metric.M = project_to_psd(pos_inv - neg_inv);
  return metric;
}

LearnedMetric learn_metric(std::span<const PairLabel> pairs, const MetricConfig& config) {
  if (pairs.empty()) throw Error(ErrorCode::InsufficientPairs, "no training pairs");
  const Eigen::Index dim = pairs.front().a.size();
  Eigen::MatrixXd data(static_cast<Eigen::Index>(2 * pairs.size()), dim);
  Eigen::Index row = 0;
  for (const auto& p : pairs) {
    if (p.a.size() != dim || p.b.size() != dim) throw Error(ErrorCode::DimensionMismatch, "pair dimensions differ");
    data.row(row++) = p.a.transpose();
    data.row(row++) = p.b.transpose();
  }
  const int target = static_cast<int>(std::min<Eigen::Index>({config.pca_dim, dim, data.rows()}));
  return learn_metric(pairs, fit_pca(data, target), config.learner, config.regularization);
}

double metric_distance(const LearnedMetric& metric, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != metric.input_dim() || b.size() != metric.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "feature dimension does not match metric input dimension " +
                                                  std::to_string(metric.input_dim()));
  }
  const Eigen::VectorXd diff = metric.project(a) - metric.project(b);
  return std::sqrt(std::max(0.0, diff.dot(metric.M * diff)));
}

MetricEmbedding::MetricEmbedding(const LearnedMetric& metric) : mean_(metric.pca_mean) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (metric.M + metric.M.transpose()));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  map_ = root.asDiagonal() * eig.eigenvectors().transpose() * metric.pca_basis.transpose();
}

Eigen::VectorXd MetricEmbedding::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != map_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "feature dimension does not match metric input dimension " +
                                                  std::to_string(map_.cols()));
  }
  return map_ * (x - mean_);
}

nlohmann::json metric_to_json(const LearnedMetric& metric) {
  std::vector<double> mean(metric.pca_mean.data(), metric.pca_mean.data() + metric.pca_mean.size());
  return {{"learner_id", std::string(to_string(metric.learner))},
          {"d", metric.input_dim()},
          {"r", metric.reduced_dim()},
          {"pca_mean", mean},
          {"pca_basis", rows_of(metric.pca_basis)},
          {"M", rows_of(metric.M)}};
}

LearnedMetric metric_from_json(const nlohmann::json& j) {
  try {
    LearnedMetric metric;
    metric.learner = learner_from_string(j.at("learner_id").get<std::string>());
    const auto d = j.at("d").get<Eigen::Index>();
    const auto r = j.at("r").get<Eigen::Index>();
    const auto mean = j.at("pca_mean").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(mean.size()) != d) throw Error(ErrorCode::ParseError, "metric pca_mean length != d");
    metric.pca_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
    metric.pca_basis = matrix_from_rows(j.at("pca_basis"), d, r, "pca_basis");
    metric.M = matrix_from_rows(j.at("M"), r, r, "M");
    return metric;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed metric file: ") + e.what());
  }
}

LearnedMetric load_metric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open metric file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return metric_from_json(j);
}

void save_metric(const std::string& path, const LearnedMetric& metric) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << metric_to_json(metric).dump() << '\n';
}

}  // namespace pamm
