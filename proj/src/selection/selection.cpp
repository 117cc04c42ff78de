#include "varcat/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace varcat {

Standardized standardize(const Eigen::MatrixXd& features) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n < 2) throw DegenerateCorpus("standardize needs at least two samples, got " + std::to_string(n));
  Standardized out;
  out.mean = features.colwise().mean().transpose();
  out.std = Eigen::VectorXd::Zero(d);
  out.z = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    auto col = features.col(j);
    if (col.maxCoeff() == col.minCoeff()) continue;
    Eigen::VectorXd centered = col.array() - out.mean[j];
    double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(n - 1));
    out.std[j] = sd;
    out.z.col(j) = centered / sd;
  }
  return out;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd c = z.transpose() * z / static_cast<double>(z.rows() - 1);
  // Symmetrize explicitly so C == C^T bit for bit.
  return (c + c.transpose()) / 2.0;
}

std::vector<double> suitability_scores(const Eigen::MatrixXd& z, const Eigen::VectorXd& w,
                                       double* gamma_out) {
  const Eigen::Index n = z.rows();
  Eigen::VectorXd p = z * w;
  double mean = p.mean();
  double sd = n > 1 ? std::sqrt((p.array() - mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
  double gamma = 2.0 * sd;
  if (gamma_out != nullptr) *gamma_out = sd > 0.0 ? gamma : 0.0;
  std::vector<double> scores(static_cast<std::size_t>(n), 0.5);
  if (sd == 0.0) return scores;
  const double lo = std::nextafter(0.0, 1.0);
  const double hi = std::nextafter(1.0, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 1.0 / (1.0 + std::exp(p[i] / gamma));
    scores[static_cast<std::size_t>(i)] = std::clamp(s, lo, hi);
  }
  return scores;
}

Eigen::MatrixXd feature_matrix(const std::vector<FeatureVector>& rows,
                               const std::vector<std::string>& features) {
  std::vector<std::size_t> cols;
  for (const std::string& name : features) {
    std::optional<std::size_t> idx = feature_index(name);
    if (!idx) throw SchemaError("unknown feature '" + name + "'");
    cols.push_back(*idx);
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(rows[i][cols[j]]);
    }
  }
  return x;
}

SuitabilityReport fit_suitability(const std::vector<std::string>& ids,
                                  const std::vector<FeatureVector>& rows,
                                  std::vector<std::string> features, const Projection& projection) {
  if (ids.size() != rows.size()) throw SchemaError("ids and feature rows differ in length");
  if (features.empty()) features.assign(kRetainedFeatures.begin(), kRetainedFeatures.end());

  Standardized st = standardize(feature_matrix(rows, features));
  auto nloc = std::find(features.begin(), features.end(), "nloc");
  std::size_t sign_index = nloc == features.end() ? 0 : static_cast<std::size_t>(nloc - features.begin());
  EigenPair pair = projection.direction(st.z, sign_index);

  SuitabilityReport report;
  report.ids = ids;
  report.model.method = projection.name();
  report.model.features = std::move(features);
  report.model.mean = st.mean;
  report.model.std = st.std;
  report.model.w = pair.vector;
  report.model.lambda_max = pair.value;
  report.scores = suitability_scores(st.z, pair.vector, &report.model.gamma);
  return report;
}

double quantile_threshold(std::vector<double> scores, double tau) {
  if (scores.empty()) throw DegenerateCorpus("no scores to threshold");
  if (!(tau >= 0.0 && tau < 1.0)) throw UsageError("tau must lie in [0, 1)");
  std::sort(scores.begin(), scores.end());
  auto k = static_cast<std::size_t>(std::floor(tau * static_cast<double>(scores.size()) + 1e-9));
  return scores[std::min(k, scores.size() - 1)];
}

CarrierSet select_carriers(const SuitabilityReport& report, double tau) {
  CarrierSet out;
  out.threshold = quantile_threshold(report.scores, tau);
  for (std::size_t i = 0; i < report.ids.size(); ++i) {
    if (report.scores[i] >= out.threshold) out.ids.push_back(report.ids[i]);
  }
  return out;
}

SelectionMetrics evaluate_selection(const SuitabilityReport& report, double tau,
                                    const std::map<std::string, bool>& labels) {
  std::set<std::string_view> known(report.ids.begin(), report.ids.end());
  std::vector<std::string> unknown;
  for (const auto& [id, positive] : labels) {
    if (known.count(id) == 0) unknown.push_back(id);
  }
  if (!unknown.empty()) {
    std::string msg = "labels reference " + std::to_string(unknown.size()) + " unknown id(s):";
    for (std::size_t i = 0; i < unknown.size() && i < 5; ++i) msg += " " + unknown[i];
    throw UnknownIds(msg);
  }

  const double q = quantile_threshold(report.scores, tau);
  SelectionMetrics m;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < report.ids.size(); ++i) {
    bool predicted = report.scores[i] < q;
    auto it = labels.find(report.ids[i]);
    bool actual = it != labels.end() && it->second;
    positives += actual ? 1 : 0;
    if (predicted && actual) ++m.true_positives;
    if (predicted && !actual) ++m.false_positives;
    if (!predicted && actual) ++m.false_negatives;
  }
  std::size_t predicted = m.true_positives + m.false_positives;
  m.precision = predicted == 0 ? 0.0 : static_cast<double>(m.true_positives) / static_cast<double>(predicted);
  m.recall = positives == 0 ? 0.0 : static_cast<double>(m.true_positives) / static_cast<double>(positives);
  m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  if (positives == 0) m.warnings.push_back("label file has no positive samples; F1 reported as 0");
  if (predicted == 0) m.warnings.push_back("no samples fall below the threshold; precision reported as 0");
  return m;
}

}  // namespace varcat
