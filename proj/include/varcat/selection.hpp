#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varcat/metrics.hpp"

namespace varcat {

struct Standardized {
  Eigen::MatrixXd z;     // N x d
  Eigen::VectorXd mean;  // d
  Eigen::VectorXd std;   // d, sample (N-1) std; 0 for constant columns
};

/// Column-wise z-scores. Constant columns map to 0. Throws DegenerateCorpus
/// for fewer than two rows.
Standardized standardize(const Eigen::MatrixXd& features);

/// C = Z^T Z / (N - 1).
Eigen::MatrixXd covariance(const Eigen::MatrixXd& z);

struct PowerIterationOptions {
  int max_iterations = 10000;
  double tolerance = 1e-10;  // on ||Cw - lambda w||_inf, relative to max(1, |C|)
};

struct EigenPair {
  Eigen::VectorXd vector;
  double value = 0.0;
  int iterations = 0;
};

/// Largest-eigenvalue eigenpair of a symmetric matrix. The sign is fixed so
/// that vector[sign_index] >= 0, falling back to the first component with
/// magnitude >= 1e-12. Throws ConvergenceError when the residual budget is
/// not met.
EigenPair principal_direction(const Eigen::MatrixXd& c, std::size_t sign_index = 0,
                              const PowerIterationOptions& options = {});

struct ProjectionModel {
  std::string method = "principal_direction";
  std::vector<std::string> features;
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  Eigen::VectorXd w;
  double lambda_max = 0.0;
  double gamma = 0.0;  // 0 when all projections coincide

  std::size_t dimension() const { return features.size(); }
};

/// Seam for alternative projections. Implementations return a unit direction
/// and its eigenvalue-like weight for the standardized matrix.
class Projection {
 public:
  virtual ~Projection() = default;
  virtual std::string name() const = 0;
  virtual EigenPair direction(const Eigen::MatrixXd& z, std::size_t sign_index) const = 0;
};

class PrincipalDirection final : public Projection {
 public:
  explicit PrincipalDirection(PowerIterationOptions options = {}) : options_(options) {}
  std::string name() const override { return "principal_direction"; }
  EigenPair direction(const Eigen::MatrixXd& z, std::size_t sign_index) const override;

 private:
  PowerIterationOptions options_;
};

/// s_i = 1 - sigmoid(p_i / gamma) with p = Z w and gamma = 2 std(p).
/// Every score is 0.5 when std(p) == 0. Scores lie strictly inside (0, 1).
std::vector<double> suitability_scores(const Eigen::MatrixXd& z, const Eigen::VectorXd& w,
                                       double* gamma_out = nullptr);

struct SuitabilityReport {
  std::vector<std::string> ids;
  std::vector<double> scores;
  ProjectionModel model;
};

/// Raw feature matrix (N x features.size()) of the named columns.
Eigen::MatrixXd feature_matrix(const std::vector<FeatureVector>& rows,
                               const std::vector<std::string>& features);

/// Fits the projection and scores every sample. `features` defaults to the
/// seven retained features.
SuitabilityReport fit_suitability(const std::vector<std::string>& ids,
                                  const std::vector<FeatureVector>& rows,
                                  std::vector<std::string> features = {},
                                  const Projection& projection = PrincipalDirection());

/// Lower nearest-rank quantile: sorted[floor(tau * N)].
double quantile_threshold(std::vector<double> scores, double tau);

struct CarrierSet {
  std::vector<std::string> ids;  // corpus order
  double threshold = 0.0;
};

/// Samples with score >= Q_tau. Requires 0 <= tau < 1.
CarrierSet select_carriers(const SuitabilityReport& report, double tau);

struct SelectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::vector<std::string> warnings;
};

/// Scores the filtered-out samples (score < Q_tau) as predicted positives
/// against externally supplied labels (id -> is_positive). Throws UnknownIds
/// when a label names a sample absent from the report.
SelectionMetrics evaluate_selection(const SuitabilityReport& report, double tau,
                                    const std::map<std::string, bool>& labels);

}  // namespace varcat
