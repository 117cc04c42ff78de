#include <cmath>

#include "varcat/selection.hpp"

namespace varcat {
namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void fix_sign(Eigen::VectorXd& v, std::size_t sign_index) {
  if (sign_index < static_cast<std::size_t>(v.size()) && std::abs(v[sign_index]) >= 1e-12) {
    if (v[sign_index] < 0) v = -v;
    return;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= 1e-12) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

// Starting vector from repeated squaring of the shifted matrix: after k
// squarings the dominant eigenspace is amplified by the 2^k-th power of the
// eigenvalue ratio, so close spectra still separate quickly.
Eigen::VectorXd squared_start(const Eigen::MatrixXd& shifted) {
  Eigen::MatrixXd m = shifted / max_abs(shifted);
  for (int k = 0; k < 64; ++k) {
    Eigen::MatrixXd next = m * m;
    double norm = max_abs(next);
    if (norm == 0.0 || !std::isfinite(norm)) break;
    next /= norm;
    double change = max_abs(next - m);
    m = std::move(next);
    if (change < 1e-15) break;
  }
  Eigen::Index best = 0;
  m.colwise().norm().maxCoeff(&best);
  Eigen::VectorXd v = m.col(best);
  double n = v.norm();
  if (n == 0.0 || !std::isfinite(n)) return Eigen::VectorXd::Ones(shifted.rows()).normalized();
  return v / n;
}

}  // namespace

EigenPair principal_direction(const Eigen::MatrixXd& c, std::size_t sign_index,
                              const PowerIterationOptions& options) {
  const Eigen::Index d = c.rows();
  if (d == 0 || c.cols() != d) throw ConvergenceError("principal_direction: matrix must be square and non-empty");
  if (!c.allFinite()) throw ConvergenceError("principal_direction: matrix has non-finite entries");

  const double scale = max_abs(c);
  EigenPair out;
  if (scale == 0.0) {
    out.vector = Eigen::VectorXd::Unit(d, sign_index < static_cast<std::size_t>(d) ? sign_index : 0);
    return out;
  }
  // Gershgorin shift makes every eigenvalue of B non-negative, so the
  // dominant eigenvalue of B is the largest algebraic eigenvalue of C.
  const double shift = c.cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::MatrixXd b = c + shift * Eigen::MatrixXd::Identity(d, d);
  const double tol = options.tolerance * std::max(1.0, scale);

  Eigen::VectorXd v = squared_start(b);
  for (int it = 0; it <= options.max_iterations; ++it) {
    Eigen::VectorXd cv = c * v;
    double lambda = v.dot(cv);
    double residual = (cv - lambda * v).cwiseAbs().maxCoeff();
    if (residual <= tol) {
      out.vector = v;
      out.value = lambda;
      out.iterations = it;
      fix_sign(out.vector, sign_index);
      return out;
    }
    Eigen::VectorXd next = b * v;
    double n = next.norm();
    if (n == 0.0 || !std::isfinite(n)) break;
    v = next / n;
  }
  throw ConvergenceError("power iteration did not reach the residual tolerance within " +
                         std::to_string(options.max_iterations) + " iterations");
}

EigenPair PrincipalDirection::direction(const Eigen::MatrixXd& z, std::size_t sign_index) const {
  return principal_direction(covariance(z), sign_index, options_);
}

}  // namespace varcat
