#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "varcat/selection.hpp"

namespace varcat {
namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

FeatureVector row(std::int64_t cc, std::int64_t nloc, std::int64_t tc, std::int64_t vc, std::int64_t dvc,
                  std::int64_t ec, std::int64_t dec) {
  FeatureVector f;
  f.cc = cc;
  f.nloc = nloc;
  f.tc = tc;
  f.vc = vc;
  f.dvc = dvc;
  f.ec = ec;
  f.dec = dec;
  return f;
}

TEST(Standardize, IdenticalRowsGiveZeros) {
  Eigen::MatrixXd x(3, 2);
  x << 4, 1, 4, 1, 4, 1;
  Standardized s = standardize(x);
  EXPECT_TRUE(s.z.isZero());
  EXPECT_EQ(s.std[0], 0.0);
}

TEST(Standardize, TwoValueColumnUsesSampleStd) {
  Eigen::MatrixXd x(2, 1);
  x << 1, 3;
  Standardized s = standardize(x);
  EXPECT_NEAR(s.std[0], std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.z(0, 0), -1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.z(1, 0), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Standardize, ThreeValueColumnByHand) {
  Eigen::MatrixXd x(3, 1);
  x << 0, 0, 10;
  Standardized s = standardize(x);
  const double mean = 10.0 / 3.0;
  const double sd = std::sqrt((2 * mean * mean + (10 - mean) * (10 - mean)) / 2.0);
  EXPECT_NEAR(s.mean[0], mean, 1e-12);
  EXPECT_NEAR(s.std[0], sd, 1e-12);
  EXPECT_NEAR(s.z(0, 0), -mean / sd, 1e-12);
  EXPECT_NEAR(s.z(2, 0), (10 - mean) / sd, 1e-12);
}

TEST(Standardize, MomentsAndDegenerateCorpus) {
  std::mt19937_64 rng(1);
  Standardized s = standardize(random_matrix(rng, 50, 4) * 3.0);
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(s.z.col(j).mean(), 0.0, 1e-9);
    EXPECT_NEAR(s.z.col(j).squaredNorm() / 49.0, 1.0, 1e-9);
  }
  EXPECT_THROW(standardize(Eigen::MatrixXd::Ones(1, 3)), DegenerateCorpus);
}

TEST(Covariance, MatchesDoubleLoop) {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd z = random_matrix(rng, 5, 3);
  Eigen::MatrixXd c = covariance(z);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double sum = 0;
      for (int i = 0; i < 5; ++i) sum += z(i, a) * z(i, b);
      EXPECT_NEAR(c(a, b), sum / 4.0, 1e-12);
      EXPECT_NEAR(c(a, b), c(b, a), 1e-12);
    }
  }
}

TEST(Covariance, IdenticalAndOrthogonalColumns) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 1, 2, 2, 3, 3, 4, 4;
  Eigen::MatrixXd c = covariance(standardize(x).z);
  EXPECT_NEAR(c(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(c(0, 0), 1.0, 1e-12);
  Eigen::MatrixXd o(4, 2);
  o << 1, 1, -1, 1, 1, -1, -1, -1;
  EXPECT_NEAR(covariance(o)(0, 1), 0.0, 1e-12);
}

TEST(PrincipalDirection, Diagonal) {
  Eigen::MatrixXd c(2, 2);
  c << 2, 0, 0, 1;
  EigenPair p = principal_direction(c);
  EXPECT_NEAR(p.value, 2.0, 1e-10);
  EXPECT_NEAR(p.vector[0], 1.0, 1e-10);
  EXPECT_NEAR(p.vector[1], 0.0, 1e-10);
}

TEST(PrincipalDirection, ClosedFormTwoByTwo) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    double a = trial == 0 ? 1.0 : u(rng), b = trial == 0 ? 0.5 : u(rng), d = trial == 0 ? 1.0 : u(rng);
    Eigen::MatrixXd c(2, 2);
    c << a, b, b, d;
    // Largest eigenvalue and its eigenvector of [[a, b], [b, d]].
    const double lambda = (a + d) / 2 + std::sqrt((a - d) * (a - d) / 4 + b * b);
    Eigen::Vector2d v = std::abs(b) > 1e-12 ? Eigen::Vector2d(b, lambda - a)
                                            : (a >= d ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1));
    v.normalize();
    if (v[0] < 0 || (std::abs(v[0]) < 1e-12 && v[1] < 0)) v = -v;
    if (std::abs(b) < 1e-12 && std::abs(a - d) < 1e-12) continue;  // repeated eigenvalue
    EigenPair p = principal_direction(c);
    EXPECT_NEAR(p.value, lambda, 1e-8);
    EXPECT_NEAR(p.vector[0], v[0], 1e-8) << a << " " << b << " " << d;
    EXPECT_NEAR(p.vector[1], v[1], 1e-8);
  }
  Eigen::MatrixXd c(2, 2);
  c << 1, 0.5, 0.5, 1;
  EigenPair p = principal_direction(c);
  EXPECT_NEAR(p.value, 1.5, 1e-10);
  EXPECT_NEAR(p.vector[0], 1 / std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(p.vector[1], 1 / std::sqrt(2.0), 1e-10);
}

TEST(PrincipalDirection, AgreesWithSelfAdjointSolver) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd a = random_matrix(rng, 7, 7);
    Eigen::MatrixXd c = (a + a.transpose()) / 2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
    EigenPair p = principal_direction(c, 1);
    EXPECT_NEAR(p.value, solver.eigenvalues().maxCoeff(), 1e-8);
    EXPECT_NEAR(p.vector.norm(), 1.0, 1e-9);
    EXPECT_LE((c * p.vector - p.value * p.vector).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_GE(p.vector[1], 0.0);
  }
}

TEST(PrincipalDirection, IdentityAndZero) {
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(7, 7);
  EigenPair p = principal_direction(id);
  EXPECT_NEAR(p.value, 1.0, 1e-12);
  EXPECT_LE((id * p.vector - p.vector).cwiseAbs().maxCoeff(), 1e-10);
  EigenPair z = principal_direction(Eigen::MatrixXd::Zero(3, 3));
  EXPECT_EQ(z.value, 0.0);
  EXPECT_NEAR(z.vector.norm(), 1.0, 1e-12);
}

TEST(Scores, SigmoidOfTwoStd) {
  // p = (-1, 0, 1): sample std 1, gamma 2
  Eigen::MatrixXd z(3, 1);
  z << -1, 0, 1;
  Eigen::VectorXd w(1);
  w << 1;
  double gamma = 0;
  std::vector<double> s = suitability_scores(z, w, &gamma);
  EXPECT_NEAR(gamma, 2.0, 1e-12);
  EXPECT_NEAR(s[2], 1 - sigmoid(0.5), 1e-12);
  EXPECT_NEAR(s[1], 0.5, 1e-12);
  // (2, -2, 0 x 7) has sample std 1, so the first row sits at +2 std
  Eigen::MatrixXd z2 = Eigen::MatrixXd::Zero(9, 1);
  z2(0, 0) = 2;
  z2(1, 0) = -2;
  EXPECT_NEAR(suitability_scores(z2, w)[0], 1 - sigmoid(1.0), 1e-12);
  EXPECT_NEAR(1 - sigmoid(1.0), 0.2689, 1e-4);
}

TEST(Scores, IdenticalCorpusScoresHalf) {
  std::vector<FeatureVector> rows(5, row(2, 5, 30, 2, 2, 10, 4));
  SuitabilityReport r = fit_suitability({"a", "b", "c", "d", "e"}, rows);
  for (double s : r.scores) EXPECT_EQ(s, 0.5);
}

// All features grow together, so the most complex sample scores lowest.
TEST(Scores, MostComplexSampleScoresLowest) {
  std::mt19937_64 rng(5);
  std::vector<FeatureVector> rows;
  std::vector<std::string> ids;
  for (int i = 0; i < 60; ++i) {
    std::int64_t k = static_cast<std::int64_t>(rng() % 40) + i;
    rows.push_back(row(1 + k / 5, 2 + k, 10 + 6 * k, 1 + k / 3, 1 + k / 4, 3 + 2 * k, 2 + k / 2));
    ids.push_back("s" + std::to_string(i));
  }
  SuitabilityReport r = fit_suitability(ids, rows);
  std::size_t most = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].nloc > rows[most].nloc) most = i;
  }
  EXPECT_EQ(*std::min_element(r.scores.begin(), r.scores.end()), r.scores[most]);
  for (double s : r.scores) {
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
  EXPECT_GE(r.model.w[1], 0.0);
  EXPECT_NEAR(r.model.w.norm(), 1.0, 1e-9);
}

// Closed-form d=2 reimplementation: standardize by hand, the top eigenvector
// of [[1, r], [r, 1]] is (1, sign r)/sqrt2, then the sigmoid score.
TEST(Scores, TwoFeatureClosedForm) {
  std::mt19937_64 rng(6);
  std::vector<FeatureVector> rows;
  std::vector<std::string> ids;
  for (int i = 0; i < 40; ++i) {
    FeatureVector f;
    f.nloc = static_cast<std::int64_t>(rng() % 50);
    f.tc = f.nloc * 3 + static_cast<std::int64_t>(rng() % 30);
    rows.push_back(f);
    ids.push_back(std::to_string(i));
  }
  SuitabilityReport r = fit_suitability(ids, rows, {"nloc", "tc"});
  const double n = 40;
  double m1 = 0, m2 = 0;
  for (const FeatureVector& f : rows) {
    m1 += f.nloc / n;
    m2 += f.tc / n;
  }
  double s1 = 0, s2 = 0, cov = 0;
  for (const FeatureVector& f : rows) {
    s1 += (f.nloc - m1) * (f.nloc - m1);
    s2 += (f.tc - m2) * (f.tc - m2);
    cov += (f.nloc - m1) * (f.tc - m2);
  }
  s1 = std::sqrt(s1 / (n - 1));
  s2 = std::sqrt(s2 / (n - 1));
  const double corr = cov / (n - 1) / (s1 * s2);
  const double w1 = 1 / std::sqrt(2.0), w2 = (corr >= 0 ? 1 : -1) / std::sqrt(2.0);
  std::vector<double> p;
  for (const FeatureVector& f : rows) p.push_back(w1 * (f.nloc - m1) / s1 + w2 * (f.tc - m2) / s2);
  double var = 0;
  for (double v : p) var += v * v / (n - 1);
  const double gamma = 2 * std::sqrt(var);
  EXPECT_NEAR(r.model.lambda_max, 1 + std::abs(corr), 1e-8);
  EXPECT_NEAR(r.model.gamma, gamma, 1e-8);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_NEAR(r.scores[i], 1 - sigmoid(p[i] / gamma), 1e-8);
}

TEST(Scores, AffineRescalingKeepsScores) {
  std::mt19937_64 rng(7);
  std::vector<FeatureVector> rows;
  std::vector<std::string> ids;
  for (int i = 0; i < 80; ++i) {
    rows.push_back(row(rng() % 9 + 1, rng() % 40 + 2, rng() % 300 + 5, rng() % 8 + 1, rng() % 6 + 1,
                       rng() % 90 + 1, rng() % 20 + 1));
    ids.push_back(std::to_string(i));
  }
  SuitabilityReport base = fit_suitability(ids, rows);
  std::vector<FeatureVector> scaled = rows;
  for (FeatureVector& f : scaled) {
    f.tc = 7 * f.tc + 100;
    f.nloc = 3 * f.nloc;
  }
  SuitabilityReport other = fit_suitability(ids, scaled);
  for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_NEAR(base.scores[i], other.scores[i], 1e-9);
  EXPECT_EQ(select_carriers(base, 0.35).ids, select_carriers(other, 0.35).ids);
}

TEST(Select, NearestRankQuantile) {
  SuitabilityReport r;
  for (int i = 0; i < 100; ++i) {
    r.ids.push_back(std::to_string(i));
    r.scores.push_back((i * 37 % 100) / 100.0 + 0.001);
  }
  EXPECT_EQ(select_carriers(r, 0.35).ids.size(), 65u);
  EXPECT_EQ(select_carriers(r, 0.0).ids.size(), 100u);
  EXPECT_DOUBLE_EQ(quantile_threshold(r.scores, 0.35), 0.351);
}

TEST(Select, TiesAtThresholdAreKept) {
  SuitabilityReport r;
  r.ids = {"a", "b", "c", "d"};
  r.scores = {0.2, 0.5, 0.5, 0.7};
  CarrierSet c = select_carriers(r, 0.25);
  EXPECT_EQ(c.ids, (std::vector<std::string>{"b", "c", "d"}));
  c = select_carriers(r, 0.5);
  EXPECT_EQ(c.ids, (std::vector<std::string>{"b", "c", "d"}));
}

TEST(Evaluate, PerfectAgreementAndEmptyPositives) {
  SuitabilityReport r;
  for (int i = 0; i < 20; ++i) {
    r.ids.push_back(std::to_string(i));
    r.scores.push_back(i / 20.0 + 0.01);
  }
  std::map<std::string, bool> labels;
  for (int i = 0; i < 20; ++i) labels[std::to_string(i)] = i < 7;  // bottom 35%
  SelectionMetrics m = evaluate_selection(r, 0.35, labels);
  EXPECT_DOUBLE_EQ(m.f1, 1.0);
  for (auto& [id, label] : labels) label = false;
  SelectionMetrics empty = evaluate_selection(r, 0.35, labels);
  EXPECT_EQ(empty.f1, 0.0);
  EXPECT_FALSE(empty.warnings.empty());
  EXPECT_THROW(evaluate_selection(r, 0.35, {{"missing", true}}), UnknownIds);
}

TEST(Evaluate, RandomLabelsMatchConfusionCounts) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SuitabilityReport r;
  std::map<std::string, bool> labels;
  for (int i = 0; i < 1000; ++i) {
    r.ids.push_back("s" + std::to_string(i));
    r.scores.push_back(u(rng));
    labels[r.ids.back()] = u(rng) < 0.3;
  }
  const double q = quantile_threshold(r.scores, 0.35);
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < r.ids.size(); ++i) {
    bool predicted = r.scores[i] < q;
    bool actual = labels[r.ids[i]];
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  SelectionMetrics m = evaluate_selection(r, 0.35, labels);
  EXPECT_DOUBLE_EQ(m.precision, tp / (tp + fp));
  EXPECT_DOUBLE_EQ(m.recall, tp / (tp + fn));
  EXPECT_NEAR(m.f1, 2 * tp / (2 * tp + fp + fn), 1e-12);
}

}  // namespace
}  // namespace varcat
