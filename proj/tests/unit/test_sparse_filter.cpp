#include "sfgnn/error.hpp"
#include "sfgnn/numerics.hpp"
#include "sfgnn/signal_source.hpp"
#include "sfgnn/sparse_filter.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

namespace sfgnn {
namespace {

using testing::random_matrix;

// Naive reimplementation: soft-absolute responses, row then column L2
// normalization, L1 sum.
Matrix naive_features(const Matrix& W, const Matrix& X, double eps) {
  Matrix F(W.cols(), X.cols());
  for (Eigen::Index i = 0; i < W.cols(); ++i) {
    for (Eigen::Index d = 0; d < X.cols(); ++d) {
      double dot = 0.0;
      for (Eigen::Index n = 0; n < W.rows(); ++n) dot += W(n, i) * X(n, d);
      F(i, d) = std::sqrt(dot * dot + eps);
    }
  }
  return F;
}

double naive_objective(const Matrix& W, const Matrix& X, double eps) {
  Matrix F = naive_features(W, X, eps);
  for (Eigen::Index i = 0; i < F.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < F.cols(); ++d) s += F(i, d) * F(i, d);
    for (Eigen::Index d = 0; d < F.cols(); ++d) F(i, d) /= std::sqrt(s);
  }
  double total = 0.0;
  for (Eigen::Index d = 0; d < F.cols(); ++d) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < F.rows(); ++i) s += F(i, d) * F(i, d);
    for (Eigen::Index i = 0; i < F.rows(); ++i) total += std::abs(F(i, d) / std::sqrt(s));
  }
  return total;
}

SparseFilterModel model_of(Matrix w) {
  SparseFilterModel m;
  m.weights = std::move(w);
  return m;
}

TEST(SparseFilterForward, ZeroWeightsGiveSqrtEpsilon) {
  Rng rng(1);
  const auto F = forward(model_of(Matrix::Zero(4, 3)), random_matrix(4, 5, rng));
  EXPECT_TRUE((F.values.array() - 1e-4).abs().maxCoeff() < 1e-18);
  EXPECT_EQ(F.stage, FeatureStage::kRaw);
}

TEST(SparseFilterForward, ScalarProduct) {
  auto m = model_of(Matrix::Constant(1, 1, 2.0));
  m.epsilon = 1e-300;
  EXPECT_NEAR(forward(m, Matrix::Constant(1, 1, 3.0)).values(0, 0), 6.0, 1e-12);
}

TEST(SparseFilterForward, MatchesNaiveLoop) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix W = random_matrix(4, 3, rng), X = random_matrix(4, 5, rng);
    const auto F = forward(model_of(W), X);
    EXPECT_LT((F.values - naive_features(W, X, kSoftAbsEpsilon)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Normalize, RowExample) {
  FeatureMatrix F{Matrix(1, 2), FeatureStage::kRaw};
  F.values << 3, 4;
  const auto R = normalize_rows(F);
  EXPECT_NEAR(R.values(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(R.values(0, 1), 0.8, 1e-15);
  EXPECT_EQ(R.stage, FeatureStage::kRowNormalized);
  const auto again = normalize_rows(FeatureMatrix{R.values, FeatureStage::kRaw});
  EXPECT_LT((again.values - R.values).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Normalize, ColumnExample) {
  FeatureMatrix F{Matrix::Ones(2, 1), FeatureStage::kRowNormalized};
  const auto C = normalize_cols(F);
  EXPECT_NEAR(C.values(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(C.values.col(0).norm(), 1.0, 1e-12);
  EXPECT_EQ(C.stage, FeatureStage::kFullyNormalized);
}

TEST(Normalize, RandomPositiveMatricesHaveUnitNorms) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix M = random_matrix(5, 7, rng).cwiseAbs().array() + 0.01;
    const auto R = normalize_rows(FeatureMatrix{M, FeatureStage::kRaw});
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(R.values.row(i).norm(), 1.0, 1e-12);
    const auto C = normalize_cols(FeatureMatrix{M, FeatureStage::kRowNormalized});
    for (Eigen::Index d = 0; d < 7; ++d) EXPECT_NEAR(C.values.col(d).norm(), 1.0, 1e-12);
  }
}

TEST(Objective, SingleFeatureEqualsExampleCount) {
  Rng rng(4);
  const Matrix X = random_matrix(6, 9, rng);
  EXPECT_NEAR(objective(model_of(random_matrix(6, 1, rng)), X), 9.0, 1e-12);
}

TEST(Objective, BoundedByDAndDRootP) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto p = 1 + static_cast<Eigen::Index>(rng.below(6));
    const auto n = 1 + static_cast<Eigen::Index>(rng.below(8));
    const auto d = 2 + static_cast<Eigen::Index>(rng.below(10));
    const double j = objective(model_of(random_matrix(n, p, rng)), random_matrix(n, d, rng));
    EXPECT_GE(j, static_cast<double>(d) - 1e-9);
    EXPECT_LE(j, static_cast<double>(d) * std::sqrt(static_cast<double>(p)) + 1e-9);
  }
}

TEST(Objective, MatchesNaivePipeline) {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const Matrix W = random_matrix(4, 3, rng), X = random_matrix(4, 5, rng);
    EXPECT_NEAR(objective(model_of(W), X), naive_objective(W, X, kSoftAbsEpsilon), 1e-12);
  }
}

TEST(ObjectiveGrad, MatchesFiniteDifferences) {
  Rng rng(7);
  for (int t = 0; t < 5; ++t) {
    const Matrix X = random_matrix(6, 8, rng);
    ParameterSet p;
    p.add("weights", random_matrix(6, 4, rng));
    ParameterSet g = p.zeros_like();
    g[0] = objective_grad(model_of(p[0]), X);
    const auto r = grad_check([&](const ParameterSet& q) { return objective(model_of(q[0]), X); }, p, g);
    EXPECT_LT(r.max_relative_error, 1e-4);
  }
}

TEST(ObjectiveGrad, SignFlippedFilterNegatesGradient) {
  Rng rng(8);
  const Matrix X = random_matrix(5, 6, rng);
  Matrix W = random_matrix(5, 3, rng);
  const Matrix g = objective_grad(model_of(W), X);
  W.col(1) *= -1.0;
  const Matrix g2 = objective_grad(model_of(W), X);
  EXPECT_LT((g2.col(1) + g.col(1)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((g2.col(0) - g.col(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ObjectiveGrad, ZeroDataGivesZeroGradient) {
  Rng rng(9);
  EXPECT_TRUE(objective_grad(model_of(random_matrix(4, 3, rng)), Matrix::Zero(4, 5)).isZero(0.0));
}

TEST(ObjectiveGrad, AgreesWithCombinedCall) {
  Rng rng(10);
  const auto m = model_of(random_matrix(4, 3, rng));
  const Matrix X = random_matrix(4, 6, rng);
  const auto og = objective_and_grad(m, X);
  EXPECT_EQ(og.value, objective(m, X));
  EXPECT_LT((og.grad - objective_grad(m, X)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TrainSparseFilter, ZeroIterationsReturnsInitialization) {
  Rng rng(11);
  const Matrix X = random_matrix(8, 12, rng);
  const auto m = train_sparse_filter(X, 4, 0, 21);
  EXPECT_EQ(m.weights, glorot_init(8, 4, 21));
}

TEST(TrainSparseFilter, NeverWorseThanInitializationAndDeterministic) {
  Rng rng(12);
  const Matrix X = random_matrix(10, 30, rng);
  std::vector<double> replay;
  SparseFilterOptions o;
  o.lr = 0.01;
  o.on_iteration = [&](std::size_t, double, const Matrix& w) { replay.push_back(objective(model_of(w), X)); };
  SparseFilterTrace trace;
  const auto a = train_sparse_filter(X, 5, 200, 3, o, &trace);
  ASSERT_FALSE(trace.objective.empty());
  ASSERT_EQ(replay.size(), trace.objective.size());
  for (std::size_t i = 0; i < replay.size(); ++i) EXPECT_NEAR(replay[i], trace.objective[i], 1e-12);
  EXPECT_LE(trace.objective.back(), trace.objective.front());
  EXPECT_LE(objective(a, X), trace.objective.front());
  EXPECT_EQ(a.weights, train_sparse_filter(X, 5, 200, 3, o).weights);
}

TEST(TrainSparseFilter, RejectsDegenerateInput) {
  EXPECT_THROW(train_sparse_filter(Matrix::Ones(3, 1), 2, 5, 1), Error);
  EXPECT_THROW(train_sparse_filter(Matrix::Ones(3, 4), 0, 5, 1), Error);
}

TEST(ExtractFeatures, UnitNormAndDuplicates) {
  auto set = generate_healthy(2, 6, 64, 40000.0, "AN3");
  set.segments.push_back(set.segments[0]);
  Rng rng(13);
  const auto m = model_of(random_matrix(64, 5, rng));
  const auto f = extract_features(m, set);
  const auto& v = f.at("AN3");
  ASSERT_EQ(v.size(), 7u);
  for (const auto& x : v) EXPECT_NEAR(x.norm(), 1.0, 1e-9);
  EXPECT_LT((v[0] - v[6]).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ExtractFeatures, SingleFeatureIsOne) {
  const auto set = generate_healthy(2, 1, 64, 40000.0, "AN3");
  Rng rng(14);
  const auto f = extract_features(model_of(random_matrix(64, 1, rng)), set);
  EXPECT_NEAR(f.at("AN3")[0](0), 1.0, 1e-12);
}

TEST(SparsityStats, DispersalIsOneOverP) {
  Rng rng(15);
  const Matrix W = random_matrix(6, 4, rng), X = random_matrix(6, 9, rng);
  const auto F = normalize_cols(normalize_rows(forward(model_of(W), X)));
  const auto s = sparsity_stats(F);
  for (Eigen::Index d = 0; d < 9; ++d) EXPECT_NEAR(s.dispersal(d), 0.25, 1e-12);
  EXPECT_NEAR(s.population.sum(), naive_objective(W, X, kSoftAbsEpsilon), 1e-12);
}

TEST(SparseFilterModelFile, RoundTrip) {
  Rng rng(16);
  auto m = model_of(random_matrix(7, 3, rng));
  m.seed = 99;
  const auto path = std::filesystem::temp_directory_path() / "sfgnn_unit_sf.bin";
  save_model(path, m);
  const auto back = load_model(path);
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.epsilon, m.epsilon);
}

}  // namespace
}  // namespace sfgnn
