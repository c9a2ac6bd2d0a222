#include <gtest/gtest.h>

#include "cohere/affinity.hpp"
#include "cohere/error.hpp"
#include "fixtures.hpp"

using namespace cohere;

namespace {

double p(std::vector<double> x, std::vector<double> y) { return pearson(x, y).r; }

}  // namespace

TEST(Pearson, HandValues) {
  EXPECT_DOUBLE_EQ(p({1, 2, 3}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(p({1, 2, 3}, {3, 2, 1}), -1.0);
  EXPECT_NEAR(p({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-15);
}

TEST(Pearson, ZeroVarianceIsDegenerate) {
  const std::vector<double> x{5, 5, 5}, y{1, 2, 3};
  const auto r = pearson(x, y);
  EXPECT_EQ(r.r, 0.0);
  EXPECT_TRUE(r.degenerate);
}

TEST(Pearson, PreconditionErrors) {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, one{1};
  EXPECT_THROW(pearson(a, b), Error);
  EXPECT_THROW(pearson(one, one), Error);
}

TEST(Pearson, AffineInvarianceAndSymmetry) {
  cohere::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(50), y(50), ax(50), nx(50);
    for (std::size_t i = 0; i < 50; ++i) x[i] = oracle::gaussian(rng), y[i] = x[i] + oracle::gaussian(rng);
    const double a = rng.uniform(0.1, 10), b = rng.uniform(-100, 100);
    for (std::size_t i = 0; i < 50; ++i) ax[i] = a * x[i] + b, nx[i] = -a * x[i] + b;
    const double r = pearson(x, y).r;
    EXPECT_NEAR(pearson(ax, y).r, r, 1e-12);
    EXPECT_NEAR(pearson(nx, y).r, -r, 1e-12);
    EXPECT_EQ(pearson(y, x).r, r);
    EXPECT_NEAR(r, oracle::pearson(x, y), 1e-12);
  }
}

TEST(Transform, Definitions) {
  EXPECT_EQ(apply_transform(Transform::clip_negative, -0.4), 0.0);
  EXPECT_DOUBLE_EQ(apply_transform(Transform::absolute, -0.4), 0.4);
  EXPECT_DOUBLE_EQ(apply_transform(Transform::shift_rescale, -0.4), 0.3);
  EXPECT_EQ(parse_transform(to_string(Transform::shift_rescale)), Transform::shift_rescale);
  EXPECT_EQ(parse_view_mode(to_string(ViewMode::unnormalized_laplacian)), ViewMode::unnormalized_laplacian);
  EXPECT_THROW(parse_transform("square"), Error);
}

TEST(Similarity, IdenticalTraces) {
  Eigen::MatrixXd rows(3, 5);
  rows << 1, 2, 3, 2, 1, 1, 2, 3, 2, 1, 1, 2, 3, 2, 1;
  const auto s = build_similarity(fixture::record_from_rows(rows), Transform::clip_negative);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(s.values(i, j), i == j ? 0.0 : 1.0, 1e-15);
}

TEST(Similarity, MatchesDoubleLoopOracle) {
  cohere::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 3 + trial % 4;
    const Eigen::MatrixXd rows = oracle::gaussian_matrix(n, 40, rng);
    const auto rec = fixture::record_from_rows(rows);
    for (Transform t : {Transform::clip_negative, Transform::absolute, Transform::shift_rescale}) {
      const auto s = build_similarity(rec, t);
      for (Eigen::Index i = 0; i < n; ++i) {
        EXPECT_EQ(s.values(i, i), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
          if (i == j) continue;
          EXPECT_EQ(s.values(i, j), s.values(j, i));
          const double r = oracle::pearson(rec.traces[static_cast<std::size_t>(i)].samples,
                                           rec.traces[static_cast<std::size_t>(j)].samples);
          const double want = t == Transform::clip_negative ? std::max(r, 0.0)
                              : t == Transform::absolute    ? std::abs(r)
                                                            : (1 + r) / 2;
          EXPECT_NEAR(s.values(i, j), want, 1e-12);
          EXPECT_GE(s.values(i, j), 0.0);
          EXPECT_LE(s.values(i, j), 1.0);
        }
      }
    }
  }
}

TEST(Similarity, FlatTraceFlagged) {
  Eigen::MatrixXd rows(3, 4);
  rows << 60, 60, 60, 60, 1, 2, 3, 4, 2, 1, 4, 3;
  const auto s = build_similarity(fixture::record_from_rows(rows), Transform::shift_rescale);
  EXPECT_EQ(s.flat_buses, std::vector<std::size_t>{0});
  EXPECT_DOUBLE_EQ(s.values(0, 1), 0.5);  // r = 0 by convention
}

TEST(Similarity, PositiveAffineRescaleInvariant) {
  cohere::Rng rng(13);
  const Eigen::MatrixXd rows = oracle::gaussian_matrix(5, 30, rng);
  Eigen::MatrixXd scaled = rows;
  for (Eigen::Index i = 0; i < 5; ++i) scaled.row(i) = rows.row(i) * (1.0 + i) + Eigen::RowVectorXd::Constant(30, 60.0 - i);
  const auto a = build_similarity(fixture::record_from_rows(rows), Transform::clip_negative);
  const auto b = build_similarity(fixture::record_from_rows(scaled), Transform::clip_negative);
  EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Degree, HandAndOracle) {
  SimilarityMatrix s;
  s.values = Eigen::MatrixXd{{0, 0.5}, {0.5, 0}};
  EXPECT_EQ(degree_vector(s), Eigen::VectorXd::Constant(2, 0.5));
  s.values = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_EQ(degree_vector(s), Eigen::VectorXd::Zero(3));

  cohere::Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = fixture::random_similarity(5, rng);
    const Eigen::VectorXd d = degree_vector(r);
    for (Eigen::Index j = 0; j < 5; ++j) {
      long double want = 0;
      for (Eigen::Index k = 0; k < 5; ++k)
        if (k != j) want += r.values(j, k);
      EXPECT_NEAR(d(j), static_cast<double>(want), 1e-14);
    }
  }
}

TEST(View, TwoBusHandExamples) {
  SimilarityMatrix s;
  s.values = Eigen::MatrixXd{{0, 0.5}, {0.5, 0}};
  const auto l = build_view(s, ViewMode::unnormalized_laplacian);
  EXPECT_EQ(l.values, (Eigen::MatrixXd{{0.5, -0.5}, {-0.5, 0.5}}));
  const auto a = build_view(s, ViewMode::normalized_adjacency);
  EXPECT_NEAR((a.values - Eigen::MatrixXd{{0, 1}, {1, 0}}).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(View, IsolatedBusConvention) {
  SimilarityMatrix s;
  s.values = Eigen::MatrixXd{{0, 0.5, 0}, {0.5, 0, 0}, {0, 0, 0}};
  const auto a = build_view(s, ViewMode::normalized_adjacency);
  EXPECT_EQ(a.isolated_buses, std::vector<std::size_t>{2});
  EXPECT_EQ(a.values.row(2).cwiseAbs().sum(), 0.0);
  EXPECT_TRUE(a.values.allFinite());
}

TEST(View, LaplacianRowSumsAndSpectra) {
  cohere::Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 11;
    const auto s = fixture::random_similarity(n, rng);
    const auto l = build_view(s, ViewMode::unnormalized_laplacian);
    EXPECT_LT((l.values * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((l.values - l.values.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(oracle::jacobi_eigen(l.values).values.minCoeff(), -1e-9);

    const auto a = build_view(s, ViewMode::normalized_adjacency);
    const auto e = oracle::jacobi_eigen(a.values).values;
    EXPECT_GE(e.minCoeff(), -1 - 1e-9);
    EXPECT_LE(e.maxCoeff(), 1 + 1e-9);
  }
}

TEST(View, PermutationEquivariance) {
  cohere::Rng rng(16);
  const Eigen::MatrixXd rows = oracle::gaussian_matrix(6, 25, rng);
  Eigen::VectorXi perm(6);
  perm << 3, 0, 5, 1, 4, 2;
  Eigen::MatrixXd permuted(6, 25);
  for (int i = 0; i < 6; ++i) permuted.row(i) = rows.row(perm(i));
  const auto a = build_view(build_similarity(fixture::record_from_rows(rows), Transform::clip_negative),
                            ViewMode::normalized_adjacency);
  const auto b = build_view(build_similarity(fixture::record_from_rows(permuted), Transform::clip_negative),
                            ViewMode::normalized_adjacency);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(b.degree(i), a.degree(perm(i)), 1e-12);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(b.values(i, j), a.values(perm(i), perm(j)), 1e-12);
  }
}

TEST(TraceDistance, MatchesConcatenatedStandardizedTraces) {
  cohere::Rng rng(17);
  const Eigen::MatrixXd r1 = oracle::gaussian_matrix(4, 20, rng), r2 = oracle::gaussian_matrix(4, 20, rng);
  const auto c1 = fixture::record_from_rows(r1), c2 = fixture::record_from_rows(r2);
  const std::vector<CorrelationMatrix> corr{correlation_matrix(c1), correlation_matrix(c2)};
  Eigen::MatrixXd z(4, 40);
  z << standardized_traces(c1), standardized_traces(c2);
  const Eigen::MatrixXd d = trace_distance_matrix(corr);
  EXPECT_LT((d - oracle::euclidean(z)).cwiseAbs().maxCoeff(), 1e-12);
}
