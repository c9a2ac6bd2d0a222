#include <gtest/gtest.h>

#include "cohere/consensus.hpp"
#include "cohere/error.hpp"
#include "fixtures.hpp"

using namespace cohere;

namespace {

ViewMatrix raw_view(Eigen::MatrixXd m) {
  ViewMatrix v;
  v.values = std::move(m);
  return v;
}

double projection_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a * a.transpose() - b * b.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Init, SingleViewConsensusSpansView) {
  cohere::Rng rng(41);
  const auto d = fixture::noisy_blocks(9, 1, 3, 40, rng);
  const auto s = init_consensus(fixture::views_of(d), 3);
  EXPECT_EQ(s.iteration, 0);
  ASSERT_EQ(s.objective_history.size(), 1u);
  EXPECT_LT(projection_gap(s.consensus_embedding.basis, s.view_embeddings[0].basis), 1e-8);
}

TEST(Init, TwoIdenticalViewsSpectrum) {
  cohere::Rng rng(42);
  const auto d = fixture::noisy_blocks(8, 1, 2, 40, rng);
  auto views = fixture::views_of(d);
  views.push_back(views[0]);
  for (int k = 1; k <= 3; ++k) {
    const auto s = init_consensus(views, k);
    const auto e = oracle::jacobi_eigen(s.consensus_laplacian).values;
    for (Eigen::Index i = 0; i < e.size(); ++i) EXPECT_NEAR(e(i), i >= e.size() - k ? 2.0 : 0.0, 1e-8);
  }
}

TEST(Init, ConsensusLaplacianMatchesDirectSum) {
  cohere::Rng rng(43);
  std::vector<ViewMatrix> views;
  for (int i = 0; i < 3; ++i) views.push_back(raw_view(oracle::random_symmetric(8, rng)));
  const auto s = init_consensus(views, 2);
  std::vector<Eigen::MatrixXd> us;
  for (const auto& e : s.view_embeddings) us.push_back(e.basis);
  EXPECT_LT((s.consensus_laplacian - oracle::projection_sum(us)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Init, Errors) {
  std::vector<ViewMatrix> views{raw_view(Eigen::MatrixXd::Identity(3, 3)), raw_view(Eigen::MatrixXd::Identity(4, 4))};
  EXPECT_THROW(init_consensus(views, 2), Error);
  views.pop_back();
  EXPECT_THROW(init_consensus(views, 0), Error);
  EXPECT_THROW(init_consensus(views, 4), Error);
  EXPECT_THROW(init_consensus(std::vector<ViewMatrix>{}, 1), Error);
}

TEST(Alpha, EqualTracesGiveOne) {
  // Block-diagonal normalized adjacency: top eigenvalues are exactly 1.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = a(1, 0) = a(2, 3) = a(3, 2) = 1.0;
  const auto s = init_consensus(std::vector<ViewMatrix>{raw_view(a)}, 2);
  EXPECT_NEAR(adaptive_alpha(s), 1.0, 1e-12);
}

TEST(Alpha, AllZeroViewsFallBackToOne) {
  const auto s = init_consensus(std::vector<ViewMatrix>(2, raw_view(Eigen::MatrixXd::Zero(5, 5))), 2);
  EXPECT_EQ(adaptive_alpha(s), 1.0);
  EXPECT_EQ(s.alpha, 1.0);
}

TEST(Alpha, MatchesTraceRatioOracle) {
  cohere::Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ViewMatrix> views;
    for (int i = 0; i < 3; ++i) views.push_back(raw_view(oracle::random_symmetric(7, rng) + 6 * Eigen::MatrixXd::Identity(7, 7)));
    const auto s = init_consensus(views, 2);
    double num = 0;
    for (int i = 0; i < 3; ++i) num += oracle::trace_form(s.view_embeddings[static_cast<std::size_t>(i)].basis, views[static_cast<std::size_t>(i)].values);
    const double den = 3 * oracle::trace_form(s.consensus_embedding.basis, s.consensus_laplacian);
    EXPECT_NEAR(adaptive_alpha(s), std::clamp(num / den, 1e-6, 1e6), 1e-12);
  }
}

TEST(Objective, IdentityViewIsTwoK) {
  for (int k = 1; k <= 3; ++k) {
    const auto s = init_consensus(std::vector<ViewMatrix>{raw_view(Eigen::MatrixXd::Identity(5, 5))}, k, 1.0);
    EXPECT_NEAR(objective(s), 2.0 * k, 1e-12);
  }
}

TEST(Objective, ZeroViewsAndOracle) {
  auto zero = init_consensus(std::vector<ViewMatrix>(2, raw_view(Eigen::MatrixXd::Zero(4, 4))), 2, 0.0);
  EXPECT_EQ(objective(zero), 0.0);

  cohere::Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ViewMatrix> views;
    for (int i = 0; i < 3; ++i) views.push_back(raw_view(oracle::random_symmetric(6, rng)));
    const auto s = update_step(init_consensus(views, 2));
    double want = 0;
    for (int i = 0; i < 3; ++i) want += oracle::trace_form(s.view_embeddings[static_cast<std::size_t>(i)].basis, views[static_cast<std::size_t>(i)].values);
    want += s.alpha * oracle::trace_form(s.consensus_embedding.basis, s.consensus_laplacian);
    EXPECT_NEAR(objective(s), want, 1e-10);
  }
}

TEST(Update, StationaryPoint) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = a(1, 0) = a(2, 3) = a(3, 2) = 1.0;
  const auto s0 = update_step(init_consensus(std::vector<ViewMatrix>{raw_view(a)}, 2));
  const auto s1 = update_step(s0);
  EXPECT_LT(std::abs(s1.objective_history.back() - s0.objective_history.back()), 1e-9);
  EXPECT_EQ(kmeans(s1.consensus_embedding.basis, 2, 1).labels, kmeans(s0.consensus_embedding.basis, 2, 1).labels);
}

TEST(Update, IdenticalViewsStayAligned) {
  cohere::Rng rng(46);
  const auto d = fixture::noisy_blocks(10, 1, 3, 30, rng);
  auto views = fixture::views_of(d);
  views.push_back(views[0]);
  for (int k = 1; k <= 4; ++k) {
    const auto s = update_step(init_consensus(views, k));
    EXPECT_LT(projection_gap(s.view_embeddings[0].basis, s.view_embeddings[1].basis), 1e-8);
  }
}

TEST(Update, StageBBeatsRandomCompetitors) {
  cohere::Rng rng(47);
  std::vector<ViewMatrix> views;
  for (int i = 0; i < 3; ++i) views.push_back(raw_view(oracle::random_symmetric(10, rng)));
  const auto s0 = init_consensus(views, 3);
  const auto s1 = update_step(s0);
  const Eigen::MatrixXd& ustar = s1.consensus_embedding.basis;
  auto block = [&](const Eigen::MatrixXd& u, const Eigen::MatrixXd& l) {
    return oracle::trace_form(u, l) + s0.alpha * (ustar.transpose() * u * u.transpose() * ustar).trace();
  };
  for (std::size_t i = 0; i < 3; ++i) {
    const double best = block(s1.view_embeddings[i].basis, views[i].values);
    for (int trial = 0; trial < 100; ++trial)
      EXPECT_GE(best, block(oracle::random_orthonormal(10, 3, rng), views[i].values) - 1e-9);
  }
}

TEST(Update, InvariantsHoldEveryIteration) {
  cohere::Rng rng(48);
  const auto d = fixture::noisy_blocks(12, 4, 3, 30, rng);
  auto s = init_consensus(fixture::views_of(d), 3);
  for (int it = 0; it < 10; ++it) {
    const double before = s.objective_history.back();
    const double alpha = s.alpha;
    s = update_step(s);
    EXPECT_GE(objective(s, alpha), before - 1e-9);
    EXPECT_EQ(s.log.back().objective_fixed_alpha, objective(s, alpha));
    std::vector<Eigen::MatrixXd> us;
    for (const auto& e : s.view_embeddings) {
      us.push_back(e.basis);
      EXPECT_LT((e.basis.transpose() * e.basis - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
    }
    EXPECT_LT((s.consensus_laplacian - oracle::projection_sum(us)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(s.consensus_laplacian.trace(), 4.0 * 3, 1e-8);
    const auto e = oracle::jacobi_eigen(s.consensus_laplacian).values;
    EXPECT_GE(e.minCoeff(), -1e-9);
    EXPECT_LE(e.maxCoeff(), 4 + 1e-9);
  }
}

TEST(Update, AlphaZeroDecouples) {
  cohere::Rng rng(49);
  const auto d = fixture::noisy_blocks(12, 3, 3, 30, rng);
  const auto r = run_consensus(fixture::views_of(d), 3, {.max_iterations = 5, .alpha_override = 0.0});
  const auto init = init_consensus(fixture::views_of(d), 3, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_LT(projection_gap(r.state.view_embeddings[i].basis, init.view_embeddings[i].basis), 1e-8);
  for (const auto& rec : r.state.log) EXPECT_LT(rec.max_subspace_change, 1e-8);
}

TEST(Run, SingleViewEqualsBasePartition) {
  cohere::Rng rng(50);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6 + rng.below(10);
    const int k = 2 + static_cast<int>(rng.below(3));
    const auto d = fixture::noisy_blocks(n, 1, k, 30, rng);
    const auto views = fixture::views_of(d);
    const std::uint64_t seed = rng.below(1000);
    const auto r = run_consensus(views, k, {.seed = seed});
    EXPECT_EQ(r.partition.labels, base_partition(views[0], k, seed).labels) << "trial " << trial;
    EXPECT_EQ(r.partition.k, r.state.k);
  }
}

TEST(Run, IdenticalViewsMatchSingleView) {
  cohere::Rng rng(51);
  const auto d = fixture::noisy_blocks(12, 1, 3, 40, rng);
  const auto one = fixture::views_of(d);
  const std::vector<ViewMatrix> four(4, one[0]);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(run_consensus(four, 3, {.seed = 2}).partition,
                                       run_consensus(one, 3, {.seed = 2}).partition),
                   1.0);
}

TEST(Run, PermutationEquivariance) {
  cohere::Rng rng(52);
  const auto d = fixture::noisy_blocks(12, 3, 3, 40, rng);
  const auto views = fixture::views_of(d);
  std::vector<Eigen::Index> perm{5, 2, 11, 0, 7, 3, 9, 1, 10, 4, 8, 6};
  std::vector<ViewMatrix> permuted;
  for (const auto& v : views) {
    ViewMatrix p = v;
    for (Eigen::Index i = 0; i < 12; ++i)
      for (Eigen::Index j = 0; j < 12; ++j) p.values(i, j) = v.values(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    permuted.push_back(std::move(p));
  }
  const auto a = run_consensus(views, 3, {.seed = 4}).partition;
  const auto b = run_consensus(permuted, 3, {.seed = 4}).partition;
  std::vector<int> mapped(12);
  for (std::size_t i = 0; i < 12; ++i) mapped[i] = a.labels[static_cast<std::size_t>(perm[i])];
  EXPECT_DOUBLE_EQ(adjusted_rand_index(mapped, b.labels), 1.0);
}

TEST(Run, ThreadCountIndependent) {
  cohere::Rng rng(53);
  const auto d = fixture::noisy_blocks(15, 4, 3, 30, rng);
  const auto a = run_consensus(fixture::views_of(d), 3, {.seed = 1, .threads = 1});
  const auto b = run_consensus(fixture::views_of(d), 3, {.seed = 1, .threads = 4});
  EXPECT_EQ(a.partition.labels, b.partition.labels);
  EXPECT_EQ(a.state.objective_history, b.state.objective_history);
}

TEST(Run, StoppingRule) {
  cohere::Rng rng(54);
  const auto d = fixture::noisy_blocks(12, 3, 3, 30, rng);
  const auto r = run_consensus(fixture::views_of(d), 3, {.max_iterations = 1, .rel_tol = 0.0});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations_used, 1);
  const auto c = run_consensus(fixture::views_of(d), 3);
  EXPECT_TRUE(c.converged);
  const auto& h = c.state.objective_history;
  EXPECT_LT(std::abs(h.back() - h[h.size() - 2]) / std::max(1.0, std::abs(h.back())), 1e-6);
}
