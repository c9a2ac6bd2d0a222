#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cohere/affinity.hpp"
#include "cohere/spectral.hpp"

namespace cohere {

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;              // at the refreshed alpha
  double objective_fixed_alpha = 0.0;  // before the alpha refresh
  double alpha = 0.0;                  // alpha after the refresh
  double max_subspace_change = 0.0;    // max_i ||U_i U_i^T - previous||_max
};

// Snapshot of the alternating optimizer. Steps return new states; the view
// matrices are shared read-only between snapshots.
struct ConsensusState {
  std::shared_ptr<const std::vector<ViewMatrix>> views;
  std::vector<SpectralEmbedding> view_embeddings;  // U_1..U_m
  Eigen::MatrixXd consensus_laplacian;             // L* = sum_i U_i U_i^T
  SpectralEmbedding consensus_embedding;           // U*
  double alpha = 1.0;
  bool alpha_fixed = false;  // true when alpha was overridden by the caller
  std::vector<double> objective_history;
  std::vector<IterationRecord> log;
  int iteration = 0;
  int k = 0;

  std::size_t view_count() const noexcept { return view_embeddings.size(); }
};

struct ConsensusOptions {
  int max_iterations = 50;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  std::optional<double> alpha_override;
  int threads = 1;
};

struct ConsensusResult {
  Partition partition;
  ConsensusState state;
  bool converged = false;
  int iterations_used = 0;
};

Eigen::MatrixXd sum_of_projections(std::span<const SpectralEmbedding> embeddings);

ConsensusState init_consensus(std::shared_ptr<const std::vector<ViewMatrix>> views, int k,
                              std::optional<double> alpha_override = std::nullopt,
                              int threads = 1);
ConsensusState init_consensus(std::vector<ViewMatrix> views, int k,
                              std::optional<double> alpha_override = std::nullopt,
                              int threads = 1);

// sum_i tr(U_i^T L_i U_i) / (m tr(U*^T L* U*)), clamped to [1e-6, 1e6]; 1 when
// either trace sum is numerically zero.
double adaptive_alpha(const ConsensusState& state);

// sum_i tr(U_i^T L_i U_i) + alpha tr(U*^T L* U*).
double objective(const ConsensusState& state);
double objective(const ConsensusState& state, double alpha);

// Stage A: L* and U* from the current U_i. Stage B: each U_i becomes the top-k
// eigenbasis of L_i + alpha U* U*^T. Then alpha is refreshed (unless fixed)
// and the objective appended.
ConsensusState update_step(const ConsensusState& state, int threads = 1);

ConsensusResult run_consensus(std::shared_ptr<const std::vector<ViewMatrix>> views, int k,
                              const ConsensusOptions& options = {});
ConsensusResult run_consensus(std::vector<ViewMatrix> views, int k,
                              const ConsensusOptions& options = {});

// Single-view spectral clustering: k-means on the top-k eigenbasis of the view.
Partition base_partition(const ViewMatrix& view, int k, std::uint64_t seed);

}  // namespace cohere
