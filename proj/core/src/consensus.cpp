#include "cohere/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cohere/error.hpp"
#include "cohere/parallel.hpp"

namespace cohere {

namespace {

double view_trace(const SpectralEmbedding& u, const ViewMatrix& view) {
  return (u.basis.transpose() * view.values * u.basis).trace();
}

double per_view_term(const ConsensusState& state) {
  double total = 0.0;
  for (std::size_t i = 0; i < state.view_embeddings.size(); ++i)
    total += view_trace(state.view_embeddings[i], (*state.views)[i]);
  return total;
}

double consensus_trace(const ConsensusState& state) {
  const auto& u = state.consensus_embedding.basis;
  return (u.transpose() * state.consensus_laplacian * u).trace();
}

double max_projection_change(const SpectralEmbedding& a, const SpectralEmbedding& b) {
  return (a.basis * a.basis.transpose() - b.basis * b.basis.transpose()).cwiseAbs().maxCoeff();
}

SpectralEmbedding embed(const Eigen::MatrixXd& m, int k, std::optional<std::size_t> view) {
  SpectralEmbedding e = top_k_eigvecs(m, k);
  e.view = view;
  return e;
}

}  // namespace

Eigen::MatrixXd sum_of_projections(std::span<const SpectralEmbedding> embeddings) {
  if (embeddings.empty()) return {};
  const Eigen::Index n = embeddings.front().basis.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : embeddings) sum.noalias() += e.basis * e.basis.transpose();
  return 0.5 * (sum + sum.transpose());
}

ConsensusState init_consensus(std::shared_ptr<const std::vector<ViewMatrix>> views, int k,
                              std::optional<double> alpha_override, int threads) {
  if (!views || views->empty())
    throw Error(ErrorKind::invalid_argument, "consensus", "init_consensus: no views");
  const Eigen::Index n = views->front().size();
  for (std::size_t i = 0; i < views->size(); ++i) {
    const auto& v = (*views)[i];
    if (v.values.rows() != n || v.values.cols() != n) {
      throw Error(ErrorKind::invalid_argument, "consensus",
                  "init_consensus: view " + std::to_string(i) + " is " + std::to_string(v.values.rows()) +
                      "x" + std::to_string(v.values.cols()) + ", expected " + std::to_string(n) + "x" +
                      std::to_string(n));
    }
  }
  if (k < 1 || k > n) {
    throw Error(ErrorKind::invalid_argument, "consensus",
                "init_consensus: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  if (alpha_override && !(std::isfinite(*alpha_override) && *alpha_override >= 0.0))
    throw Error(ErrorKind::invalid_argument, "consensus", "alpha override must be finite and >= 0");

  ConsensusState s;
  s.views = std::move(views);
  s.k = k;
  s.view_embeddings.resize(s.views->size());
  parallel_for(s.views->size(), threads, [&](std::size_t i) {
    s.view_embeddings[i] = embed((*s.views)[i].values, k, i);
  });
  s.consensus_laplacian = sum_of_projections(s.view_embeddings);
  s.consensus_embedding = embed(s.consensus_laplacian, k, std::nullopt);
  if (alpha_override) {
    s.alpha = *alpha_override;
    s.alpha_fixed = true;
  } else {
    s.alpha = adaptive_alpha(s);
  }
  const double obj = objective(s);
  s.objective_history.push_back(obj);
  s.log.push_back({0, obj, obj, s.alpha, 0.0});
  return s;
}

ConsensusState init_consensus(std::vector<ViewMatrix> views, int k,
                              std::optional<double> alpha_override, int threads) {
  return init_consensus(std::make_shared<const std::vector<ViewMatrix>>(std::move(views)), k,
                        alpha_override, threads);
}

double adaptive_alpha(const ConsensusState& state) {
  const double numerator = per_view_term(state);
  const double denominator = static_cast<double>(state.view_count()) * consensus_trace(state);
  if (std::abs(denominator) < 1e-12 || std::abs(numerator) < 1e-12) return 1.0;
  return std::clamp(numerator / denominator, 1e-6, 1e6);
}

double objective(const ConsensusState& state, double alpha) {
  return per_view_term(state) + alpha * consensus_trace(state);
}

double objective(const ConsensusState& state) { return objective(state, state.alpha); }

ConsensusState update_step(const ConsensusState& state, int threads) {
  ConsensusState next = state;
  const int k = state.k;

  // Stage A: U_i fixed.
  next.consensus_laplacian = sum_of_projections(state.view_embeddings);
  next.consensus_embedding = embed(next.consensus_laplacian, k, std::nullopt);

  // Stage B: U* fixed; each view's block is maximized in closed form.
  const Eigen::MatrixXd pull =
      state.alpha * (next.consensus_embedding.basis * next.consensus_embedding.basis.transpose());
  parallel_for(state.view_count(), threads, [&](std::size_t i) {
    next.view_embeddings[i] = embed((*state.views)[i].values + pull, k, i);
  });
  next.consensus_laplacian = sum_of_projections(next.view_embeddings);

  IterationRecord record;
  record.iteration = state.iteration + 1;
  record.objective_fixed_alpha = objective(next, state.alpha);
  for (std::size_t i = 0; i < state.view_count(); ++i) {
    record.max_subspace_change =
        std::max(record.max_subspace_change,
                 max_projection_change(next.view_embeddings[i], state.view_embeddings[i]));
  }

  if (!next.alpha_fixed) next.alpha = adaptive_alpha(next);
  record.alpha = next.alpha;
  record.objective = objective(next);

  next.iteration = record.iteration;
  next.objective_history.push_back(record.objective);
  next.log.push_back(record);
  return next;
}

ConsensusResult run_consensus(std::shared_ptr<const std::vector<ViewMatrix>> views, int k,
                              const ConsensusOptions& options) {
  if (options.max_iterations < 0)
    throw Error(ErrorKind::invalid_argument, "consensus", "max_iterations must be >= 0");
  if (!(options.rel_tol >= 0.0))
    throw Error(ErrorKind::invalid_argument, "consensus", "rel_tol must be >= 0");

  ConsensusResult result;
  result.state = init_consensus(std::move(views), k, options.alpha_override, options.threads);
  for (int it = 0; it < options.max_iterations; ++it) {
    result.state = update_step(result.state, options.threads);
    result.iterations_used = result.state.iteration;
    const auto& h = result.state.objective_history;
    const double current = h.back();
    const double previous = h[h.size() - 2];
    if (std::abs(current - previous) / std::max(1.0, std::abs(current)) < options.rel_tol) {
      result.converged = true;
      break;
    }
  }
  result.partition = kmeans(result.state.consensus_embedding.basis, k, options.seed);
  return result;
}

ConsensusResult run_consensus(std::vector<ViewMatrix> views, int k, const ConsensusOptions& options) {
  return run_consensus(std::make_shared<const std::vector<ViewMatrix>>(std::move(views)), k, options);
}

Partition base_partition(const ViewMatrix& view, int k, std::uint64_t seed) {
  return kmeans(top_k_eigvecs(view.values, k).basis, k, seed);
}

}  // namespace cohere
