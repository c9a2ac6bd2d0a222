#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cohere {

// N x k orthonormal basis, columns ordered by descending eigenvalue.
struct SpectralEmbedding {
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;       // length k, descending
  std::optional<std::size_t> view;   // nullopt for the consensus embedding
  int k = 0;
};

// Cluster label per bus. Labels produced by this library are canonical: they
// are numbered 0..k-1 in order of first appearance along the bus order.
struct Partition {
  std::vector<int> labels;
  int k = 0;
  std::optional<double> silhouette;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::vector<std::size_t> cluster_sizes() const;
};

// Renumbers labels by first appearance; k becomes the number of distinct labels.
Partition canonicalize(Partition p);

// Top-k eigenvectors of a symmetric matrix (symmetrized first). Each column's
// largest-magnitude entry is made positive, lowest index winning ties.
SpectralEmbedding top_k_eigvecs(const Eigen::MatrixXd& matrix, int k);

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
  bool normalize_rows = true;  // zero rows stay zero
};

struct KMeansResult {
  Partition partition;
  double wcss = 0.0;  // within-cluster sum of squares in the clustered space
};

// Lloyd's algorithm with k-means++ seeding; the restart with the lowest WCSS
// wins (earliest on ties). Restart r of a run with k clusters draws from the
// stream derive_seed(seed, k, r).
KMeansResult kmeans_detailed(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                             const KMeansOptions& options = {});
Partition kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                 const KMeansOptions& options = {});

// Rows scaled to unit L2 norm; zero rows are left as zero.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& points);

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);

// Per-point silhouette. Singletons score 0; a point with a = b = 0 scores 0.
std::vector<double> silhouette_samples(const Eigen::MatrixXd& distances,
                                       const Partition& partition);
double silhouette_from_distances(const Eigen::MatrixXd& distances, const Partition& partition);
double silhouette(const Eigen::MatrixXd& points, const Partition& partition);

struct KScore {
  int k = 0;
  double silhouette = 0.0;
};

struct KSelection {
  int k = 0;
  std::vector<KScore> table;  // ascending k
};

// Scores labeler(k) for every k in [k_min, k_max] by silhouette on the given
// pairwise distances; returns the argmax (smallest k on ties). Labelers run
// concurrently on up to `threads` workers and must be thread-safe.
KSelection select_k(const Eigen::MatrixXd& distances, int k_min, int k_max,
                    const std::function<Partition(int)>& labeler, int threads = 1);

// Fixed-point-set form: kmeans(points, k, seed), scored on the row-normalized
// points k-means actually clusters.
KSelection select_k(const Eigen::MatrixXd& points, int k_min, int k_max, std::uint64_t seed,
                    int threads = 1);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);
double adjusted_rand_index(const Partition& a, const Partition& b);

}  // namespace cohere
