#include "cohere/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <lapacke.h>

#include "cohere/error.hpp"
#include "cohere/parallel.hpp"
#include "cohere/rng.hpp"

namespace cohere {

std::vector<std::size_t> Partition::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int l : labels) {
    if (l >= 0 && l < k) ++sizes[static_cast<std::size_t>(l)];
  }
  return sizes;
}

Partition canonicalize(Partition p) {
  std::map<int, int> rename;
  for (int& l : p.labels) {
    const auto [it, inserted] = rename.emplace(l, static_cast<int>(rename.size()));
    l = it->second;
  }
  p.k = static_cast<int>(rename.size());
  return p;
}

SpectralEmbedding top_k_eigvecs(const Eigen::MatrixXd& matrix, int k) {
  const Eigen::Index n = matrix.rows();
  if (matrix.cols() != n || n == 0)
    throw Error(ErrorKind::invalid_argument, "spectral", "top_k_eigvecs: matrix must be square and nonempty");
  if (k < 1 || k > n) {
    throw Error(ErrorKind::invalid_argument, "spectral",
                "top_k_eigvecs: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  if (!matrix.allFinite())
    throw Error(ErrorKind::numerical, "spectral", "top_k_eigvecs: matrix has non-finite entries");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  const double asymmetry = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (!(asymmetry <= 1e-9 * scale)) {
    throw Error(ErrorKind::invalid_argument, "spectral",
                "top_k_eigvecs: matrix not symmetric (max |M - M^T| = " + std::to_string(asymmetry) + ")");
  }

  Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  const double max_entry = sym.cwiseAbs().maxCoeff();

  // Only the k largest eigenpairs are computed (indices n-k+1..n, ascending).
  const auto ni = static_cast<lapack_int>(n);
  lapack_int found = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', ni, sym.data(), ni, 0.0, 0.0,
                                         ni - k + 1, ni, 0.0, &found, w.data(), z.data(), ni,
                                         support.data());
  if (info != 0 || found != k) {
    throw Error(ErrorKind::numerical, "spectral",
                "eigensolver did not converge (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                    ", max|entry|=" + std::to_string(max_entry) + ", info=" + std::to_string(info) + ")");
  }

  SpectralEmbedding out;
  out.k = k;
  out.basis.resize(n, k);
  out.eigenvalues.resize(k);
  for (int c = 0; c < k; ++c) {
    const Eigen::Index src = k - 1 - c;
    out.eigenvalues(c) = w(src);
    Eigen::VectorXd v = z.col(src);
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(pivot))) pivot = i;
    }
    if (v(pivot) < 0.0) v = -v;
    out.basis.col(c) = v;
  }
  return out;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& points) {
  Eigen::MatrixXd out = points;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

namespace {

// Squared distances are accumulated in a fixed order so results do not depend
// on vectorization choices between call sites.
double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                        Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double d = a(i, c) - b(j, c);
    s += d * d;
  }
  return s;
}

std::vector<int> assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids) {
  std::vector<int> labels(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = squared_distance(x, i, centroids, 0);
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const double d = squared_distance(x, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

Eigen::MatrixXd means(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k,
                      std::vector<std::size_t>& counts) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, x.cols());
  counts.assign(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    c.row(l) += x.row(i);
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int l = 0; l < k; ++l) {
    if (counts[static_cast<std::size_t>(l)] > 0)
      c.row(l) /= static_cast<double>(counts[static_cast<std::size_t>(l)]);
  }
  return c;
}

// Refills empty clusters with the point farthest from its own centroid, taken
// only from clusters that keep at least one member.
Eigen::MatrixXd repair_and_update(const Eigen::MatrixXd& x, std::vector<int>& labels, int k) {
  std::vector<std::size_t> counts;
  Eigen::MatrixXd c = means(x, labels, k, counts);
  for (int empty = 0; empty < k; ++empty) {
    if (counts[static_cast<std::size_t>(empty)] > 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(l)] < 2) continue;
      const double d = squared_distance(x, i, c, l);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) break;  // fewer points than clusters; excluded by precondition
    labels[static_cast<std::size_t>(far)] = empty;
    c = means(x, labels, k, counts);
  }
  return c;
}

Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(x, i, c, 0);

  for (int next = 1; next < k; ++next) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = d2[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        acc += w;
        pick = i;
        if (acc > target) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    c.row(next) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], squared_distance(x, i, c, next));
    }
  }
  return c;
}

}  // namespace

KMeansResult kmeans_detailed(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                             const KMeansOptions& options) {
  const Eigen::Index n = points.rows();
  if (k < 1 || n < k) {
    throw Error(ErrorKind::invalid_argument, "spectral",
                "kmeans: need N >= k >= 1 (N=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
  const Eigen::MatrixXd x = options.normalize_rows ? normalize_rows(points) : points;

  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(options.restarts, 1); ++restart) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(restart)));
    Eigen::MatrixXd centroids = seed_centroids(x, k, rng);
    std::vector<int> labels = assign(x, centroids);
    for (int it = 0; it < options.max_iterations; ++it) {
      centroids = repair_and_update(x, labels, k);
      std::vector<int> next = assign(x, centroids);
      if (next == labels) break;
      labels = std::move(next);
    }
    centroids = repair_and_update(x, labels, k);

    double wcss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      wcss += squared_distance(x, i, centroids, labels[static_cast<std::size_t>(i)]);
    if (wcss < best.wcss) {
      best.wcss = wcss;
      best.partition.labels = std::move(labels);
    }
  }
  best.partition.seed = seed;
  best.partition = canonicalize(std::move(best.partition));
  return best;
}

Partition kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                 const KMeansOptions& options) {
  return kmeans_detailed(points, k, seed, options).partition;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      d(i, j) = std::sqrt(squared_distance(points, i, points, j));
      d(j, i) = d(i, j);
    }
  }
  return d;
}

std::vector<double> silhouette_samples(const Eigen::MatrixXd& distances,
                                       const Partition& partition) {
  const auto n = partition.labels.size();
  if (static_cast<std::size_t>(distances.rows()) != n || distances.cols() != distances.rows())
    throw Error(ErrorKind::invalid_argument, "spectral", "silhouette: distance matrix size mismatch");
  if (n < 3) throw Error(ErrorKind::invalid_argument, "spectral", "silhouette: need N >= 3");

  const Partition p = canonicalize(partition);
  if (p.k < 2)
    throw Error(ErrorKind::invalid_argument, "spectral", "silhouette: need at least 2 clusters");
  const auto sizes = p.cluster_sizes();

  std::vector<double> s(n, 0.0);
  std::vector<double> sums(static_cast<std::size_t>(p.k));
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(p.labels[i]);
    if (sizes[own] < 2) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i)
        sums[static_cast<std::size_t>(p.labels[j])] +=
            distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return s;
}

double silhouette_from_distances(const Eigen::MatrixXd& distances, const Partition& partition) {
  const auto s = silhouette_samples(distances, partition);
  double total = 0.0;
  for (double v : s) total += v;
  return total / static_cast<double>(s.size());
}

double silhouette(const Eigen::MatrixXd& points, const Partition& partition) {
  return silhouette_from_distances(pairwise_distances(points), partition);
}

KSelection select_k(const Eigen::MatrixXd& distances, int k_min, int k_max,
                    const std::function<Partition(int)>& labeler, int threads) {
  const auto n = static_cast<int>(distances.rows());
  if (k_min < 2 || k_min > k_max || k_max > n - 1) {
    throw Error(ErrorKind::invalid_argument, "spectral",
                "select_k: need 2 <= k_min <= k_max <= N-1 (got " + std::to_string(k_min) + ".." +
                    std::to_string(k_max) + ", N=" + std::to_string(n) + ")");
  }
  KSelection out;
  out.table.resize(static_cast<std::size_t>(k_max - k_min + 1));
  parallel_for(out.table.size(), threads, [&](std::size_t i) {
    const int k = k_min + static_cast<int>(i);
    const Partition p = labeler(k);
    out.table[i] = {k, silhouette_from_distances(distances, p)};
  });
  out.k = out.table.front().k;
  double best = out.table.front().silhouette;
  for (const auto& row : out.table) {
    if (row.silhouette > best) {
      best = row.silhouette;
      out.k = row.k;
    }
  }
  return out;
}

KSelection select_k(const Eigen::MatrixXd& points, int k_min, int k_max, std::uint64_t seed,
                    int threads) {
  const Eigen::MatrixXd normalized = normalize_rows(points);
  const Eigen::MatrixXd distances = pairwise_distances(normalized);
  return select_k(distances, k_min, k_max,
                  [&](int k) { return kmeans(normalized, k, seed, {.normalize_rows = false}); },
                  threads);
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::invalid_argument, "spectral",
                "adjusted_rand_index: length mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  const auto n = a.size();
  if (n < 2) return 1.0;

  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double m) { return 0.5 * m * (m - 1.0); };
  double index = 0.0;
  for (const auto& [key, count] : table) index += pairs(count);
  double sum_rows = 0.0;
  for (const auto& [key, count] : rows) sum_rows += pairs(count);
  double sum_cols = 0.0;
  for (const auto& [key, count] : cols) sum_cols += pairs(count);

  const double expected = sum_rows * sum_cols / pairs(static_cast<double>(n));
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) {
    // Both partitions trivial (one cluster, or all singletons).
    return table.size() == rows.size() && table.size() == cols.size() ? 1.0 : 0.0;
  }
  return (index - expected) / (maximum - expected);
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  return adjusted_rand_index(a.labels, b.labels);
}

}  // namespace cohere
