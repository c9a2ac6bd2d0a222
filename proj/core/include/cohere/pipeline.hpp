#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cohere/affinity.hpp"
#include "cohere/config.hpp"
#include "cohere/consensus.hpp"
#include "cohere/dataset.hpp"
#include "cohere/spectral.hpp"

namespace cohere {

struct ViewSet {
  std::vector<CorrelationMatrix> correlations;
  std::vector<SimilarityMatrix> similarities;
  std::shared_ptr<const std::vector<ViewMatrix>> views;
  Eigen::MatrixXd distances;  // trace-correlation distance between buses
};

ViewSet build_views(const Dataset& dataset, Transform transform, ViewMode mode, int threads);

struct ClusterOutcome {
  ViewSet views;
  bool swept = false;
  std::vector<KScore> silhouette_table;
  int k = 0;
  ConsensusResult consensus;
  std::vector<Partition> view_partitions;  // base partition of each view at k
};

struct ClusterSettings {
  Transform transform = Transform::clip_negative;
  ViewMode view_mode = ViewMode::normalized_adjacency;
  std::optional<int> k;
  std::optional<KRange> k_range;  // neither: 2..min(15, N-1)
  std::optional<double> alpha;
  int max_iter = 50;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  int threads = 1;
};

ClusterSettings cluster_settings(const RunConfig& config);

ClusterOutcome cluster_dataset(const Dataset& dataset, const ClusterSettings& settings);

// Loads the manifest or simulates the grid spec in memory.
Dataset load_input(const RunConfig& config, std::optional<Partition>* truth = nullptr);

std::string format_partition_csv(const std::vector<std::string>& bus_order, const Partition& partition);
// Reads "bus,cluster" rows and reorders them to bus_order. Throws Error{io}
// when the file is missing and DataError on content problems.
Partition read_partition_csv(const std::filesystem::path& path, const std::vector<std::string>& bus_order);

// Command entry points. Progress goes to `out`.
void cmd_simulate(const RunConfig& config, std::ostream& out);
void cmd_cluster(const RunConfig& config, std::ostream& out);
void cmd_report(const RunConfig& config, std::ostream& out);

}  // namespace cohere
