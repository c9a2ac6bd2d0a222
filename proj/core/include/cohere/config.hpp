#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cohere/affinity.hpp"
#include "cohere/gridsim.hpp"

namespace cohere {

struct KRange {
  int min = 2;
  int max = 2;
};

struct RunConfig {
  // Input: exactly one of manifest / grid.
  std::optional<std::filesystem::path> manifest;
  std::optional<GridSpec> grid;

  // Scenario generation (grid input only). An empty outage list means
  // plan_outages(outage_count).
  int outage_count = 4;
  double delta_p = 1.0;
  std::vector<OutageSpec> outages;
  double horizon = 20.0;
  double step = 0.01;

  Transform transform = Transform::clip_negative;
  ViewMode view_mode = ViewMode::normalized_adjacency;

  // At most one of k / k_range; neither means a sweep over 2..min(15, N-1).
  std::optional<int> k;
  std::optional<KRange> k_range;

  std::optional<double> alpha;
  int max_iter = 50;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: available parallelism
  std::filesystem::path output_dir = "out";
  bool dump_views = false;
};

// Parses a JSON document. Relative paths resolve against base_dir. Unknown
// keys and malformed values throw Error{config}.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

std::string config_to_json(const RunConfig& config);

enum class Command { simulate, cluster, report };

// Checks invariants that depend on the command. Throws Error{config}.
void validate_config(const RunConfig& config, Command command);

int resolved_threads(const RunConfig& config);

}  // namespace cohere
