#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cohere/dataset.hpp"
#include "cohere/spectral.hpp"

namespace cohere {

// C(a, b) = fraction of partitions placing buses a and b in the same cluster.
Eigen::MatrixXd coassociation(std::span<const Partition> partitions);

// Bus indices sorted by (cluster, index).
std::vector<std::size_t> cluster_order(const Partition& partition);

// Relabels `from` so that its clusters match `to` by greedy maximum overlap
// (largest overlap first, lowest labels on ties). Unmatched clusters take the
// next free labels.
Partition align_labels(const Partition& from, const Partition& to);

// Header "view,outage_bus,cluster_0,...,cluster_{k-1}"; one row per view with
// its clusters aligned to the consensus, then a "consensus" row.
std::string membership_table_csv(const Dataset& dataset, std::span<const Partition> view_partitions,
                                 const Partition& consensus);

struct OverlayStyle {
  int width = 720;
  int height = 360;
  std::size_t max_points = 600;  // per polyline
};

std::string overlay_svg(const ContingencyRecord& record, std::span<const std::size_t> members,
                        const std::string& title, const OverlayStyle& style = {});

std::string heatmap_svg(const Eigen::MatrixXd& matrix, std::span<const std::size_t> order,
                        const std::vector<std::string>& labels, const Partition& partition);

struct ReportFiles {
  std::vector<std::filesystem::path> overlays;
  std::filesystem::path heatmap;
  std::filesystem::path membership;
};

// overlay_<contingency>_region<r>.svg for every contingency and consensus
// cluster, coassociation.svg and membership.csv.
ReportFiles write_report(const std::filesystem::path& directory, const Dataset& dataset,
                         std::span<const Partition> view_partitions, const Partition& consensus);

}  // namespace cohere
