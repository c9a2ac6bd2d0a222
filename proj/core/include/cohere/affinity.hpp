#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cohere/dataset.hpp"

namespace cohere {

// How a correlation r in [-1, 1] becomes a non-negative affinity.
enum class Transform {
  clip_negative,  // max(r, 0)
  absolute,       // |r|
  shift_rescale,  // (1 + r) / 2
};

enum class ViewMode {
  unnormalized_laplacian,  // L = diag(d) - S
  normalized_adjacency,    // diag(d)^-1/2 S diag(d)^-1/2
};

std::string_view to_string(Transform t);
std::string_view to_string(ViewMode m);
Transform parse_transform(std::string_view text);
ViewMode parse_view_mode(std::string_view text);

double apply_transform(Transform t, double r);

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;  // a sequence had zero variance; r is defined as 0
};

PearsonResult pearson(std::span<const double> x, std::span<const double> y);

// Pairwise correlations of one record's traces, rows in bus order. Flat
// (zero-variance) traces have r = 0 with every bus and a zero diagonal entry;
// all other diagonal entries are 1.
struct CorrelationMatrix {
  Eigen::MatrixXd r;
  std::vector<std::size_t> flat_buses;
};

// Rows are the record's traces centered and scaled to unit norm (flat traces
// become zero rows); r = Z Z^T.
Eigen::MatrixXd standardized_traces(const ContingencyRecord& record);
CorrelationMatrix correlation_matrix(const ContingencyRecord& record);

struct SimilarityMatrix {
  Eigen::MatrixXd values;
  Transform transform = Transform::clip_negative;
  std::vector<std::string> bus_order;
  std::vector<std::size_t> flat_buses;  // buses whose pairs hit the zero-variance rule
};

SimilarityMatrix build_similarity(const ContingencyRecord& record, Transform transform);
SimilarityMatrix build_similarity(const CorrelationMatrix& correlation, Transform transform,
                                  std::vector<std::string> bus_order);

Eigen::VectorXd degree_vector(const SimilarityMatrix& similarity);

struct ViewMatrix {
  Eigen::MatrixXd values;
  ViewMode mode = ViewMode::normalized_adjacency;
  Eigen::VectorXd degree;
  std::vector<std::size_t> isolated_buses;  // d_j == 0

  Eigen::Index size() const noexcept { return values.rows(); }
};

ViewMatrix build_view(const SimilarityMatrix& similarity, ViewMode mode);

// Euclidean distance between buses in the space of per-contingency
// standardized traces, concatenated across contingencies:
//   d(a,b)^2 = sum_i (r_i(a,a) + r_i(b,b) - 2 r_i(a,b)).
Eigen::MatrixXd trace_distance_matrix(std::span<const CorrelationMatrix> correlations);

// Debug dumps: square matrix with bus labels, and a bus,value column.
std::string format_matrix_csv(const std::vector<std::string>& bus_order,
                              const Eigen::MatrixXd& matrix);
std::string format_vector_csv(const std::vector<std::string>& bus_order,
                              const Eigen::VectorXd& values, std::string_view column);

}  // namespace cohere
