#include "cohere/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cohere/csv.hpp"
#include "cohere/error.hpp"

namespace cohere {

namespace {

struct Centered {
  std::vector<double> deviation;
  double sum_squares = 0.0;
  bool flat = false;
};

// Two-pass centering. A trace counts as flat when what is left after
// subtracting the mean is indistinguishable from rounding noise.
Centered center(std::span<const double> x) {
  Centered c;
  const auto n = static_cast<double>(x.size());
  double sum = 0.0;
  double scale = 0.0;
  for (double v : x) {
    sum += v;
    scale = std::max(scale, std::abs(v));
  }
  const double mean = sum / n;
  c.deviation.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    c.deviation[k] = x[k] - mean;
    c.sum_squares += c.deviation[k] * c.deviation[k];
  }
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * scale;
  c.flat = c.sum_squares <= n * noise * noise;
  return c;
}

}  // namespace

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::clip_negative: return "clip-negative";
    case Transform::absolute: return "absolute";
    case Transform::shift_rescale: return "shift-rescale";
  }
  return "?";
}

std::string_view to_string(ViewMode m) {
  switch (m) {
    case ViewMode::unnormalized_laplacian: return "unnormalized-laplacian";
    case ViewMode::normalized_adjacency: return "normalized-adjacency";
  }
  return "?";
}

Transform parse_transform(std::string_view text) {
  for (auto t : {Transform::clip_negative, Transform::absolute, Transform::shift_rescale})
    if (text == to_string(t)) return t;
  throw Error(ErrorKind::config, "affinity",
              "unknown transform '" + std::string(text) +
                  "' (expected clip-negative, absolute or shift-rescale)");
}

ViewMode parse_view_mode(std::string_view text) {
  for (auto m : {ViewMode::unnormalized_laplacian, ViewMode::normalized_adjacency})
    if (text == to_string(m)) return m;
  throw Error(ErrorKind::config, "affinity",
              "unknown view mode '" + std::string(text) +
                  "' (expected unnormalized-laplacian or normalized-adjacency)");
}

double apply_transform(Transform t, double r) {
  switch (t) {
    case Transform::clip_negative: return std::max(r, 0.0);
    case Transform::absolute: return std::abs(r);
    case Transform::shift_rescale: return 0.5 * (1.0 + r);
  }
  return r;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::invalid_argument, "affinity",
                "pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
  }
  if (x.size() < 2)
    throw Error(ErrorKind::invalid_argument, "affinity", "pearson: need at least 2 samples");

  const Centered cx = center(x);
  const Centered cy = center(y);
  if (cx.flat || cy.flat) return {0.0, true};

  double cross = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) cross += cx.deviation[k] * cy.deviation[k];
  const double r = cross / (std::sqrt(cx.sum_squares) * std::sqrt(cy.sum_squares));
  return {std::clamp(r, -1.0, 1.0), false};
}

Eigen::MatrixXd standardized_traces(const ContingencyRecord& record) {
  const auto n_bus = static_cast<Eigen::Index>(record.bus_count());
  const auto n = static_cast<Eigen::Index>(record.sample_count());
  if (n < 2) {
    throw Error(ErrorKind::invalid_argument, "affinity",
                "record '" + record.contingency_id + "' needs at least 2 samples");
  }
  Eigen::MatrixXd z(n_bus, n);
  for (Eigen::Index i = 0; i < n_bus; ++i) {
    const auto& samples = record.traces[static_cast<std::size_t>(i)].samples;
    if (static_cast<Eigen::Index>(samples.size()) != n) {
      throw Error(ErrorKind::invalid_argument, "affinity",
                  "record '" + record.contingency_id + "': ragged traces");
    }
    const Centered c = center(samples);
    if (c.flat) {
      z.row(i).setZero();
      continue;
    }
    const double inv = 1.0 / std::sqrt(c.sum_squares);
    for (Eigen::Index k = 0; k < n; ++k) z(i, k) = c.deviation[static_cast<std::size_t>(k)] * inv;
  }
  return z;
}

CorrelationMatrix correlation_matrix(const ContingencyRecord& record) {
  const Eigen::MatrixXd z = standardized_traces(record);
  const Eigen::Index n_bus = z.rows();

  CorrelationMatrix out;
  out.r.resize(n_bus, n_bus);
  out.r.setZero();
  out.r.selfadjointView<Eigen::Lower>().rankUpdate(z);
  // Mirror so (i,j) and (j,i) are the same computed value.
  for (Eigen::Index j = 0; j < n_bus; ++j) {
    for (Eigen::Index i = j + 1; i < n_bus; ++i) {
      out.r(i, j) = std::clamp(out.r(i, j), -1.0, 1.0);
      out.r(j, i) = out.r(i, j);
    }
  }
  for (Eigen::Index i = 0; i < n_bus; ++i) {
    if (z.row(i).squaredNorm() == 0.0) {
      out.flat_buses.push_back(static_cast<std::size_t>(i));
      out.r(i, i) = 0.0;
    } else {
      out.r(i, i) = 1.0;
    }
  }
  return out;
}

SimilarityMatrix build_similarity(const CorrelationMatrix& correlation, Transform transform,
                                  std::vector<std::string> bus_order) {
  const Eigen::Index n = correlation.r.rows();
  SimilarityMatrix s;
  s.transform = transform;
  s.bus_order = std::move(bus_order);
  s.flat_buses = correlation.flat_buses;
  s.values.setZero(n, n);

  std::vector<bool> flat(static_cast<std::size_t>(n), false);
  for (auto b : correlation.flat_buses) flat[b] = true;

  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const bool degenerate = flat[static_cast<std::size_t>(i)] || flat[static_cast<std::size_t>(j)];
      const double r = degenerate ? 0.0 : correlation.r(i, j);
      const double v = apply_transform(transform, r);
      s.values(i, j) = v;
      s.values(j, i) = v;
    }
  }
  return s;
}

SimilarityMatrix build_similarity(const ContingencyRecord& record, Transform transform) {
  std::vector<std::string> order;
  order.reserve(record.traces.size());
  for (const auto& t : record.traces) order.push_back(t.bus_id);
  return build_similarity(correlation_matrix(record), transform, std::move(order));
}

Eigen::VectorXd degree_vector(const SimilarityMatrix& similarity) {
  const Eigen::Index n = similarity.values.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != j) d(j) += similarity.values(j, k);
    }
  }
  return d;
}

ViewMatrix build_view(const SimilarityMatrix& similarity, ViewMode mode) {
  ViewMatrix view;
  view.mode = mode;
  view.degree = degree_vector(similarity);
  const Eigen::Index n = similarity.values.rows();

  Eigen::MatrixXd s = similarity.values;
  s.diagonal().setZero();

  for (Eigen::Index j = 0; j < n; ++j)
    if (view.degree(j) == 0.0) view.isolated_buses.push_back(static_cast<std::size_t>(j));

  if (mode == ViewMode::unnormalized_laplacian) {
    view.values = -s;
    view.values.diagonal() = view.degree;
  } else {
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index j = 0; j < n; ++j)
      inv_sqrt(j) = view.degree(j) > 0.0 ? 1.0 / std::sqrt(view.degree(j)) : 0.0;
    view.values = inv_sqrt.asDiagonal() * s * inv_sqrt.asDiagonal();
  }
  view.values = 0.5 * (view.values + view.values.transpose()).eval();
  return view;
}

Eigen::MatrixXd trace_distance_matrix(std::span<const CorrelationMatrix> correlations) {
  if (correlations.empty())
    throw Error(ErrorKind::invalid_argument, "affinity", "no correlation matrices");
  const Eigen::Index n = correlations.front().r.rows();
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(n, n);
  for (const auto& c : correlations) {
    if (c.r.rows() != n)
      throw Error(ErrorKind::invalid_argument, "affinity", "correlation size mismatch");
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        sq(i, j) += c.r(i, i) + c.r(j, j) - 2.0 * c.r(i, j);
  }
  Eigen::MatrixXd d = sq.cwiseMax(0.0).cwiseSqrt();
  d.diagonal().setZero();
  return d;
}

std::string format_matrix_csv(const std::vector<std::string>& bus_order,
                              const Eigen::MatrixXd& matrix) {
  std::string out = "bus";
  for (const auto& b : bus_order) out += "," + b;
  out += '\n';
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out += bus_order[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out += "," + csv::format(matrix(i, j));
    out += '\n';
  }
  return out;
}

std::string format_vector_csv(const std::vector<std::string>& bus_order,
                              const Eigen::VectorXd& values, std::string_view column) {
  std::string out = "bus,";
  out += column;
  out += '\n';
  for (Eigen::Index i = 0; i < values.size(); ++i)
    out += bus_order[static_cast<std::size_t>(i)] + "," + csv::format(values(i)) + "\n";
  return out;
}

}  // namespace cohere
