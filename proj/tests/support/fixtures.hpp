#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cohere/affinity.hpp"
#include "cohere/dataset.hpp"
#include "cohere/gridsim.hpp"
#include "cohere/rng.hpp"
#include "oracles.hpp"

namespace fixture {

inline std::string bus(std::size_t i) { return "b" + std::to_string(i); }

// One record whose trace i is row i of `rows`, sampled at t = 0, 1, 2, ...
inline cohere::ContingencyRecord record_from_rows(const Eigen::MatrixXd& rows, std::string id = "c0") {
  cohere::ContingencyRecord rec;
  rec.contingency_id = std::move(id);
  rec.outage_bus = bus(0);
  for (Eigen::Index t = 0; t < rows.cols(); ++t) rec.sample_times.push_back(static_cast<double>(t));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    cohere::FrequencyTrace tr;
    tr.bus_id = bus(static_cast<std::size_t>(i));
    for (Eigen::Index t = 0; t < rows.cols(); ++t) tr.samples.push_back(rows(i, t));
    rec.traces.push_back(std::move(tr));
  }
  return rec;
}

// Buses share one of `groups` latent signals plus per-view noise; the noise
// level varies by view so views disagree to different degrees.
inline cohere::Dataset noisy_blocks(std::size_t n, std::size_t m, int groups, std::size_t samples,
                                    cohere::Rng& rng, std::vector<int>* truth = nullptr) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(groups));
  if (truth) *truth = labels;
  std::vector<cohere::ContingencyRecord> records;
  for (std::size_t v = 0; v < m; ++v) {
    const Eigen::MatrixXd latent = oracle::gaussian_matrix(groups, static_cast<Eigen::Index>(samples), rng);
    const double noise = rng.uniform(0.3, 1.5);
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(samples));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < samples; ++t)
        rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
            latent(labels[i], static_cast<Eigen::Index>(t)) + noise * oracle::gaussian(rng);
    records.push_back(record_from_rows(rows, "v" + std::to_string(v)));
  }
  return cohere::assemble_dataset(std::move(records));
}

inline std::vector<cohere::ViewMatrix> views_of(const cohere::Dataset& d,
                                                cohere::ViewMode mode = cohere::ViewMode::normalized_adjacency) {
  std::vector<cohere::ViewMatrix> out;
  for (const auto& rec : d.records)
    out.push_back(cohere::build_view(cohere::build_similarity(rec, cohere::Transform::clip_negative), mode));
  return out;
}

// Random non-negative similarity with zero diagonal.
inline cohere::SimilarityMatrix random_similarity(Eigen::Index n, cohere::Rng& rng) {
  cohere::SimilarityMatrix s;
  s.values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) s.values(i, j) = s.values(j, i) = rng.uniform();
  for (Eigen::Index i = 0; i < n; ++i) s.bus_order.push_back(bus(static_cast<std::size_t>(i)));
  return s;
}

}  // namespace fixture

#include <filesystem>
#include <fstream>
#include <random>

namespace fixture {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cohere_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixture
