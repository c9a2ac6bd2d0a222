#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace cohere {

// One bus's sampled frequency trajectory (Hz). The time base lives on the
// owning record, shared by all of its traces.
struct FrequencyTrace {
  std::string bus_id;
  std::vector<double> samples;
};

// One contingency: every bus's response to a single outage.
struct ContingencyRecord {
  std::string contingency_id;
  std::string outage_bus;
  double mw_lost = 0.0;  // informational only
  std::vector<double> sample_times;
  std::vector<FrequencyTrace> traces;

  std::size_t bus_count() const noexcept { return traces.size(); }
  std::size_t sample_count() const noexcept { return sample_times.size(); }
};

// m >= 1 records over the same N_b >= 2 buses. Every record's traces are
// stored in bus_order, so trace i of any record belongs to bus_order[i].
struct Dataset {
  std::vector<ContingencyRecord> records;
  std::vector<std::string> bus_order;

  std::size_t view_count() const noexcept { return records.size(); }
  std::size_t bus_count() const noexcept { return bus_order.size(); }
};

struct Violation {
  static constexpr std::size_t dataset_level = static_cast<std::size_t>(-1);
  std::size_t record = dataset_level;  // index into Dataset::records
  std::string message;
};

// Lists every invariant violation; empty for a valid dataset.
std::vector<Violation> validate_dataset(const Dataset& dataset);

// Builds a Dataset from records, taking bus_order from the first record and
// reindexing the others to it. Throws DataError on bus-set mismatch or any
// validation failure.
Dataset assemble_dataset(std::vector<ContingencyRecord> records);

// Parses one contingency CSV (header "bus,t0,t1,...", then one row per bus).
ContingencyRecord read_contingency_csv(const std::filesystem::path& path,
                                       std::string contingency_id,
                                       std::string outage_bus, double mw_lost);

// Loads a manifest (JSON) and every contingency CSV it references. Relative
// file entries resolve against the manifest's directory.
Dataset ingest_csv(const std::filesystem::path& manifest_path);

std::string format_contingency_csv(const ContingencyRecord& record);

// Writes one CSV per record ("<contingency_id>.csv") plus manifest.json into
// `directory`. Returns the manifest path.
std::filesystem::path export_dataset(const Dataset& dataset,
                                     const std::filesystem::path& directory);

}  // namespace cohere
