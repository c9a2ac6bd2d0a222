#include "cohere/dataset.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "cohere/csv.hpp"
#include "cohere/error.hpp"

namespace cohere {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return std::string(s);
}

void check_record(const ContingencyRecord& rec, std::size_t index,
                  std::vector<Violation>& out) {
  auto flag = [&](std::string msg) {
    out.push_back({index, "record '" + rec.contingency_id + "': " + std::move(msg)});
  };

  if (rec.sample_times.empty()) flag("no samples");
  for (std::size_t t = 0; t < rec.sample_times.size(); ++t) {
    if (!std::isfinite(rec.sample_times[t])) {
      flag("non-finite timestamp at sample " + std::to_string(t));
    } else if (t > 0 && !(rec.sample_times[t] > rec.sample_times[t - 1])) {
      flag("timestamps not strictly increasing at sample " + std::to_string(t));
    }
  }

  std::unordered_set<std::string> seen;
  for (const auto& trace : rec.traces) {
    if (!seen.insert(trace.bus_id).second)
      flag("duplicated bus_id '" + trace.bus_id + "'");
    if (trace.samples.size() != rec.sample_times.size()) {
      flag("bus '" + trace.bus_id + "' has " + std::to_string(trace.samples.size()) +
           " samples, time base has " + std::to_string(rec.sample_times.size()));
    }
    for (std::size_t t = 0; t < trace.samples.size(); ++t) {
      if (!std::isfinite(trace.samples[t])) {
        flag("bus '" + trace.bus_id + "' non-finite sample at index " +
             std::to_string(t));
        break;
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_dataset(const Dataset& dataset) {
  std::vector<Violation> out;
  if (dataset.records.empty()) out.push_back({Violation::dataset_level, "no records"});
  if (dataset.bus_order.size() < 2)
    out.push_back({Violation::dataset_level, "fewer than 2 buses"});

  std::unordered_set<std::string> canon;
  for (const auto& id : dataset.bus_order) {
    if (!canon.insert(id).second)
      out.push_back({Violation::dataset_level, "bus_order repeats '" + id + "'"});
  }

  for (std::size_t r = 0; r < dataset.records.size(); ++r) {
    const auto& rec = dataset.records[r];
    check_record(rec, r, out);

    if (r > 0 && rec.sample_count() != dataset.records.front().sample_count()) {
      out.push_back({r, "record '" + rec.contingency_id + "' has " +
                            std::to_string(rec.sample_count()) + " samples, record '" +
                            dataset.records.front().contingency_id + "' has " +
                            std::to_string(dataset.records.front().sample_count())});
    }

    std::unordered_set<std::string> present;
    for (const auto& trace : rec.traces) present.insert(trace.bus_id);
    for (const auto& id : dataset.bus_order) {
      if (!present.contains(id))
        out.push_back({r, "record '" + rec.contingency_id + "' lacks bus '" + id + "'"});
    }
    for (const auto& id : present) {
      if (!canon.contains(id))
        out.push_back({r, "record '" + rec.contingency_id + "' has unknown bus '" + id + "'"});
    }
    if (rec.traces.size() == dataset.bus_order.size()) {
      for (std::size_t i = 0; i < rec.traces.size(); ++i) {
        if (rec.traces[i].bus_id != dataset.bus_order[i] &&
            present.size() == canon.size()) {
          out.push_back({r, "record '" + rec.contingency_id +
                                "' traces not stored in bus_order"});
          break;
        }
      }
    }
  }
  return out;
}

Dataset assemble_dataset(std::vector<ContingencyRecord> records) {
  if (records.empty()) throw DataError(ErrorKind::data, "<dataset>", 0, "no records");

  Dataset out;
  for (const auto& trace : records.front().traces) out.bus_order.push_back(trace.bus_id);

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < out.bus_order.size(); ++i)
    position.emplace(out.bus_order[i], i);

  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& rec = records[r];
    std::vector<FrequencyTrace> ordered(out.bus_order.size());
    std::vector<bool> filled(out.bus_order.size(), false);
    for (auto& trace : rec.traces) {
      const auto it = position.find(trace.bus_id);
      if (it == position.end()) {
        throw DataError(ErrorKind::data, rec.contingency_id, 0,
                        "bus-set mismatch: bus '" + trace.bus_id +
                            "' not present in record '" +
                            records.front().contingency_id + "'");
      }
      if (filled[it->second]) {
        throw DataError(ErrorKind::data, rec.contingency_id, 0,
                        "duplicated bus_id '" + trace.bus_id + "'");
      }
      filled[it->second] = true;
      ordered[it->second] = std::move(trace);
    }
    for (std::size_t i = 0; i < filled.size(); ++i) {
      if (!filled[i]) {
        throw DataError(ErrorKind::data, rec.contingency_id, 0,
                        "bus-set mismatch: bus '" + out.bus_order[i] + "' missing");
      }
    }
    rec.traces = std::move(ordered);
  }
  out.records = std::move(records);

  const auto violations = validate_dataset(out);
  if (!violations.empty()) {
    const auto& v = violations.front();
    const std::string where = v.record == Violation::dataset_level
                                  ? std::string("<dataset>")
                                  : out.records[v.record].contingency_id;
    throw DataError(ErrorKind::data, where, 0, v.message);
  }
  return out;
}

ContingencyRecord read_contingency_csv(const std::filesystem::path& path,
                                       std::string contingency_id,
                                       std::string outage_bus, double mw_lost) {
  const std::string file = path.string();
  if (!std::filesystem::exists(path))
    throw DataError(ErrorKind::io, file, 0, "missing file");

  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const Error& e) {
    throw DataError(ErrorKind::io, file, 0, e.what());
  }

  ContingencyRecord rec;
  rec.contingency_id = std::move(contingency_id);
  rec.outage_bus = std::move(outage_bus);
  rec.mw_lost = mw_lost;

  std::istringstream lines(text);
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  std::unordered_set<std::string> seen;
  while (std::getline(lines, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = csv::split(line);

    if (!header_seen) {
      header_seen = true;
      std::string first = trim(fields.front());
      if (first.size() >= 3 && first.compare(0, 3, "\xEF\xBB\xBF") == 0) first.erase(0, 3);
      if (first != "bus")
        throw DataError(ErrorKind::data, file, row, "first header cell must be 'bus'");
      if (fields.size() < 2)
        throw DataError(ErrorKind::data, file, row, "header has no timestamps");
      for (std::size_t c = 1; c < fields.size(); ++c) {
        const auto t = csv::parse(fields[c]);
        if (!t) {
          throw DataError(ErrorKind::data, file, row,
                          "malformed timestamp in column " + std::to_string(c + 1));
        }
        if (!std::isfinite(*t)) {
          throw DataError(ErrorKind::data, file, row,
                          "non-finite timestamp in column " + std::to_string(c + 1));
        }
        if (!rec.sample_times.empty() && !(*t > rec.sample_times.back())) {
          throw DataError(ErrorKind::data, file, row,
                          "non-monotone timestamps at column " + std::to_string(c + 1));
        }
        rec.sample_times.push_back(*t);
      }
      continue;
    }

    if (fields.size() != rec.sample_times.size() + 1) {
      throw DataError(ErrorKind::data, file, row,
                      "ragged row: expected " + std::to_string(rec.sample_times.size() + 1) +
                          " fields, found " + std::to_string(fields.size()));
    }
    FrequencyTrace trace;
    trace.bus_id = trim(fields.front());
    if (trace.bus_id.empty()) throw DataError(ErrorKind::data, file, row, "empty bus id");
    if (!seen.insert(trace.bus_id).second) {
      throw DataError(ErrorKind::data, file, row,
                      "duplicated bus_id '" + trace.bus_id + "'");
    }
    trace.samples.reserve(rec.sample_times.size());
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto v = csv::parse(fields[c]);
      if (!v) {
        throw DataError(ErrorKind::data, file, row,
                        "malformed value in column " + std::to_string(c + 1));
      }
      if (!std::isfinite(*v)) {
        throw DataError(ErrorKind::data, file, row,
                        "non-finite value in column " + std::to_string(c + 1));
      }
      trace.samples.push_back(*v);
    }
    rec.traces.push_back(std::move(trace));
  }

  if (!header_seen) throw DataError(ErrorKind::data, file, 0, "empty file");
  if (rec.traces.empty()) throw DataError(ErrorKind::data, file, 0, "no bus rows");
  return rec;
}

Dataset ingest_csv(const std::filesystem::path& manifest_path) {
  const std::string file = manifest_path.string();
  if (!std::filesystem::exists(manifest_path))
    throw DataError(ErrorKind::io, file, 0, "missing file");

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(csv::read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(ErrorKind::data, file, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("contingencies") ||
      !doc["contingencies"].is_array()) {
    throw DataError(ErrorKind::data, file, 0, "expected object with a 'contingencies' array");
  }
  const auto& entries = doc["contingencies"];
  if (entries.empty())
    throw DataError(ErrorKind::data, file, 0, "manifest references no contingencies");

  const auto base = manifest_path.parent_path();
  std::vector<ContingencyRecord> records;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string where = "contingency #" + std::to_string(i + 1);
    if (!e.is_object() || !e.contains("file") || !e["file"].is_string() ||
        !e.contains("id") || !e["id"].is_string()) {
      throw DataError(ErrorKind::data, file, 0, where + " needs string 'id' and 'file'");
    }
    std::filesystem::path csv_path = e["file"].get<std::string>();
    if (csv_path.is_relative()) csv_path = base / csv_path;
    const std::string outage = e.value("outage_bus", std::string{});
    double mw = 0.0;
    if (e.contains("mw_lost")) {
      if (!e["mw_lost"].is_number())
        throw DataError(ErrorKind::data, file, 0, where + ": 'mw_lost' must be a number");
      mw = e["mw_lost"].get<double>();
    }
    records.push_back(read_contingency_csv(csv_path, e["id"].get<std::string>(), outage, mw));
  }
  return assemble_dataset(std::move(records));
}

std::string format_contingency_csv(const ContingencyRecord& record) {
  std::string out = "bus";
  for (double t : record.sample_times) {
    out += ',';
    out += csv::format(t);
  }
  out += '\n';
  for (const auto& trace : record.traces) {
    out += trace.bus_id;
    for (double v : trace.samples) {
      out += ',';
      out += csv::format(v);
    }
    out += '\n';
  }
  return out;
}

std::filesystem::path export_dataset(const Dataset& dataset,
                                     const std::filesystem::path& directory) {
  nlohmann::ordered_json manifest;
  manifest["contingencies"] = nlohmann::ordered_json::array();
  for (const auto& rec : dataset.records) {
    const std::string name = rec.contingency_id + ".csv";
    csv::write_file(directory / name, format_contingency_csv(rec));
    nlohmann::ordered_json entry;
    entry["id"] = rec.contingency_id;
    entry["file"] = name;
    entry["outage_bus"] = rec.outage_bus;
    entry["mw_lost"] = rec.mw_lost;
    manifest["contingencies"].push_back(std::move(entry));
  }
  const auto path = directory / "manifest.json";
  csv::write_file(path, manifest.dump(2) + "\n");
  return path;
}

}  // namespace cohere
