#include "cohere/pipeline.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include "cohere/csv.hpp"
#include "cohere/error.hpp"
#include "cohere/gridsim.hpp"
#include "cohere/parallel.hpp"
#include "cohere/report.hpp"

namespace cohere {

namespace fs = std::filesystem;

ViewSet build_views(const Dataset& dataset, Transform transform, ViewMode mode, int threads) {
  const std::size_t m = dataset.view_count();
  ViewSet set;
  set.correlations.resize(m);
  set.similarities.resize(m);
  std::vector<ViewMatrix> views(m);
  parallel_for(m, threads, [&](std::size_t i) {
    set.correlations[i] = correlation_matrix(dataset.records[i]);
    set.similarities[i] = build_similarity(set.correlations[i], transform, dataset.bus_order);
    views[i] = build_view(set.similarities[i], mode);
  });
  set.views = std::make_shared<const std::vector<ViewMatrix>>(std::move(views));
  set.distances = trace_distance_matrix(set.correlations);
  return set;
}

ClusterSettings cluster_settings(const RunConfig& c) {
  ClusterSettings s;
  s.transform = c.transform;
  s.view_mode = c.view_mode;
  s.k = c.k;
  s.k_range = c.k_range;
  s.alpha = c.alpha;
  s.max_iter = c.max_iter;
  s.rel_tol = c.rel_tol;
  s.seed = c.seed;
  s.threads = resolved_threads(c);
  return s;
}

ClusterOutcome cluster_dataset(const Dataset& dataset, const ClusterSettings& settings) {
  const int n = static_cast<int>(dataset.bus_count());
  ClusterOutcome out;
  out.views = build_views(dataset, settings.transform, settings.view_mode, settings.threads);

  ConsensusOptions options;
  options.max_iterations = settings.max_iter;
  options.rel_tol = settings.rel_tol;
  options.seed = settings.seed;
  options.alpha_override = settings.alpha;

  if (settings.k) {
    if (*settings.k > n)
      throw Error(ErrorKind::config, "cli", "k=" + std::to_string(*settings.k) + " exceeds the bus count " + std::to_string(n));
    out.k = *settings.k;
    options.threads = settings.threads;
    out.consensus = run_consensus(out.views.views, out.k, options);
    if (out.k >= 2 && out.k < n) {
      const double s = silhouette_from_distances(out.views.distances, out.consensus.partition);
      out.consensus.partition.silhouette = s;
      out.silhouette_table.push_back({out.k, s});
    }
  } else {
    KRange range = settings.k_range.value_or(KRange{2, std::min(15, n - 1)});
    if (range.min < 2 || range.max > n - 1 || range.min > range.max) {
      throw Error(ErrorKind::config, "cli",
                  "k range " + std::to_string(range.min) + ".." + std::to_string(range.max) +
                      " must lie within 2.." + std::to_string(n - 1));
    }
    out.swept = true;
    std::vector<ConsensusResult> runs(static_cast<std::size_t>(range.max - range.min + 1));
    options.threads = 1;
    const KSelection sel = select_k(
        out.views.distances, range.min, range.max,
        [&](int k) {
          auto& slot = runs[static_cast<std::size_t>(k - range.min)];
          slot = run_consensus(out.views.views, k, options);
          return slot.partition;
        },
        settings.threads);
    out.silhouette_table = sel.table;
    out.k = sel.k;
    out.consensus = std::move(runs[static_cast<std::size_t>(sel.k - range.min)]);
    for (const auto& row : sel.table)
      if (row.k == sel.k) out.consensus.partition.silhouette = row.silhouette;
  }

  out.view_partitions.resize(dataset.view_count());
  parallel_for(dataset.view_count(), settings.threads, [&](std::size_t i) {
    out.view_partitions[i] = base_partition((*out.views.views)[i], out.k, settings.seed);
  });
  return out;
}

Dataset load_input(const RunConfig& config, std::optional<Partition>* truth) {
  if (config.manifest) {
    Dataset d = ingest_csv(*config.manifest);
    if (truth) {
      const fs::path truth_path = config.manifest->parent_path() / "truth.csv";
      std::error_code ec;
      if (fs::exists(truth_path, ec)) *truth = read_partition_csv(truth_path, d.bus_order);
    }
    return d;
  }
  if (!config.grid) throw Error(ErrorKind::config, "cli", "no input source");
  const GridModel model = build_network(*config.grid);
  const auto outages = config.outages.empty()
                           ? plan_outages(model, config.outage_count, config.delta_p, config.grid->seed)
                           : config.outages;
  Scenario scenario = generate_scenario_suite(model, outages, config.horizon, config.step, resolved_threads(config));
  if (truth) *truth = scenario.truth;
  return std::move(scenario.dataset);
}

std::string format_partition_csv(const std::vector<std::string>& bus_order, const Partition& partition) {
  std::string out = "bus,cluster\n";
  for (std::size_t i = 0; i < partition.size(); ++i)
    out += bus_order[i] + "," + std::to_string(partition.labels[i]) + "\n";
  return out;
}

Partition read_partition_csv(const fs::path& path, const std::vector<std::string>& bus_order) {
  std::error_code ec;
  if (!fs::exists(path, ec))
    throw Error(ErrorKind::io, "cli", "missing upstream artifact '" + path.string() + "'");
  const std::string text = csv::read_file(path);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < bus_order.size(); ++i) index.emplace(bus_order[i], i);

  std::vector<int> labels(bus_order.size(), -1);
  std::size_t row = 0, start = 0, seen = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++row;
    if (row == 1) continue;  // header
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 2) throw DataError(ErrorKind::data, path.string(), row, "expected 2 fields");
    const auto it = index.find(std::string(fields[0]));
    if (it == index.end())
      throw DataError(ErrorKind::data, path.string(), row, "unknown bus '" + std::string(fields[0]) + "'");
    const auto value = csv::parse(fields[1]);
    if (!value || *value < 0 || *value != static_cast<double>(static_cast<int>(*value)))
      throw DataError(ErrorKind::data, path.string(), row, "cluster label must be a non-negative integer");
    if (labels[it->second] >= 0)
      throw DataError(ErrorKind::data, path.string(), row, "duplicate bus '" + it->first + "'");
    labels[it->second] = static_cast<int>(*value);
    ++seen;
  }
  if (seen != bus_order.size())
    throw DataError(ErrorKind::data, path.string(), 0,
                    "covers " + std::to_string(seen) + " of " + std::to_string(bus_order.size()) + " buses");
  Partition p;
  p.labels = std::move(labels);
  p.k = *std::max_element(p.labels.begin(), p.labels.end()) + 1;
  return p;
}

namespace {

std::string join_values(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ";" : "") + csv::format(values[i]);
  return out;
}

}  // namespace

void cmd_simulate(const RunConfig& config, std::ostream& out) {
  validate_config(config, Command::simulate);
  const GridModel model = build_network(*config.grid);
  const auto outages = config.outages.empty()
                           ? plan_outages(model, config.outage_count, config.delta_p, config.grid->seed)
                           : config.outages;
  const Scenario scenario = generate_scenario_suite(model, outages, config.horizon, config.step, resolved_threads(config));
  const fs::path manifest = export_dataset(scenario.dataset, config.output_dir);
  csv::write_file(config.output_dir / "truth.csv", format_truth_csv(model));
  out << "simulated m=" << scenario.dataset.view_count() << " N=" << scenario.dataset.bus_count()
      << " horizon=" << csv::format(config.horizon) << " s step=" << csv::format(config.step)
      << " s samples=" << scenario.dataset.records.front().sample_count() << "\n";
  out << "manifest: " << manifest.string() << "\n";
}

void cmd_cluster(const RunConfig& config, std::ostream& out) {
  validate_config(config, Command::cluster);
  std::optional<Partition> truth;
  const Dataset dataset = load_input(config, &truth);
  const ClusterOutcome r = cluster_dataset(dataset, cluster_settings(config));
  const fs::path dir = config.output_dir;

  csv::write_file(dir / "partition.csv", format_partition_csv(dataset.bus_order, r.consensus.partition));
  for (std::size_t i = 0; i < dataset.view_count(); ++i) {
    csv::write_file(dir / "views" / ("partition_" + dataset.records[i].contingency_id + ".csv"),
                    format_partition_csv(dataset.bus_order, r.view_partitions[i]));
  }
  if (r.swept) {
    std::string table = "k,silhouette\n";
    for (const auto& row : r.silhouette_table) table += std::to_string(row.k) + "," + csv::format(row.silhouette) + "\n";
    csv::write_file(dir / "silhouette.csv", table);
  }

  std::string log = "iteration,objective,objective_fixed_alpha,alpha,max_subspace_change\n";
  std::vector<double> alphas;
  for (const auto& rec : r.consensus.state.log) {
    log += std::to_string(rec.iteration) + "," + csv::format(rec.objective) + "," +
           csv::format(rec.objective_fixed_alpha) + "," + csv::format(rec.alpha) + "," +
           csv::format(rec.max_subspace_change) + "\n";
    alphas.push_back(rec.alpha);
  }
  csv::write_file(dir / "iterations.csv", log);

  std::vector<std::pair<std::string, std::string>> summary = {
      {"views", std::to_string(dataset.view_count())},
      {"buses", std::to_string(dataset.bus_count())},
      {"transform", std::string(to_string(config.transform))},
      {"view_mode", std::string(to_string(config.view_mode))},
      {"seed", std::to_string(config.seed)},
      {"swept", r.swept ? "true" : "false"},
      {"k", std::to_string(r.k)},
      {"silhouette", r.consensus.partition.silhouette ? csv::format(*r.consensus.partition.silhouette) : ""},
      {"converged", r.consensus.converged ? "true" : "false"},
      {"iterations", std::to_string(r.consensus.iterations_used)},
      {"alpha_fixed", r.consensus.state.alpha_fixed ? "true" : "false"},
      {"alpha_final", csv::format(r.consensus.state.alpha)},
      {"alpha_trajectory", join_values(alphas)},
      {"objective_final", csv::format(r.consensus.state.objective_history.back())},
  };
  if (truth) summary.emplace_back("ari_vs_truth", csv::format(adjusted_rand_index(r.consensus.partition, *truth)));
  std::string text = "key,value\n";
  for (const auto& [key, value] : summary) text += key + "," + value + "\n";
  csv::write_file(dir / "summary.csv", text);

  if (config.dump_views) {
    for (std::size_t i = 0; i < dataset.view_count(); ++i) {
      const auto& id = dataset.records[i].contingency_id;
      csv::write_file(dir / "views" / ("similarity_" + id + ".csv"),
                      format_matrix_csv(dataset.bus_order, r.views.similarities[i].values));
      csv::write_file(dir / "views" / ("view_" + id + ".csv"),
                      format_matrix_csv(dataset.bus_order, (*r.views.views)[i].values));
      csv::write_file(dir / "views" / ("degree_" + id + ".csv"),
                      format_vector_csv(dataset.bus_order, (*r.views.views)[i].degree, "degree"));
    }
  }

  out << "clustered m=" << dataset.view_count() << " N=" << dataset.bus_count() << " k=" << r.k
      << (r.swept ? " (sweep)" : "") << " converged=" << (r.consensus.converged ? "true" : "false")
      << " iterations=" << r.consensus.iterations_used;
  for (const auto& [key, value] : summary)
    if (key == "ari_vs_truth") out << " ari_vs_truth=" << value;
  out << "\n";
}

void cmd_report(const RunConfig& config, std::ostream& out) {
  validate_config(config, Command::report);
  const Dataset dataset = load_input(config);
  const fs::path dir = config.output_dir;
  const Partition consensus = read_partition_csv(dir / "partition.csv", dataset.bus_order);
  std::vector<Partition> views;
  for (const auto& rec : dataset.records)
    views.push_back(read_partition_csv(dir / "views" / ("partition_" + rec.contingency_id + ".csv"), dataset.bus_order));
  const ReportFiles files = write_report(dir / "report", dataset, views, consensus);
  out << "report: " << files.overlays.size() << " overlays, heatmap " << files.heatmap.string()
      << ", table " << files.membership.string() << "\n";
}

}  // namespace cohere
