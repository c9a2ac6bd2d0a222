#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cohere/config.hpp"
#include "cohere/error.hpp"
#include "cohere/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> manifest;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> k;
  std::optional<int> k_min;
  std::optional<int> k_max;
  std::optional<std::string> view_mode;
  std::optional<std::string> transform;
  std::optional<double> alpha;
  std::optional<int> max_iter;
  std::optional<double> rel_tol;
  bool dump_views = false;
};

void add_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--manifest", o.manifest, "dataset manifest (replaces any grid input)");
  cmd->add_option("--output-dir", o.output_dir, "output directory");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--threads", o.threads, "worker threads (0: available parallelism)");
  cmd->add_option("--k", o.k, "explicit cluster count");
  cmd->add_option("--k-min", o.k_min, "sweep lower bound");
  cmd->add_option("--k-max", o.k_max, "sweep upper bound");
  cmd->add_option("--view-mode", o.view_mode, "normalized_adjacency | unnormalized_laplacian");
  cmd->add_option("--transform", o.transform, "clip_negative | absolute | shift_rescale");
  cmd->add_option("--alpha", o.alpha, "fixed balance parameter (disables the adaptive rule)");
  cmd->add_option("--max-iter", o.max_iter, "maximum consensus iterations");
  cmd->add_option("--rel-tol", o.rel_tol, "relative objective tolerance");
  cmd->add_flag("--dump-views", o.dump_views, "write similarity, view and degree matrices");
}

cohere::RunConfig resolve(const Overrides& o) {
  cohere::RunConfig c = o.config.empty() ? cohere::RunConfig{} : cohere::load_config(o.config);
  const auto fail = [](const std::string& m) { throw cohere::Error(cohere::ErrorKind::config, "cli", m); };
  if (o.manifest) {
    c.manifest = *o.manifest;
    c.grid.reset();
  }
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.k && (o.k_min || o.k_max)) fail("--k conflicts with --k-min/--k-max");
  if (o.k) {
    c.k = *o.k;
    c.k_range.reset();
  }
  if (o.k_min || o.k_max) {
    cohere::KRange r = c.k_range.value_or(cohere::KRange{2, 2});
    if (!c.k_range && !(o.k_min && o.k_max)) fail("--k-min and --k-max must be given together");
    if (o.k_min) r.min = *o.k_min;
    if (o.k_max) r.max = *o.k_max;
    c.k_range = r;
    c.k.reset();
  }
  if (o.view_mode) c.view_mode = cohere::parse_view_mode(*o.view_mode);
  if (o.transform) c.transform = cohere::parse_transform(*o.transform);
  if (o.alpha) c.alpha = *o.alpha;
  if (o.max_iter) c.max_iter = *o.max_iter;
  if (o.rel_tol) c.rel_tol = *o.rel_tol;
  if (o.dump_views) c.dump_views = true;
  return c;
}

int exit_code(cohere::ErrorKind kind) {
  switch (kind) {
    case cohere::ErrorKind::config:
    case cohere::ErrorKind::data:
    case cohere::ErrorKind::invalid_argument:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent-region identification from multi-contingency frequency responses"};
  app.require_subcommand(1);
  Overrides o;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic multi-contingency dataset");
  auto* cluster = app.add_subcommand("cluster", "consensus clustering of a dataset");
  auto* report = app.add_subcommand("report", "SVG/CSV report from clustering outputs");
  for (auto* cmd : {simulate, cluster, report}) add_flags(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const cohere::RunConfig config = resolve(o);
    if (simulate->parsed()) cohere::cmd_simulate(config, std::cout);
    if (cluster->parsed()) cohere::cmd_cluster(config, std::cout);
    if (report->parsed()) cohere::cmd_report(config, std::cout);
  } catch (const cohere::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
