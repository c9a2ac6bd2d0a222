#include "cohere/config.hpp"

#include <set>

#include <json.hpp>

#include "cohere/csv.hpp"
#include "cohere/error.hpp"
#include "cohere/parallel.hpp"

namespace cohere {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::config, "cli", what); }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad("bad value for '" + std::string(key) + "' in " + where);
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out, const std::string& where) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

GridSpec parse_grid(const json& g) {
  if (!g.is_object()) bad("'grid' must be an object");
  reject_unknown(g,
                 {"areas", "buses_per_area", "intra_coupling", "inter_coupling", "inertia_mean",
                  "damping", "ibr_fraction", "ibr_inertia_scale", "droop_gain",
                  "droop_time_constant", "nominal_frequency", "jitter", "inter_links", "base_mva",
                  "seed"},
                 "grid");
  GridSpec s;
  const std::string where = "grid";
  read_if(g, "areas", s.areas, where);
  read_if(g, "buses_per_area", s.buses_per_area, where);
  read_if(g, "intra_coupling", s.intra_coupling, where);
  read_if(g, "inter_coupling", s.inter_coupling, where);
  read_if(g, "inertia_mean", s.inertia_mean, where);
  read_if(g, "damping", s.damping, where);
  read_if(g, "ibr_fraction", s.ibr_fraction, where);
  read_if(g, "ibr_inertia_scale", s.ibr_inertia_scale, where);
  read_if(g, "droop_gain", s.droop_gain, where);
  read_if(g, "droop_time_constant", s.droop_time_constant, where);
  read_if(g, "nominal_frequency", s.nominal_frequency, where);
  read_if(g, "jitter", s.jitter, where);
  read_if(g, "inter_links", s.inter_links, where);
  read_if(g, "base_mva", s.base_mva, where);
  read_if(g, "seed", s.seed, where);
  return s;
}

json grid_to_json(const GridSpec& s) {
  return {{"areas", s.areas},
          {"buses_per_area", s.buses_per_area},
          {"intra_coupling", s.intra_coupling},
          {"inter_coupling", s.inter_coupling},
          {"inertia_mean", s.inertia_mean},
          {"damping", s.damping},
          {"ibr_fraction", s.ibr_fraction},
          {"ibr_inertia_scale", s.ibr_inertia_scale},
          {"droop_gain", s.droop_gain},
          {"droop_time_constant", s.droop_time_constant},
          {"nominal_frequency", s.nominal_frequency},
          {"jitter", s.jitter},
          {"inter_links", s.inter_links},
          {"base_mva", s.base_mva},
          {"seed", s.seed}};
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.is_absolute() || base.empty()) return p;
  return base / p;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("config must be a JSON object");
  reject_unknown(doc,
                 {"manifest", "grid", "outages", "delta_p", "horizon", "step", "transform",
                  "view_mode", "k", "k_range", "k_min", "k_max", "alpha", "max_iter", "rel_tol",
                  "seed", "threads", "output_dir", "dump_views"},
                 "config");

  const std::string where = "config";
  RunConfig c;
  if (doc.contains("manifest")) c.manifest = resolve(get<std::string>(doc, "manifest", where), base_dir);
  if (doc.contains("grid")) c.grid = parse_grid(doc.at("grid"));

  if (doc.contains("outages")) {
    const json& o = doc.at("outages");
    if (o.is_number_integer()) {
      c.outage_count = o.get<int>();
    } else if (o.is_array()) {
      for (const json& item : o) {
        if (!item.is_object()) bad("each entry of 'outages' must be an object");
        reject_unknown(item, {"bus", "delta_p"}, "outages entry");
        OutageSpec spec;
        spec.bus = get<std::string>(item, "bus", "outages entry");
        spec.delta_p = item.contains("delta_p") ? get<double>(item, "delta_p", "outages entry") : 1.0;
        c.outages.push_back(std::move(spec));
      }
      c.outage_count = static_cast<int>(c.outages.size());
    } else {
      bad("'outages' must be a count or a list of {bus, delta_p}");
    }
  }
  read_if(doc, "delta_p", c.delta_p, where);
  read_if(doc, "horizon", c.horizon, where);
  read_if(doc, "step", c.step, where);
  if (doc.contains("transform")) c.transform = parse_transform(get<std::string>(doc, "transform", where));
  if (doc.contains("view_mode")) c.view_mode = parse_view_mode(get<std::string>(doc, "view_mode", where));

  if (doc.contains("k") && !doc.at("k").is_null()) c.k = get<int>(doc, "k", where);
  const bool has_range = doc.contains("k_range");
  const bool has_bounds = doc.contains("k_min") || doc.contains("k_max");
  if (has_range && has_bounds) bad("use either 'k_range' or 'k_min'/'k_max', not both");
  if (has_range) {
    const auto r = get<std::vector<int>>(doc, "k_range", where);
    if (r.size() != 2) bad("'k_range' must be [k_min, k_max]");
    c.k_range = KRange{r[0], r[1]};
  } else if (has_bounds) {
    if (!doc.contains("k_min") || !doc.contains("k_max")) bad("'k_min' and 'k_max' must be given together");
    c.k_range = KRange{get<int>(doc, "k_min", where), get<int>(doc, "k_max", where)};
  }

  if (doc.contains("alpha") && !doc.at("alpha").is_null()) c.alpha = get<double>(doc, "alpha", where);
  read_if(doc, "max_iter", c.max_iter, where);
  read_if(doc, "rel_tol", c.rel_tol, where);
  read_if(doc, "seed", c.seed, where);
  read_if(doc, "threads", c.threads, where);
  if (doc.contains("output_dir")) c.output_dir = resolve(get<std::string>(doc, "output_dir", where), base_dir);
  read_if(doc, "dump_views", c.dump_views, where);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const Error& e) {
    bad("cannot read config '" + path.string() + "'");
  }
  return parse_config(text, path.parent_path());
}

std::string config_to_json(const RunConfig& c) {
  json doc;
  if (c.manifest) doc["manifest"] = c.manifest->string();
  if (c.grid) doc["grid"] = grid_to_json(*c.grid);
  if (c.outages.empty()) {
    doc["outages"] = c.outage_count;
  } else {
    json list = json::array();
    for (const auto& o : c.outages) list.push_back({{"bus", o.bus}, {"delta_p", o.delta_p}});
    doc["outages"] = list;
  }
  doc["delta_p"] = c.delta_p;
  doc["horizon"] = c.horizon;
  doc["step"] = c.step;
  doc["transform"] = std::string(to_string(c.transform));
  doc["view_mode"] = std::string(to_string(c.view_mode));
  if (c.k) doc["k"] = *c.k;
  if (c.k_range) doc["k_range"] = {c.k_range->min, c.k_range->max};
  if (c.alpha) doc["alpha"] = *c.alpha;
  doc["max_iter"] = c.max_iter;
  doc["rel_tol"] = c.rel_tol;
  doc["seed"] = c.seed;
  doc["threads"] = c.threads;
  doc["output_dir"] = c.output_dir.string();
  doc["dump_views"] = c.dump_views;
  return doc.dump(2) + "\n";
}

void validate_config(const RunConfig& c, Command command) {
  if (c.k && c.k_range) bad("give either an explicit k or a k range, not both");
  if (c.k && *c.k < 1) bad("k must be >= 1");
  if (c.k_range && (c.k_range->min < 2 || c.k_range->max < c.k_range->min))
    bad("k range must satisfy 2 <= k_min <= k_max");
  if (c.alpha && !(*c.alpha >= 0.0)) bad("alpha must be >= 0");
  if (c.max_iter < 1) bad("max_iter must be >= 1");
  if (!(c.rel_tol >= 0.0)) bad("rel_tol must be >= 0");
  if (c.threads < 0) bad("threads must be >= 0");
  if (c.output_dir.empty()) bad("output_dir must not be empty");

  const bool manifest = c.manifest.has_value();
  const bool grid = c.grid.has_value();
  if (command == Command::simulate) {
    if (!grid) bad("simulate needs a 'grid' spec");
    if (manifest) bad("simulate takes a grid spec, not a manifest");
  } else if (manifest == grid) {
    bad("give exactly one input source: a manifest or a grid spec");
  }
  if (grid) {
    validate_spec(*c.grid);
    if (c.outages.empty() && c.outage_count < 1) bad("outages must be >= 1");
    if (!(c.step > 0.0)) bad("step must be > 0");
    if (!(c.horizon >= 10.0 * c.step)) bad("horizon must be >= 10 * step");
  }
}

int resolved_threads(const RunConfig& config) {
  return config.threads > 0 ? config.threads : default_thread_count();
}

}  // namespace cohere
