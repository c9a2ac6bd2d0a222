#include "cohere/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cohere/csv.hpp"
#include "cohere/error.hpp"

namespace cohere {

namespace {

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string hue_color(std::size_t i, std::size_t count) {
  const double h = 360.0 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(count, 1));
  return "hsl(" + num(h) + ",65%,42%)";
}

void check_sizes(std::span<const Partition> parts, std::size_t n) {
  for (const auto& p : parts) {
    if (p.size() != n)
      throw Error(ErrorKind::invalid_argument, "report", "partitions cover different bus counts");
  }
}

}  // namespace

Eigen::MatrixXd coassociation(std::span<const Partition> partitions) {
  if (partitions.empty()) throw Error(ErrorKind::invalid_argument, "report", "coassociation: no partitions");
  const std::size_t n = partitions.front().size();
  check_sizes(partitions, n);
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(N, N);
  for (const auto& p : partitions) {
    for (Eigen::Index a = 0; a < N; ++a)
      for (Eigen::Index b = 0; b < N; ++b)
        if (p.labels[static_cast<std::size_t>(a)] == p.labels[static_cast<std::size_t>(b)]) c(a, b) += 1.0;
  }
  return c / static_cast<double>(partitions.size());
}

std::vector<std::size_t> cluster_order(const Partition& partition) {
  std::vector<std::size_t> order(partition.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return partition.labels[a] < partition.labels[b];
  });
  return order;
}

Partition align_labels(const Partition& from, const Partition& to) {
  if (from.size() != to.size())
    throw Error(ErrorKind::invalid_argument, "report", "align_labels: size mismatch");
  auto label_count = [](const Partition& p) {
    int k = p.k;
    for (int l : p.labels) k = std::max(k, l + 1);
    return k;
  };
  const int kf = label_count(from);
  const int kt = label_count(to);
  std::vector<std::vector<int>> overlap(static_cast<std::size_t>(kf), std::vector<int>(static_cast<std::size_t>(kt), 0));
  for (std::size_t i = 0; i < from.size(); ++i)
    ++overlap[static_cast<std::size_t>(from.labels[i])][static_cast<std::size_t>(to.labels[i])];

  std::vector<int> mapping(static_cast<std::size_t>(kf), -1);
  std::vector<bool> taken(static_cast<std::size_t>(kt), false);
  for (;;) {
    int best = 0, bf = -1, bt = -1;
    for (int f = 0; f < kf; ++f) {
      if (mapping[static_cast<std::size_t>(f)] >= 0) continue;
      for (int t = 0; t < kt; ++t) {
        if (taken[static_cast<std::size_t>(t)]) continue;
        const int o = overlap[static_cast<std::size_t>(f)][static_cast<std::size_t>(t)];
        if (o > best) best = o, bf = f, bt = t;
      }
    }
    if (bf < 0) break;
    mapping[static_cast<std::size_t>(bf)] = bt;
    taken[static_cast<std::size_t>(bt)] = true;
  }
  int next = kt;
  for (int f = 0; f < kf; ++f) {
    if (mapping[static_cast<std::size_t>(f)] >= 0) continue;
    int free = 0;
    while (free < kt && taken[static_cast<std::size_t>(free)]) ++free;
    if (free < kt) {
      taken[static_cast<std::size_t>(free)] = true;
      mapping[static_cast<std::size_t>(f)] = free;
    } else {
      mapping[static_cast<std::size_t>(f)] = next++;
    }
  }

  Partition out = from;
  for (int& l : out.labels) l = mapping[static_cast<std::size_t>(l)];
  out.k = std::max(kt, next);
  return out;
}

std::string membership_table_csv(const Dataset& dataset, std::span<const Partition> view_partitions,
                                 const Partition& consensus) {
  if (view_partitions.size() != dataset.view_count())
    throw Error(ErrorKind::invalid_argument, "report", "one partition per view is required");
  check_sizes(view_partitions, consensus.size());
  int columns = consensus.k;
  std::vector<Partition> aligned;
  for (const auto& p : view_partitions) {
    aligned.push_back(align_labels(p, consensus));
    columns = std::max(columns, aligned.back().k);
  }

  auto row = [&](const std::string& name, const std::string& bus, const Partition& p) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(columns), 0);
    for (int l : p.labels) ++counts[static_cast<std::size_t>(l)];
    std::string line = name + "," + bus;
    for (std::size_t c : counts) line += "," + std::to_string(c);
    return line + "\n";
  };

  std::string out = "view,outage_bus";
  for (int c = 0; c < columns; ++c) out += ",cluster_" + std::to_string(c);
  out += "\n";
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    const auto& rec = dataset.records[i];
    out += row(rec.contingency_id, rec.outage_bus, aligned[i]);
  }
  out += row("consensus", "", consensus);
  return out;
}

std::string overlay_svg(const ContingencyRecord& record, std::span<const std::size_t> members,
                        const std::string& title, const OverlayStyle& style) {
  const double w = style.width, h = style.height;
  const double left = 64, right = 16, top = 32, bottom = 40;
  const std::size_t samples = record.sample_count();

  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t m : members) {
    for (double v : record.traces.at(m).samples) {
      if (first) lo = hi = v, first = false;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo < 1e-9) lo -= 0.01, hi += 0.01;
  const double t0 = samples ? record.sample_times.front() : 0.0;
  const double t1 = samples ? record.sample_times.back() : 1.0;
  const double span_t = t1 > t0 ? t1 - t0 : 1.0;
  auto px = [&](double t) { return left + (t - t0) / span_t * (w - left - right); };
  auto py = [&](double f) { return top + (hi - f) / (hi - lo) * (h - top - bottom); };
  const std::size_t stride = std::max<std::size_t>(1, (samples + style.max_points - 1) / std::max<std::size_t>(style.max_points, 1));

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
    << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s << "<text x=\"" << num(w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  s << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w - left - right) << "\" height=\""
    << num(h - top - bottom) << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = lo + (hi - lo) * i / 4.0;
    s << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(f) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(f) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double t = t0 + span_t * i / 4.0;
    s << "<text x=\"" << num(px(t)) << "\" y=\"" << num(h - bottom + 16)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << num(t) << "</text>\n";
  }
  s << "<text x=\"" << num(w / 2) << "\" y=\"" << num(h - 6)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">time (s)</text>\n";
  s << "<text x=\"14\" y=\"" << num(h / 2) << "\" transform=\"rotate(-90 14 " << num(h / 2)
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">frequency (Hz)</text>\n";

  for (std::size_t j = 0; j < members.size(); ++j) {
    const auto& trace = record.traces.at(members[j]);
    std::string points;
    for (std::size_t t = 0; t < samples; t += stride)
      points += num(px(record.sample_times[t])) + "," + num(py(trace.samples[t])) + " ";
    if (samples && (samples - 1) % stride != 0)
      points += num(px(record.sample_times.back())) + "," + num(py(trace.samples.back()));
    s << "<polyline fill=\"none\" stroke=\"" << hue_color(j, members.size())
      << "\" stroke-width=\"1\" stroke-opacity=\"0.8\" points=\"" << points << "\"><title>"
      << escape(trace.bus_id) << "</title></polyline>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string heatmap_svg(const Eigen::MatrixXd& matrix, std::span<const std::size_t> order,
                        const std::vector<std::string>& labels, const Partition& partition) {
  const std::size_t n = order.size();
  const double cell = n > 0 ? std::max(2.0, std::min(16.0, 640.0 / static_cast<double>(n))) : 16.0;
  const double margin = n <= 60 ? 56.0 : 24.0;
  const double size = margin + cell * static_cast<double>(n) + 16.0;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(size) << "\" height=\"" << num(size + 24)
    << "\" viewBox=\"0 0 " << num(size) << ' ' << num(size + 24) << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s << "<text x=\"" << num(size / 2) << "\" y=\"16\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\">co-association (ordered by consensus cluster)</text>\n";
  const double y0 = margin + 8;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double v = std::clamp(matrix(static_cast<Eigen::Index>(order[a]), static_cast<Eigen::Index>(order[b])), 0.0, 1.0);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      s << "<rect x=\"" << num(margin + cell * b) << "\" y=\"" << num(y0 + cell * a) << "\" width=\"" << num(cell)
        << "\" height=\"" << num(cell) << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\"/>\n";
    }
  }
  if (n <= 60) {
    for (std::size_t a = 0; a < n; ++a) {
      s << "<text x=\"" << num(margin - 4) << "\" y=\"" << num(y0 + cell * (a + 0.75))
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"" << num(std::min(10.0, cell))
        << "\">" << escape(labels.at(order[a])) << "</text>\n";
    }
  }
  // Cluster boundaries.
  for (std::size_t a = 1; a < n; ++a) {
    if (partition.labels[order[a]] == partition.labels[order[a - 1]]) continue;
    const double p = cell * static_cast<double>(a);
    s << "<line x1=\"" << num(margin) << "\" y1=\"" << num(y0 + p) << "\" x2=\"" << num(margin + cell * n)
      << "\" y2=\"" << num(y0 + p) << "\" stroke=\"#cc3333\" stroke-width=\"1\"/>\n";
    s << "<line x1=\"" << num(margin + p) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(margin + p)
      << "\" y2=\"" << num(y0 + cell * n) << "\" stroke=\"#cc3333\" stroke-width=\"1\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

ReportFiles write_report(const std::filesystem::path& directory, const Dataset& dataset,
                         std::span<const Partition> view_partitions, const Partition& consensus) {
  if (consensus.size() != dataset.bus_count())
    throw Error(ErrorKind::invalid_argument, "report", "consensus partition does not match the dataset");
  ReportFiles files;
  const int k = consensus.k;
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < consensus.size(); ++i)
    members.at(static_cast<std::size_t>(consensus.labels[i])).push_back(i);

  for (const auto& rec : dataset.records) {
    for (int r = 0; r < k; ++r) {
      const auto path = directory / ("overlay_" + rec.contingency_id + "_region" + std::to_string(r) + ".svg");
      const std::string title = rec.contingency_id + " (outage " + rec.outage_bus + "), region " +
                                std::to_string(r) + ", " +
                                std::to_string(members[static_cast<std::size_t>(r)].size()) + " buses";
      csv::write_file(path, overlay_svg(rec, members[static_cast<std::size_t>(r)], title));
      files.overlays.push_back(path);
    }
  }

  const Eigen::MatrixXd c = coassociation(view_partitions);
  files.heatmap = directory / "coassociation.svg";
  csv::write_file(files.heatmap, heatmap_svg(c, cluster_order(consensus), dataset.bus_order, consensus));

  files.membership = directory / "membership.csv";
  csv::write_file(files.membership, membership_table_csv(dataset, view_partitions, consensus));
  return files;
}

}  // namespace cohere
