#include "cohere/gridsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <utility>

#include "cohere/csv.hpp"
#include "cohere/error.hpp"
#include "cohere/parallel.hpp"
#include "cohere/rng.hpp"

namespace cohere {

namespace {

[[noreturn]] void reject(const std::string& what) {
  throw Error(ErrorKind::config, "gridsim", "invalid grid spec: " + what);
}

std::string bus_name(std::size_t index, std::size_t total) {
  std::string digits = std::to_string(index + 1);
  const std::size_t width = std::max<std::size_t>(3, std::to_string(total).size());
  return "B" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

void validate_spec(const GridSpec& s) {
  if (s.areas < 2) reject("areas must be >= 2");
  if (s.buses_per_area < 2) reject("buses_per_area must be >= 2");
  if (!(s.inter_coupling > 0.0)) reject("inter_coupling must be > 0");
  if (!(s.intra_coupling > s.inter_coupling))
    reject("intra_coupling must exceed inter_coupling (planted block structure)");
  if (!(s.inertia_mean > 0.0)) reject("inertia_mean must be > 0");
  if (!(s.damping > 0.0)) reject("damping must be > 0");
  if (!(s.droop_gain > 0.0)) reject("droop_gain must be > 0");
  if (!(s.droop_time_constant > 0.0)) reject("droop_time_constant must be > 0");
  if (!(s.nominal_frequency > 0.0)) reject("nominal_frequency must be > 0");
  if (!(s.base_mva > 0.0)) reject("base_mva must be > 0");
  if (!(s.ibr_fraction >= 0.0 && s.ibr_fraction <= 1.0)) reject("ibr_fraction must be in [0, 1]");
  if (!(s.ibr_inertia_scale > 0.0 && s.ibr_inertia_scale <= 1.0))
    reject("ibr_inertia_scale must be in (0, 1]");
  if (!(s.jitter >= 0.0 && s.jitter < 1.0)) reject("jitter must be in [0, 1)");
  // Jittered inter links must stay strictly below jittered intra links.
  if (!(s.inter_coupling * (1.0 + s.jitter) < s.intra_coupling * (1.0 - s.jitter)))
    reject("inter_coupling*(1+jitter) must be below intra_coupling*(1-jitter)");
  if (s.inter_links < 1) reject("inter_links must be >= 1");
  if (s.inter_links > s.buses_per_area * s.buses_per_area)
    reject("inter_links exceeds the number of distinct bus pairs");
}

std::size_t GridModel::bus_index(const std::string& id) const {
  const auto it = std::find(bus_ids.begin(), bus_ids.end(), id);
  if (it == bus_ids.end())
    throw Error(ErrorKind::invalid_argument, "gridsim", "unknown bus '" + id + "'");
  return static_cast<std::size_t>(it - bus_ids.begin());
}

GridModel build_network(const GridSpec& spec) {
  validate_spec(spec);
  const int per = spec.buses_per_area;
  const auto n = static_cast<std::size_t>(spec.bus_count());
  const auto N = static_cast<Eigen::Index>(n);
  Rng rng(derive_seed(spec.seed, 0x6e6574));

  GridModel m;
  m.areas = spec.areas;
  m.droop_gain = spec.droop_gain;
  m.droop_time_constant = spec.droop_time_constant;
  m.nominal_frequency = spec.nominal_frequency;
  m.base_mva = spec.base_mva;
  m.coupling = Eigen::MatrixXd::Zero(N, N);
  auto jittered = [&](double value) { return value * (1.0 + spec.jitter * rng.uniform(-1.0, 1.0)); };

  for (int a = 0; a < spec.areas; ++a) {
    const Eigen::Index first = static_cast<Eigen::Index>(a) * per;
    for (Eigen::Index i = first; i < first + per; ++i) {
      for (Eigen::Index j = i + 1; j < first + per; ++j) {
        m.coupling(i, j) = jittered(spec.intra_coupling);
        m.coupling(j, i) = m.coupling(i, j);
      }
    }
  }

  std::vector<std::pair<int, int>> neighbors;
  if (spec.areas == 2) {
    neighbors.emplace_back(0, 1);
  } else {
    for (int a = 0; a < spec.areas; ++a) neighbors.emplace_back(a, (a + 1) % spec.areas);
  }
  for (const auto& [a, b] : neighbors) {
    std::set<std::pair<Eigen::Index, Eigen::Index>> chosen;
    while (static_cast<int>(chosen.size()) < spec.inter_links) {
      const auto i = static_cast<Eigen::Index>(a) * per + static_cast<Eigen::Index>(rng.below(per));
      const auto j = static_cast<Eigen::Index>(b) * per + static_cast<Eigen::Index>(rng.below(per));
      if (!chosen.emplace(i, j).second) continue;
      m.coupling(i, j) = jittered(spec.inter_coupling);
      m.coupling(j, i) = m.coupling(i, j);
    }
  }

  m.inertia.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) m.inertia(i) = jittered(spec.inertia_mean);
  m.damping = Eigen::VectorXd::Constant(N, spec.damping);

  const auto ibr_count = static_cast<std::size_t>(std::floor(spec.ibr_fraction * static_cast<double>(n) + 0.5));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i < ibr_count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  m.ibr_mask.assign(n, false);
  for (std::size_t i = 0; i < ibr_count; ++i) {
    m.ibr_mask[order[i]] = true;
    m.inertia(static_cast<Eigen::Index>(order[i])) *= spec.ibr_inertia_scale;
  }

  m.bus_ids.reserve(n);
  m.planted_partition.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.bus_ids.push_back(bus_name(i, n));
    m.planted_partition.labels.push_back(static_cast<int>(i) / per);
  }
  m.planted_partition.k = spec.areas;
  m.planted_partition.seed = spec.seed;
  return m;
}

Trajectory simulate_trajectory(const GridModel& model, std::size_t outage_bus, double delta_p,
                               double horizon, double step) {
  const auto N = static_cast<Eigen::Index>(model.bus_count());
  if (outage_bus >= model.bus_count())
    throw Error(ErrorKind::invalid_argument, "gridsim", "outage bus index out of range");
  if (!(step > 0.0) || !std::isfinite(step))
    throw Error(ErrorKind::invalid_argument, "gridsim", "step must be > 0");
  if (!(horizon >= 10.0 * step) || !std::isfinite(horizon))
    throw Error(ErrorKind::invalid_argument, "gridsim", "horizon must be >= 10 * step");
  if (!std::isfinite(delta_p)) throw Error(ErrorKind::invalid_argument, "gridsim", "delta_p must be finite");

  const auto steps = static_cast<Eigen::Index>(std::floor(horizon / step + 1e-9));
  const double rate = 1.0 / step;

  // Network Laplacian of B: (L theta)_i = sum_j B_ij (theta_i - theta_j).
  Eigen::MatrixXd lap = -model.coupling;
  lap.diagonal() = model.coupling.rowwise().sum();

  Eigen::VectorXd injection = Eigen::VectorXd::Zero(N);
  injection(static_cast<Eigen::Index>(outage_bus)) = -delta_p;
  Eigen::VectorXd ibr(N);
  for (Eigen::Index i = 0; i < N; ++i) ibr(i) = model.ibr_mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  const Eigen::VectorXd inv_inertia = model.inertia.cwiseInverse();
  const double gain = model.droop_gain;
  const double inv_tau = 1.0 / model.droop_time_constant;

  // State blocks: [theta; omega; g].
  auto rhs = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd dx(3 * N);
    const auto theta = x.segment(0, N);
    const auto omega = x.segment(N, N);
    const auto g = x.segment(2 * N, N);
    dx.segment(0, N) = omega;
    dx.segment(N, N) =
        (injection - model.damping.cwiseProduct(omega) - lap * theta - g).cwiseProduct(inv_inertia);
    dx.segment(2 * N, N) = ibr.cwiseProduct(gain * omega - g) * inv_tau;
    return dx;
  };

  Trajectory out;
  out.times.resize(static_cast<std::size_t>(steps + 1));
  out.omega.resize(N, steps + 1);
  out.droop.resize(N, steps + 1);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(3 * N);
  out.times[0] = 0.0;
  out.omega.col(0).setZero();
  out.droop.col(0).setZero();
  for (Eigen::Index s = 1; s <= steps; ++s) {
    const Eigen::VectorXd k1 = rhs(x);
    const Eigen::VectorXd k2 = rhs(x + 0.5 * step * k1);
    const Eigen::VectorXd k3 = rhs(x + 0.5 * step * k2);
    const Eigen::VectorXd k4 = rhs(x + step * k3);
    x += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    // Dividing by the rate keeps decimal steps exact (35 / 100 == 0.35, 35 * 0.01 != 0.35).
    const double t = static_cast<double>(s) / rate;
    if (!x.allFinite()) {
      throw Error(ErrorKind::numerical, "gridsim",
                  "non-finite state at t=" + csv::format(t) + " s");
    }
    out.times[static_cast<std::size_t>(s)] = t;
    out.omega.col(s) = x.segment(N, N);
    out.droop.col(s) = x.segment(2 * N, N);
  }
  return out;
}

ContingencyRecord simulate_outage(const GridModel& model, const std::string& outage_bus,
                                  double delta_p, double horizon, double step,
                                  std::string contingency_id) {
  const std::size_t bus = model.bus_index(outage_bus);
  const Trajectory traj = simulate_trajectory(model, bus, delta_p, horizon, step);

  ContingencyRecord rec;
  rec.contingency_id = contingency_id.empty() ? "outage_" + outage_bus : std::move(contingency_id);
  rec.outage_bus = outage_bus;
  rec.mw_lost = delta_p * model.base_mva;
  rec.sample_times = traj.times;
  const double to_hz = 1.0 / (2.0 * std::numbers::pi);
  rec.traces.resize(model.bus_count());
  for (std::size_t i = 0; i < model.bus_count(); ++i) {
    auto& trace = rec.traces[i];
    trace.bus_id = model.bus_ids[i];
    trace.samples.resize(traj.times.size());
    for (std::size_t t = 0; t < traj.times.size(); ++t) {
      trace.samples[t] = model.nominal_frequency +
                         traj.omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) * to_hz;
    }
  }
  return rec;
}

std::vector<std::size_t> synchronous_buses(const GridModel& model, int area) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < model.bus_count(); ++i) {
    if (model.ibr_mask[i]) continue;
    if (area >= 0 && model.planted_partition.labels[i] != area) continue;
    out.push_back(i);
  }
  return out;
}

std::vector<OutageSpec> plan_outages(const GridModel& model, int count, double delta_p,
                                     std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::invalid_argument, "gridsim", "need at least one outage");
  Rng rng(derive_seed(seed, 0x6f7574));
  std::vector<bool> used(model.bus_count(), false);

  auto draw = [&](int area) -> std::size_t {
    std::vector<std::size_t> pool;
    for (std::size_t b : synchronous_buses(model, area))
      if (!used[b]) pool.push_back(b);
    if (pool.empty()) {
      for (std::size_t b = 0; b < model.bus_count(); ++b) {
        const bool in_area = area < 0 || model.planted_partition.labels[b] == area;
        if (in_area && !used[b]) pool.push_back(b);
      }
    }
    if (pool.empty()) {
      for (std::size_t b = 0; b < model.bus_count(); ++b)
        if (area < 0 || model.planted_partition.labels[b] == area) pool.push_back(b);
    }
    const std::size_t pick = pool[static_cast<std::size_t>(rng.below(pool.size()))];
    used[pick] = true;
    return pick;
  };

  std::vector<OutageSpec> out;
  for (int i = 0; i < count; ++i) {
    const int area = i < model.areas ? i : static_cast<int>(rng.below(static_cast<std::uint64_t>(model.areas)));
    out.push_back({model.bus_ids[draw(area)], delta_p});
  }
  return out;
}

Scenario generate_scenario_suite(const GridModel& model, const std::vector<OutageSpec>& outages,
                                 double horizon, double step, int threads) {
  if (outages.empty())
    throw Error(ErrorKind::invalid_argument, "gridsim", "generate_scenario_suite: empty outage list");
  const std::size_t width = std::max<std::size_t>(2, std::to_string(outages.size()).size());
  std::vector<ContingencyRecord> records(outages.size());
  parallel_for(outages.size(), threads, [&](std::size_t i) {
    std::string num = std::to_string(i + 1);
    std::string id = "ctg" + std::string(width - num.size(), '0') + num;
    records[i] = simulate_outage(model, outages[i].bus, outages[i].delta_p, horizon, step, std::move(id));
  });
  Scenario scenario;
  scenario.dataset = assemble_dataset(std::move(records));
  scenario.truth = model.planted_partition;
  return scenario;
}

std::string format_truth_csv(const GridModel& model) {
  std::string out = "bus,area\n";
  for (std::size_t i = 0; i < model.bus_count(); ++i)
    out += model.bus_ids[i] + "," + std::to_string(model.planted_partition.labels[i]) + "\n";
  return out;
}

}  // namespace cohere
