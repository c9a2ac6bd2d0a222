#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cohere/dataset.hpp"
#include "cohere/spectral.hpp"

namespace cohere {

// Synthetic multi-area grid with a planted coherent-area structure.
struct GridSpec {
  int areas = 3;
  int buses_per_area = 8;
  double intra_coupling = 10.0;  // pu power / rad
  double inter_coupling = 0.5;
  double inertia_mean = 8.0;     // s^2 pu
  double damping = 1.0;          // pu
  double ibr_fraction = 0.2;
  double ibr_inertia_scale = 0.1;
  double droop_gain = 5.0;
  double droop_time_constant = 0.2;  // s
  double nominal_frequency = 60.0;   // Hz
  double jitter = 0.1;               // multiplicative, uniform in [-jitter, +jitter]
  int inter_links = 2;               // bus pairs per neighboring area pair
  double base_mva = 100.0;           // converts delta_p to the informational mw_lost
  std::uint64_t seed = 0;

  int bus_count() const noexcept { return areas * buses_per_area; }
};

// Throws Error{config} describing the first violated constraint.
void validate_spec(const GridSpec& spec);

struct GridModel {
  Eigen::MatrixXd coupling;  // B: symmetric, zero diagonal
  Eigen::VectorXd inertia;   // M_i
  Eigen::VectorXd damping;   // D_i
  std::vector<bool> ibr_mask;
  Partition planted_partition;  // area per bus
  std::vector<std::string> bus_ids;
  double droop_gain = 0.0;
  double droop_time_constant = 1.0;
  double nominal_frequency = 60.0;
  double base_mva = 100.0;
  int areas = 0;

  std::size_t bus_count() const noexcept { return bus_ids.size(); }
  std::size_t bus_index(const std::string& id) const;  // throws Error{invalid_argument}
};

// Complete intra-area coupling, ring-neighbor inter-area links, IBR buses
// chosen by seed (count rounded half-up) with scaled inertia and droop.
GridModel build_network(const GridSpec& spec);

// Full simulated state sampled at every step: omega (rad/s deviation) and the
// droop response g, one row per bus and one column per sample.
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd omega;
  Eigen::MatrixXd droop;
};

// Linearized swing dynamics with a step power loss of delta_p at the outage bus
// from t = 0, integrated with fixed-step classical RK4 from the zero state.
Trajectory simulate_trajectory(const GridModel& model, std::size_t outage_bus, double delta_p,
                               double horizon, double step);

ContingencyRecord simulate_outage(const GridModel& model, const std::string& outage_bus,
                                  double delta_p, double horizon, double step,
                                  std::string contingency_id = {});

struct OutageSpec {
  std::string bus;
  double delta_p = 1.0;
};

// Buses without inverter-based resources, optionally restricted to one area.
std::vector<std::size_t> synchronous_buses(const GridModel& model, int area = -1);

// One outage per area, then further outages at unused synchronous buses of
// seeded areas. Buses are drawn without replacement while any remain.
std::vector<OutageSpec> plan_outages(const GridModel& model, int count, double delta_p,
                                     std::uint64_t seed);

struct Scenario {
  Dataset dataset;
  Partition truth;
};

Scenario generate_scenario_suite(const GridModel& model, const std::vector<OutageSpec>& outages,
                                 double horizon, double step, int threads = 1);

std::string format_truth_csv(const GridModel& model);

}  // namespace cohere
