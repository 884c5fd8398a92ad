#pragma once

#include <cstdint>
#include <vector>

#include "qflqg/estimator.hpp"
#include "qflqg/model.hpp"
#include "qflqg/offline.hpp"

namespace qflqg {

struct SimulationConfig {
  int trials = 1;
  std::uint64_t master_seed = 0;
  std::vector<int> schedule;  // quantizer index per stage
  bool record_trajectories = false;
  int threads = 0;  // 0: hardware concurrency
};

// Seed of trial `index`, derived from the master seed by a counter-based
// mix so any trial can be replayed on its own.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index);

struct CostReport {
  int trials = 0;
  double empirical_mean = 0.0;
  double empirical_stderr = 0.0;  // NaN when trials < 2
  bool stderr_defined = false;
  double theoretical = 0.0;
  double mean_state_cost = 0.0;  // includes the terminal term
  double mean_input_cost = 0.0;
  double mean_price_cost = 0.0;
  std::vector<double> trial_costs;
  std::vector<TrajectoryRecord> trajectories;  // when recorded
};

// Pending channel messages. Delivery returns those due at t ordered by
// origin time; anything due at or after the horizon is never delivered.
class ChannelQueue {
 public:
  void push(const ChannelMessage& msg);
  std::vector<ChannelMessage> deliver(int t);
  bool empty() const { return pending_.empty(); }
  std::size_t size() const { return pending_.size(); }

 private:
  std::vector<ChannelMessage> pending_;
};

std::vector<ChannelMessage> channel_deliver(ChannelQueue& queue, int t);

// One closed-loop run of plant, sensor, quantizer, channel and controller.
TrajectoryRecord run_trial(const OfflineDesign& design,
                           const std::vector<int>& schedule,
                           std::uint64_t seed);

CostReport monte_carlo(const OfflineDesign& design,
                       const SimulationConfig& config);

// Pairwise (cascade) summation.
double pairwise_sum(const double* values, std::size_t count);

}  // namespace qflqg
