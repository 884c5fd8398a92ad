#include "qflqg/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "qflqg/error.hpp"
#include "qflqg/linalg.hpp"

namespace qflqg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  Vector draw(const Matrix& factor) {
    Vector z(factor.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal_(engine_);
    return factor * z;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(~index));
}

void ChannelQueue::push(const ChannelMessage& msg) { pending_.push_back(msg); }

std::vector<ChannelMessage> ChannelQueue::deliver(int t) {
  std::vector<ChannelMessage> due;
  auto it = std::stable_partition(
      pending_.begin(), pending_.end(),
      [t](const ChannelMessage& m) { return m.arrival_time != t; });
  due.assign(it, pending_.end());
  pending_.erase(it, pending_.end());
  std::sort(due.begin(), due.end(),
            [](const ChannelMessage& a, const ChannelMessage& b) {
              return a.origin_time < b.origin_time;
            });
  return due;
}

std::vector<ChannelMessage> channel_deliver(ChannelQueue& queue, int t) {
  return queue.deliver(t);
}

TrajectoryRecord run_trial(const OfflineDesign& design,
                           const std::vector<int>& schedule,
                           std::uint64_t seed) {
  const ScenarioModel& model = design.model;
  const int T = model.horizon;
  if (static_cast<int>(schedule.size()) != T) {
    throw Error(ErrorCode::kDimensionMismatch,
                "schedule length differs from the horizon");
  }
  const std::vector<double> prices = design.bank.prices();
  const Matrix w_factor = linalg::psd_factor(model.W);
  const Matrix v_factor = linalg::psd_factor(model.V);
  const Matrix x0_factor = linalg::psd_factor(model.Sigma_x);
  GaussianSource noise(seed);

  TrajectoryRecord rec;
  rec.states.reserve(T + 1);
  rec.inputs.reserve(T);
  rec.outputs.reserve(T);
  rec.innovations.reserve(T);
  rec.estimates.reserve(T);
  rec.selections = schedule;
  rec.arrivals.resize(T);

  Vector x = model.mu0 + noise.draw(x0_factor);
  SensorFilterState sensor = SensorFilterState::initial(model);
  EstimatorState estimator = EstimatorState::initial(model);
  ChannelQueue channel;
  std::optional<Vector> u_prev;

  for (int t = 0; t < T; ++t) {
    rec.states.push_back(x);
    const Vector y = model.C * x + noise.draw(v_factor);
    rec.outputs.push_back(y);

    InnovationStep step =
        sensor_innovation_step(sensor, t, y, u_prev, design.stats);
    sensor = std::move(step.state);
    rec.innovations.push_back(step.xi);

    const int q = schedule[t];
    const int cell = quantize(design.bank.quantizers.at(q), step.xi);
    channel.push(make_message(q, cell, t, design.bank.delays));

    const std::vector<ChannelMessage> arrivals = channel.deliver(t);
    for (const auto& msg : arrivals) rec.arrivals[t].push_back(msg.origin_time);
    estimator = estimator_step(estimator, u_prev, arrivals, design.stats,
                               design.moments);
    rec.estimates.push_back(estimator.xbar);

    const Vector u = control_gain_apply(design.riccati.L[t], estimator.xbar);
    rec.inputs.push_back(u);
    rec.state_cost += x.dot(model.Q1 * x);
    rec.input_cost += u.dot(model.R * u);
    rec.price_cost += prices[q];

    x = model.A * x + model.B * u + noise.draw(w_factor);
    u_prev = u;
  }
  rec.states.push_back(x);
  rec.state_cost += x.dot(model.Q2 * x);
  rec.realized_cost = rec.state_cost + rec.input_cost + rec.price_cost;
  return rec;
}

double pairwise_sum(const double* values, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += values[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

CostReport monte_carlo(const OfflineDesign& design,
                       const SimulationConfig& config) {
  if (config.trials < 1) {
    throw Error(ErrorCode::kIndexOutOfRange, "need at least one trial");
  }
  const auto N = static_cast<std::size_t>(config.trials);
  std::vector<double> total(N), state(N), input(N), price(N);
  std::vector<TrajectoryRecord> records(config.record_trajectories ? N : 0);

  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::min<std::size_t>(N, 64)));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  std::size_t failed_trial = N;
  auto worker = [&] {
    for (std::size_t i = next++; i < N; i = next++) {
      try {
        TrajectoryRecord rec =
            run_trial(design, config.schedule, trial_seed(config.master_seed, i));
        if (!std::isfinite(rec.realized_cost)) {
          throw Error(ErrorCode::kTrialFailed, "non-finite realized cost");
        }
        total[i] = rec.realized_cost;
        state[i] = rec.state_cost;
        input[i] = rec.input_cost;
        price[i] = rec.price_cost;
        if (config.record_trajectories) records[i] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < failed_trial) {
          failed_trial = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) {
    std::string what = "unknown error";
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      what = e.what();
    }
    throw Error(ErrorCode::kTrialFailed,
                "trial " + std::to_string(failed_trial) + ": " + what);
  }

  CostReport report;
  report.trials = config.trials;
  const double n = static_cast<double>(N);
  report.empirical_mean = pairwise_sum(total.data(), N) / n;
  report.mean_state_cost = pairwise_sum(state.data(), N) / n;
  report.mean_input_cost = pairwise_sum(input.data(), N) / n;
  report.mean_price_cost = pairwise_sum(price.data(), N) / n;
  if (N >= 2) {
    std::vector<double> dev(N);
    for (std::size_t i = 0; i < N; ++i) {
      const double d = total[i] - report.empirical_mean;
      dev[i] = d * d;
    }
    const double variance = pairwise_sum(dev.data(), N) / (n - 1.0);
    report.empirical_stderr = std::sqrt(variance / n);
    report.stderr_defined = true;
  } else {
    report.empirical_stderr = std::numeric_limits<double>::quiet_NaN();
  }
  report.theoretical = theoretical_cost(design, config.schedule);
  report.trial_costs = std::move(total);
  report.trajectories = std::move(records);
  return report;
}

}  // namespace qflqg
