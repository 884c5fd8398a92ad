#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "qflqg/error.hpp"
#include "qflqg/oracles.hpp"
#include "qflqg/simulate.hpp"

namespace qflqg {
namespace {

std::vector<int> origins(const std::vector<ChannelMessage>& msgs) {
  std::vector<int> out;
  for (const auto& m : msgs) out.push_back(m.origin_time);
  return out;
}

TEST(ChannelQueue, OutOfOrderTimeline) {
  // Origin 0 takes 3 steps, origins 1 and 2 one step, origin 3 two steps.
  ChannelQueue q;
  const std::vector<int> delays{1, 2, 3};
  q.push(make_message(2, 0, 0, delays));
  q.push(make_message(0, 0, 1, delays));
  q.push(make_message(0, 0, 2, delays));
  q.push(make_message(1, 0, 3, delays));
  EXPECT_TRUE(q.deliver(0).empty());
  EXPECT_TRUE(q.deliver(1).empty());
  EXPECT_EQ(origins(q.deliver(2)), (std::vector<int>{1}));
  EXPECT_EQ(origins(q.deliver(3)), (std::vector<int>{0, 2}));
  EXPECT_TRUE(q.deliver(4).empty());
  EXPECT_EQ(q.size(), 1u);
}

TEST(ChannelQueue, EmptyAndSortedBatch) {
  ChannelQueue q;
  EXPECT_TRUE(channel_deliver(q, 0).empty());
  q.push(ChannelMessage{0, 0, 5, 9});
  q.push(ChannelMessage{1, 0, 3, 9});
  EXPECT_EQ(origins(channel_deliver(q, 9)), (std::vector<int>{3, 5}));
  EXPECT_TRUE(q.empty());
}

TEST(TrialSeed, DeterministicAndDistinct) {
  EXPECT_EQ(trial_seed(42, 7), trial_seed(42, 7));
  EXPECT_NE(trial_seed(42, 7), trial_seed(42, 8));
  EXPECT_NE(trial_seed(42, 7), trial_seed(43, 7));
}

TEST(PairwiseSum, MatchesSimpleSum) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  EXPECT_EQ(pairwise_sum(v.data(), v.size()), 499500.0);
  EXPECT_EQ(pairwise_sum(v.data(), 0), 0.0);
}

TEST(RunTrial, ZeroNoiseZeroTrajectory) {
  ScenarioDescription raw = testing::two_state_scenario(4).description();
  raw.W.setZero();
  raw.V.setZero();
  raw.Sigma_x.setZero();
  const ScenarioModel m = validate_scenario(raw);
  const OfflineDesign d = build_design(m, testing::sign_bank(1));
  const TrajectoryRecord r = run_trial(d, {2, 1, 0, 0}, 99);
  for (const auto& x : r.states) EXPECT_TRUE(x.isZero(0.0));
  for (const auto& u : r.inputs) EXPECT_TRUE(u.isZero(0.0));
  EXPECT_EQ(r.realized_cost, 300 + 200 + 100 + 100);
  EXPECT_TRUE(trajectory_consistent(m, d.bank.prices(), r));
}

TEST(RunTrial, SameSeedBitIdentical) {
  const OfflineDesign d = build_design(testing::two_state_scenario(8),
                                       testing::sign_bank(1));
  const std::vector<int> theta(8, 1);
  const TrajectoryRecord a = run_trial(d, theta, 12345);
  const TrajectoryRecord b = run_trial(d, theta, 12345);
  ASSERT_EQ(a.states.size(), 9u);
  for (std::size_t t = 0; t < a.states.size(); ++t) {
    EXPECT_TRUE(a.states[t] == b.states[t]);
  }
  EXPECT_EQ(a.realized_cost, b.realized_cost);
  EXPECT_EQ(a.arrivals, b.arrivals);
  EXPECT_TRUE(trajectory_consistent(d.model, d.bank.prices(), a));
  EXPECT_THROW(run_trial(d, std::vector<int>(7, 0), 1), Error);
}

TEST(RunTrial, InnovationsMatchBatchProjection) {
  const OfflineDesign d = build_design(testing::two_state_scenario(10),
                                       testing::sign_bank(1));
  const TrajectoryRecord r = run_trial(d, std::vector<int>(10, 2), 77);
  const auto xi = oracle::batch_innovations(d.model, r.outputs, r.inputs);
  for (int t = 0; t < 10; ++t) {
    EXPECT_LT((xi[t] - r.innovations[t]).cwiseAbs().maxCoeff(),
              1e-8 * (1.0 + r.innovations[t].cwiseAbs().maxCoeff()));
  }
}

TEST(MonteCarlo, SingleTrialHasUndefinedStderr) {
  const OfflineDesign d = build_design(testing::two_state_scenario(5),
                                       testing::sign_bank(1));
  SimulationConfig c;
  c.trials = 1;
  c.master_seed = 9;
  c.schedule = std::vector<int>(5, 0);
  const CostReport r = monte_carlo(d, c);
  EXPECT_FALSE(r.stderr_defined);
  EXPECT_TRUE(std::isnan(r.empirical_stderr));
  EXPECT_EQ(r.trial_costs.size(), 1u);
  c.trials = 0;
  EXPECT_THROW(monte_carlo(d, c), Error);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  const OfflineDesign d = build_design(testing::two_state_scenario(6),
                                       testing::sign_bank(1));
  SimulationConfig c;
  c.trials = 200;
  c.master_seed = 5;
  c.schedule = {0, 1, 2, 0, 1, 2};
  c.threads = 1;
  const CostReport a = monte_carlo(d, c);
  c.threads = 4;
  const CostReport b = monte_carlo(d, c);
  EXPECT_EQ(a.empirical_mean, b.empirical_mean);
  EXPECT_EQ(a.empirical_stderr, b.empirical_stderr);
  EXPECT_EQ(a.trial_costs, b.trial_costs);
  EXPECT_DOUBLE_EQ(a.empirical_mean, a.mean_state_cost + a.mean_input_cost +
                                         a.mean_price_cost);
}

TEST(MonteCarlo, FailingTrialReportsIndex) {
  const OfflineDesign d = build_design(testing::two_state_scenario(6),
                                       testing::sign_bank(1));
  SimulationConfig c;
  c.trials = 3;
  c.schedule = std::vector<int>(5, 0);  // wrong length
  try {
    monte_carlo(d, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTrialFailed);
    EXPECT_NE(std::string(e.what()).find("trial 0"), std::string::npos);
  }
}

TEST(MonteCarlo, MeanNearTheory) {
  const OfflineDesign d = build_design(testing::two_state_scenario(8),
                                       testing::sign_bank(1));
  SimulationConfig c;
  c.trials = 4000;
  c.master_seed = 2024;
  c.schedule = solve_schedule(d).theta_star;
  const CostReport r = monte_carlo(d, c);
  EXPECT_NEAR(r.theoretical, solve_schedule(d).J_star, 1e-9 * r.theoretical);
  EXPECT_LE(std::abs(r.empirical_mean - r.theoretical), 4.0 * r.empirical_stderr);
}

}  // namespace
}  // namespace qflqg
