#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "qflqg/error.hpp"
#include "qflqg/innovation.hpp"
#include "qflqg/linalg.hpp"
#include "qflqg/oracles.hpp"
#include "qflqg/random_scenario.hpp"

namespace qflqg {
namespace {

TEST(InnovationStatistics, ScalarFirstSteps) {
  ScenarioDescription raw;
  raw.A = Matrix::Constant(1, 1, 2.0);
  raw.B = Matrix::Ones(1, 1);
  raw.C = Matrix::Ones(1, 1);
  raw.W = Matrix::Ones(1, 1);
  raw.V = Matrix::Ones(1, 1);
  raw.Sigma_x = Matrix::Ones(1, 1);
  raw.mu0 = Vector::Zero(1);
  raw.Q1 = raw.Q2 = raw.R = Matrix::Ones(1, 1);
  raw.horizon = 2;
  const InnovationStatistics s = propagate_statistics(validate_scenario(raw));
  // M_0 = 1 + 1, K_0 = 1/2, Sigma_0 = 1/2, Sigma_{1|0} = 4 * 1/2 + 1 = 3.
  EXPECT_DOUBLE_EQ(s.M[0](0, 0), 2.0);
  EXPECT_DOUBLE_EQ(s.K[0](0, 0), 0.5);
  EXPECT_DOUBLE_EQ(s.Sigma_filt[0](0, 0), 0.5);
  EXPECT_DOUBLE_EQ(s.Sigma_pred[1](0, 0), 3.0);
  EXPECT_DOUBLE_EQ(s.M[1](0, 0), 4.0);
  EXPECT_DOUBLE_EQ(s.K[1](0, 0), 0.75);
  EXPECT_EQ(s.A_powers.size(), 3u);
  EXPECT_DOUBLE_EQ(s.A_powers[2](0, 0), 4.0);
}

TEST(InnovationStatistics, CovariancesArePsd) {
  const InnovationStatistics s =
      propagate_statistics(testing::two_state_scenario(30));
  for (int t = 0; t < s.horizon(); ++t) {
    EXPECT_GT(linalg::min_eigenvalue(s.M[t]), 0.0);
    EXPECT_GE(linalg::min_eigenvalue(s.Sigma_filt[t]), -1e-12);
    // Filtering never increases uncertainty.
    EXPECT_GE(linalg::min_eigenvalue(s.Sigma_pred[t] - s.Sigma_filt[t]),
              -1e-10);
  }
}

TEST(InnovationStatistics, SingularCovarianceDetected) {
  ScenarioDescription raw = testing::two_state_scenario(3).description();
  raw.C = (Matrix(2, 2) << 1.0, 0.0, 1.0, 0.0).finished();
  raw.V.setZero();
  try {
    propagate_statistics(validate_scenario(raw));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularInnovationCovariance);
  }
}

TEST(PsiFactor, DefinitionAndRange) {
  const InnovationStatistics s =
      propagate_statistics(testing::two_state_scenario(5));
  EXPECT_TRUE(psi_factor(s, 2, 2) == s.K[2]);
  EXPECT_TRUE(psi_factor(s, 4, 1).isApprox(s.A_powers[3] * s.K[1]));
  EXPECT_THROW(psi_factor(s, 1, 2), Error);
  EXPECT_THROW(psi_factor(s, 6, 0), Error);
  EXPECT_THROW(psi_factor(s, 5, 5), Error);
  EXPECT_THROW(psi_factor(s, 2, -1), Error);
}

TEST(SensorStep, MatchesBatchProjection) {
  std::mt19937_64 rng(5);
  RandomScenarioOptions o;
  o.n = 3;
  o.m = 1;
  o.p = 2;
  o.horizon = 8;
  const ScenarioModel m = random_scenario(rng, o);
  const InnovationStatistics s = propagate_statistics(m);
  std::normal_distribution<double> normal;
  std::vector<Vector> ys, us;
  std::vector<Vector> xis;
  SensorFilterState state = SensorFilterState::initial(m);
  std::optional<Vector> u_prev;
  for (int t = 0; t < m.horizon; ++t) {
    Vector y(2);
    y << normal(rng), normal(rng);
    ys.push_back(y);
    InnovationStep step = sensor_innovation_step(state, t, y, u_prev, s);
    xis.push_back(step.xi);
    state = step.state;
    Vector u(1);
    u << normal(rng);
    us.push_back(u);
    u_prev = u;
  }
  const auto batch = oracle::batch_innovations(m, ys, us);
  for (int t = 0; t < m.horizon; ++t) {
    EXPECT_LT((batch[t] - xis[t]).cwiseAbs().maxCoeff(), 1e-9) << "t=" << t;
  }
}

TEST(SensorStep, DesyncErrors) {
  const ScenarioModel m = testing::two_state_scenario(3);
  const InnovationStatistics s = propagate_statistics(m);
  const SensorFilterState start = SensorFilterState::initial(m);
  const Vector y = Vector::Zero(2);
  EXPECT_THROW(sensor_innovation_step(start, 1, y, Vector::Zero(2), s), Error);
  EXPECT_THROW(sensor_innovation_step(start, 0, y, Vector::Zero(2), s), Error);
  const auto step = sensor_innovation_step(start, 0, y, std::nullopt, s);
  EXPECT_EQ(step.state.t, 1);
  EXPECT_THROW(sensor_innovation_step(step.state, 1, y, std::nullopt, s), Error);
  SensorFilterState late{Vector::Zero(2), 3};
  EXPECT_THROW(sensor_innovation_step(late, 3, y, Vector::Zero(2), s), Error);
}

}  // namespace
}  // namespace qflqg
