#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qflqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Unvalidated scenario fields as read from a file or built in code.
struct ScenarioDescription {
  Matrix A, B, C;
  Matrix W, V;  // process / measurement noise covariances
  Matrix Sigma_x;
  Vector mu0;
  Matrix Q1, Q2, R;
  long horizon = 0;
};

// A validated linear time-invariant plant with Gaussian noise and a finite
// horizon quadratic cost. Stages run 0..T-1 with the terminal state at T.
// Q1/Q2 are the stage and terminal weights (some texts write Q and Q_f).
struct ScenarioModel {
  Matrix A, B, C;
  Matrix W, V;
  Matrix Sigma_x;
  Vector mu0;
  Matrix Q1, Q2, R;
  int horizon = 0;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }

  ScenarioDescription description() const;
  bool operator==(const ScenarioModel&) const;
};

ScenarioModel validate_scenario(const ScenarioDescription& raw);
inline ScenarioModel validate_scenario(const ScenarioModel& model) {
  return validate_scenario(model.description());
}

// Replaces the horizon of an already validated model.
ScenarioModel with_horizon(const ScenarioModel& model, int horizon);

double stage_cost(const ScenarioModel& model, const Vector& x, const Vector& u,
                  double theta_price);

// One closed-loop realization. selections[t] is the internal quantizer index
// used at t; arrivals[t] lists origin times delivered at t.
struct TrajectoryRecord {
  std::vector<Vector> states;       // X_0..X_T
  std::vector<Vector> inputs;       // U_0..U_{T-1}
  std::vector<Vector> outputs;      // Y_0..Y_{T-1}
  std::vector<Vector> innovations;  // xi_0..xi_{T-1}
  std::vector<Vector> estimates;    // controller estimate Xbar_0..Xbar_{T-1}
  std::vector<int> selections;
  std::vector<std::vector<int>> arrivals;
  double realized_cost = 0.0;
  double state_cost = 0.0;
  double input_cost = 0.0;
  double price_cost = 0.0;
};

// Re-evaluates the quadratic cost plus quantizer prices from a record.
double recompute_cost(const ScenarioModel& model,
                      const std::vector<double>& prices,
                      const TrajectoryRecord& record);

// Checks horizon lengths and the cost self-consistency (1e-9 relative).
bool trajectory_consistent(const ScenarioModel& model,
                           const std::vector<double>& prices,
                           const TrajectoryRecord& record);

ScenarioDescription load_scenario_description(const std::filesystem::path& path);
ScenarioModel load_scenario(const std::filesystem::path& path,
                            std::optional<int> horizon_override = {});

}  // namespace qflqg
