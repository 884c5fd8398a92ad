#pragma once

#include <optional>
#include <vector>

#include "qflqg/model.hpp"

namespace qflqg {

// Second-order statistics of the innovation sequence. They do not depend on
// the control history, so everything here is computed offline.
//   M_t          = C Sigma_{t|t-1} C' + V
//   Sigma_t      = Sigma_{t|t-1} - Sigma_{t|t-1} C' M_t^{-1} C Sigma_{t|t-1}
//   Sigma_{t+1|t} = A Sigma_t A' + W,   Sigma_{0|-1} = Sigma_x
//   K_t          = Sigma_{t|t-1} C' M_t^{-1}
struct InnovationStatistics {
  std::vector<Matrix> M;           // M_0..M_{T-1}
  std::vector<Matrix> Sigma_pred;  // Sigma_{0|-1}..Sigma_{T-1|T-2}
  std::vector<Matrix> Sigma_filt;  // Sigma_0..Sigma_{T-1}
  std::vector<Matrix> K;           // K_0..K_{T-1}
  std::vector<Matrix> A_powers;    // A^0..A^T
  Matrix A, B, C;
  Vector mu0;

  int horizon() const { return static_cast<int>(M.size()); }
};

struct InnovationConfig {
  double max_condition = 1e12;
};

// Throws SingularInnovationCovariance if some M_t is ill-conditioned.
InnovationStatistics propagate_statistics(const ScenarioModel& model,
                                          const InnovationConfig& config = {});

// Psi(t,k) = A^{t-k} K_k, the weight of xi_k in the state estimate at t.
Matrix psi_factor(const InnovationStatistics& stats, int t, int k);

// Sensor-side filter of the control-adjusted state.
struct SensorFilterState {
  Vector xhat;  // filtered estimate after the last update
  int t = 0;    // index of the next measurement to process

  static SensorFilterState initial(const ScenarioModel& model);
};

struct InnovationStep {
  Vector xi;
  SensorFilterState state;
};

// Forms xi_t = y_t - C x_pred with x_pred = A xhat + B u_{t-1} (mu0 at t=0),
// then updates xhat = x_pred + K_t xi_t. `t` must match state.t.
InnovationStep sensor_innovation_step(const SensorFilterState& state, int t,
                                      const Vector& y,
                                      const std::optional<Vector>& u_prev,
                                      const InnovationStatistics& stats);

}  // namespace qflqg
