#include "qflqg/innovation.hpp"

#include <sstream>

#include "qflqg/error.hpp"
#include "qflqg/linalg.hpp"

namespace qflqg {

InnovationStatistics propagate_statistics(const ScenarioModel& model,
                                          const InnovationConfig& config) {
  const int T = model.horizon;
  const Matrix& A = model.A;
  const Matrix& C = model.C;

  InnovationStatistics stats;
  stats.A = A;
  stats.B = model.B;
  stats.C = C;
  stats.mu0 = model.mu0;
  stats.M.resize(T);
  stats.Sigma_pred.resize(T);
  stats.Sigma_filt.resize(T);
  stats.K.resize(T);
  stats.A_powers.resize(T + 1);
  stats.A_powers[0] = Matrix::Identity(A.rows(), A.cols());
  for (int t = 1; t <= T; ++t) stats.A_powers[t] = A * stats.A_powers[t - 1];

  Matrix pred = model.Sigma_x;
  for (int t = 0; t < T; ++t) {
    const Matrix innovation_cov =
        linalg::symmetrized(C * pred * C.transpose() + model.V);
    if (innovation_cov.isZero(0.0)) {
      // Noiseless and fully known output: the innovation is identically
      // zero and carries no information.
      stats.M[t] = innovation_cov;
      stats.Sigma_pred[t] = pred;
      stats.Sigma_filt[t] = pred;
      stats.K[t] = Matrix::Zero(A.rows(), C.rows());
      pred = linalg::symmetrized(A * pred * A.transpose() + model.W);
      continue;
    }
    const double cond = linalg::condition_number(innovation_cov);
    if (!(cond <= config.max_condition)) {
      std::ostringstream msg;
      msg << "M_" << t << " has condition number " << cond;
      throw Error(ErrorCode::kSingularInnovationCovariance, msg.str());
    }
    Eigen::LDLT<Matrix> ldlt(innovation_cov);
    // K_t = pred C' M^{-1}, solved as M K' = C pred.
    const Matrix gain = ldlt.solve(C * pred).transpose();
    const Matrix filt =
        linalg::symmetrized(pred - gain * C * pred);

    stats.M[t] = innovation_cov;
    stats.Sigma_pred[t] = pred;
    stats.Sigma_filt[t] = filt;
    stats.K[t] = gain;
    pred = linalg::symmetrized(A * filt * A.transpose() + model.W);
  }
  return stats;
}

Matrix psi_factor(const InnovationStatistics& stats, int t, int k) {
  if (k < 0 || t < k || t > stats.horizon() || k >= stats.horizon()) {
    std::ostringstream msg;
    msg << "Psi(" << t << "," << k << ") requires 0 <= k <= t, k < T";
    throw Error(ErrorCode::kIndexOutOfRange, msg.str());
  }
  return stats.A_powers[t - k] * stats.K[k];
}

SensorFilterState SensorFilterState::initial(const ScenarioModel& model) {
  return SensorFilterState{model.mu0, 0};
}

InnovationStep sensor_innovation_step(const SensorFilterState& state, int t,
                                      const Vector& y,
                                      const std::optional<Vector>& u_prev,
                                      const InnovationStatistics& stats) {
  if (state.t != t || t < 0 || t >= stats.horizon()) {
    std::ostringstream msg;
    msg << "sensor state at t=" << state.t << " asked to process t=" << t
        << " (horizon " << stats.horizon() << ")";
    throw Error(ErrorCode::kTimeDesync, msg.str());
  }
  if ((t == 0) == u_prev.has_value()) {
    throw Error(ErrorCode::kTimeDesync,
                "previous input must be absent at t=0 and present after");
  }
  const Vector x_pred =
      t == 0 ? stats.mu0 : Vector(stats.A * state.xhat + stats.B * *u_prev);
  InnovationStep out;
  out.xi = y - stats.C * x_pred;
  out.state.xhat = x_pred + stats.K[t] * out.xi;
  out.state.t = t + 1;
  return out;
}

}  // namespace qflqg
