#include "qflqg/offline.hpp"

namespace qflqg {

OfflineDesign build_design(const ScenarioModel& model, const QuantizerBank& bank,
                           const QuadratureConfig& quadrature) {
  OfflineDesign design;
  design.model = model;
  design.bank = bank;
  design.riccati = solve_riccati(model);
  design.stats = propagate_statistics(model);
  design.moments = build_moment_tables(bank, design.stats, quadrature);
  design.ntilde = NTildeTable(design.stats, design.riccati);
  return design;
}

double control_cost_floor(const OfflineDesign& design) {
  const ScenarioModel& m = design.model;
  const Matrix second = m.Sigma_x + m.mu0 * m.mu0.transpose();
  return (design.riccati.P[0] * second).trace() + design.riccati.r[0];
}

C0Breakdown evaluate_C0(const OfflineDesign& design,
                        const std::vector<int>& theta) {
  return evaluate_C0(theta, design.ntilde, design.stats, design.riccati,
                     design.moments, design.bank.delays, design.bank.prices());
}

SelectionSchedule solve_schedule(const OfflineDesign& design) {
  const Matrix beta = beta_coefficients(design.ntilde, design.moments,
                                        design.bank.delays);
  SelectionSchedule schedule = optimal_schedule(beta, design.bank.prices());
  schedule.constant_part =
      selection_constant(design.ntilde, design.stats, design.riccati);
  schedule.selection_part = 0.0;
  for (std::size_t t = 0; t < schedule.theta_star.size(); ++t) {
    schedule.selection_part +=
        schedule.c(static_cast<Eigen::Index>(t), schedule.theta_star[t]);
  }
  schedule.C0 = schedule.constant_part + schedule.selection_part;
  schedule.J_star = control_cost_floor(design) + schedule.C0;
  return schedule;
}

double theoretical_cost(const OfflineDesign& design,
                        const std::vector<int>& theta) {
  return control_cost_floor(design) + evaluate_C0(design, theta).total();
}

}  // namespace qflqg
