#pragma once

#include "qflqg/innovation.hpp"
#include "qflqg/model.hpp"
#include "qflqg/quantizer.hpp"
#include "qflqg/selection.hpp"
#include "qflqg/synthesis.hpp"

namespace qflqg {

// Everything the controller and the selector compute before time zero.
struct OfflineDesign {
  ScenarioModel model;
  QuantizerBank bank;
  RiccatiSolution riccati;
  InnovationStatistics stats;
  CellMomentTable moments;
  NTildeTable ntilde;
};

OfflineDesign build_design(const ScenarioModel& model, const QuantizerBank& bank,
                           const QuadratureConfig& quadrature = {});

// tr(P_0 (Sigma_x + mu0 mu0')) + r_0: the part of the optimal cost that no
// schedule can change.
double control_cost_floor(const OfflineDesign& design);

// Optimal schedule with C0 and J* filled in.
SelectionSchedule solve_schedule(const OfflineDesign& design);

// Theoretical expected cost J = floor + C0(theta) for any schedule.
double theoretical_cost(const OfflineDesign& design,
                        const std::vector<int>& theta);

C0Breakdown evaluate_C0(const OfflineDesign& design,
                        const std::vector<int>& theta);

}  // namespace qflqg
