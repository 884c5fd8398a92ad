#pragma once

#include <optional>
#include <vector>

#include "qflqg/innovation.hpp"
#include "qflqg/quantizer.hpp"

namespace qflqg {

// What travels over the channel: the cell index under a given quantizer.
// The decoder never needs codebook values, only cell conditional means.
struct ChannelMessage {
  int quantizer_index = 0;
  int cell_index = 0;
  int origin_time = 0;
  int arrival_time = 0;
};

ChannelMessage make_message(int quantizer_index, int cell_index,
                            int origin_time, const std::vector<int>& delays);

// Conditional mean E[xi_k | cell, quantizer] from the offline table.
Vector decode_message(const ChannelMessage& msg,
                      const CellMomentTable& moments);

// Controller-side estimate Xbar_t = E[X_t | received messages, past inputs].
struct EstimatorState {
  Vector xbar;
  int t = -1;  // -1 until the first step
  std::vector<bool> arrived;
  std::vector<Vector> xi_bar;

  static EstimatorState initial(const ScenarioModel& model);
};

// Advances to the next time and folds in the messages arriving there:
//   Xbar_t = A Xbar_{t-1} + B u_{t-1} + sum_{k newly arrived} Psi(t,k) xibar_k
// with Xbar_0 = mu0 + zero-delay arrivals. u_prev is absent on the first step.
EstimatorState estimator_step(const EstimatorState& state,
                              const std::optional<Vector>& u_prev,
                              const std::vector<ChannelMessage>& arrivals,
                              const InnovationStatistics& stats,
                              const CellMomentTable& moments);

// Direct evaluation of
//   Xbar_t = A^t mu0 + sum_k Psi(t,k) vartheta_{k,t} xibar_k
//            + sum_{k<t} A^{t-1-k} B u_k
// from the full message history (messages with arrival_time > t ignored).
Vector batch_estimate(const std::vector<ChannelMessage>& messages,
                      const std::vector<Vector>& inputs,
                      const InnovationStatistics& stats,
                      const CellMomentTable& moments, int t);

}  // namespace qflqg
