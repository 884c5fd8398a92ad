#include "qflqg/estimator.hpp"

#include "qflqg/error.hpp"

namespace qflqg {

ChannelMessage make_message(int quantizer_index, int cell_index,
                            int origin_time, const std::vector<int>& delays) {
  return ChannelMessage{quantizer_index, cell_index, origin_time,
                        origin_time + delays.at(quantizer_index)};
}

Vector decode_message(const ChannelMessage& msg,
                      const CellMomentTable& moments) {
  if (msg.origin_time < 0 || msg.origin_time >= moments.horizon() ||
      msg.quantizer_index < 0 || msg.quantizer_index >= moments.size()) {
    throw Error(ErrorCode::kUnknownCell,
                "message refers to a time or quantizer outside the table");
  }
  return moments.mean(msg.origin_time, msg.quantizer_index, msg.cell_index);
}

EstimatorState EstimatorState::initial(const ScenarioModel& model) {
  EstimatorState state;
  state.xbar = model.mu0;
  state.arrived.assign(model.horizon, false);
  state.xi_bar.assign(model.horizon, Vector());
  return state;
}

EstimatorState estimator_step(const EstimatorState& state,
                              const std::optional<Vector>& u_prev,
                              const std::vector<ChannelMessage>& arrivals,
                              const InnovationStatistics& stats,
                              const CellMomentTable& moments) {
  EstimatorState next = state;
  next.t = state.t + 1;
  if (next.t >= stats.horizon()) {
    throw Error(ErrorCode::kTimeDesync, "estimator stepped past the horizon");
  }
  if (state.t < 0) {
    if (u_prev) {
      throw Error(ErrorCode::kTimeDesync, "no input precedes t=0");
    }
    next.xbar = stats.mu0;
  } else {
    if (!u_prev) {
      throw Error(ErrorCode::kTimeDesync,
                  "previous input required after t=0");
    }
    next.xbar = stats.A * state.xbar + stats.B * *u_prev;
  }
  for (const ChannelMessage& msg : arrivals) {
    if (msg.origin_time > next.t || msg.arrival_time > next.t) {
      throw Error(ErrorCode::kFutureOrigin,
                  "message from t=" + std::to_string(msg.origin_time) +
                      " delivered at t=" + std::to_string(next.t));
    }
    if (msg.origin_time < 0 || msg.arrival_time != next.t) {
      throw Error(ErrorCode::kTimeDesync,
                  "message arrival time does not match the estimator clock");
    }
    if (next.arrived[msg.origin_time]) {
      throw Error(ErrorCode::kDuplicateArrival,
                  "origin time " + std::to_string(msg.origin_time) +
                      " delivered twice");
    }
    next.arrived[msg.origin_time] = true;
    next.xi_bar[msg.origin_time] = decode_message(msg, moments);
    next.xbar += psi_factor(stats, next.t, msg.origin_time) *
                 next.xi_bar[msg.origin_time];
  }
  return next;
}

Vector batch_estimate(const std::vector<ChannelMessage>& messages,
                      const std::vector<Vector>& inputs,
                      const InnovationStatistics& stats,
                      const CellMomentTable& moments, int t) {
  if (t < 0 || t >= stats.horizon()) {
    throw Error(ErrorCode::kIndexOutOfRange, "batch estimate outside horizon");
  }
  Vector xbar = stats.A_powers[t] * stats.mu0;
  for (const ChannelMessage& msg : messages) {
    if (msg.arrival_time <= t && msg.origin_time <= t) {
      xbar += psi_factor(stats, t, msg.origin_time) *
              decode_message(msg, moments);
    }
  }
  for (int k = 0; k < t; ++k) {
    xbar += stats.A_powers[t - 1 - k] * stats.B * inputs.at(k);
  }
  return xbar;
}

}  // namespace qflqg
