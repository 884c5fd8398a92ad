#include "qflqg/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qflqg/error.hpp"
#include "qflqg/format.hpp"
#include "qflqg/linalg.hpp"

namespace qflqg {

DelayMatrix DelayMatrix::build(const std::vector<int>& delays, int horizon) {
  DelayMatrix out;
  out.phi = Eigen::MatrixXi::Zero(horizon, static_cast<int>(delays.size()));
  for (int row = 0; row < horizon; ++row) {
    for (std::size_t j = 0; j < delays.size(); ++j) {
      out.phi(row, static_cast<int>(j)) = row >= delays[j] ? 1 : 0;
    }
  }
  return out;
}

int arrival_indicator(const std::vector<int>& theta, int k, int t,
                      const std::vector<int>& delays) {
  if (k < 0 || k > t || k >= static_cast<int>(theta.size())) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "arrival indicator needs 0 <= k <= t");
  }
  return delays.at(theta[k]) <= t - k ? 1 : 0;
}

NTildeTable::NTildeTable(const InnovationStatistics& stats,
                         const RiccatiSolution& riccati)
    : horizon_(stats.horizon()) {
  if (riccati.horizon() != horizon_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Riccati and innovation horizons differ");
  }
  data_.resize(static_cast<std::size_t>(horizon_) * (horizon_ + 1) / 2);
  for (int t = 0; t < horizon_; ++t) {
    for (int k = 0; k <= t; ++k) {
      const Matrix psi = psi_factor(stats, t, k);
      data_[offset(k, t)] =
          linalg::symmetrized(psi.transpose() * riccati.N[t] * psi);
    }
  }
}

std::size_t NTildeTable::offset(int k, int t) const {
  if (k < 0 || k > t || t >= horizon_) {
    std::ostringstream msg;
    msg << "Ntilde(" << k << "," << t << ") requires 0 <= k <= t < "
        << horizon_;
    throw Error(ErrorCode::kIndexOutOfRange, msg.str());
  }
  return static_cast<std::size_t>(t) * (t + 1) / 2 + k;
}

const Matrix& NTildeTable::operator()(int k, int t) const {
  return data_[offset(k, t)];
}

Matrix& NTildeTable::mutable_entry(int k, int t) { return data_[offset(k, t)]; }

Matrix n_tilde(const InnovationStatistics& stats,
               const RiccatiSolution& riccati, int k, int t) {
  if (t >= riccati.horizon()) {
    throw Error(ErrorCode::kIndexOutOfRange, "Ntilde needs t <= T-1");
  }
  const Matrix psi = psi_factor(stats, t, k);
  return linalg::symmetrized(psi.transpose() * riccati.N[t] * psi);
}

Matrix beta_coefficients(const NTildeTable& ntilde,
                         const CellMomentTable& moments,
                         const std::vector<int>& delays) {
  const int T = ntilde.horizon();
  const int count = static_cast<int>(delays.size());
  const DelayMatrix phi = DelayMatrix::build(delays, T);
  Matrix beta = Matrix::Zero(T, count);
  for (int t = 0; t < T; ++t) {
    // suffix[s - t] = sum_{l=s}^{T-1} Ntilde_{t,l}
    const int p = static_cast<int>(ntilde(t, t).rows());
    std::vector<Matrix> suffix(T - t + 1, Matrix::Zero(p, p));
    for (int l = T - 1; l >= t; --l) {
      suffix[l - t] = suffix[l - t + 1] + ntilde(t, l);
    }
    for (int i = 0; i < count; ++i) {
      // Phi is a step in l - t, so the weighted sum is a suffix starting at
      // the first l with [Phi]_{l-t,i} = 1.
      int first = T;
      for (int l = t; l < T; ++l) {
        if (phi(l - t, i) == 1) {
          first = l;
          break;
        }
      }
      beta(t, i) = (suffix[first - t] * moments.F(t, i)).trace();
    }
  }
  return beta;
}

Matrix delay_horizon_weight(const NTildeTable& ntilde, int t, int d) {
  const int T = ntilde.horizon();
  const int p = static_cast<int>(ntilde(t, t).rows());
  Matrix H = Matrix::Zero(p, p);
  for (int l = T - 1; l >= t + d; --l) H += ntilde(t, l);
  return H;
}

Matrix constant_delay_beta(const NTildeTable& ntilde,
                           const CellMomentTable& moments, int delay) {
  const int T = ntilde.horizon();
  Matrix beta = Matrix::Zero(T, moments.size());
  for (int t = 0; t < T; ++t) {
    const Matrix H = delay_horizon_weight(ntilde, t, delay);
    for (int i = 0; i < moments.size(); ++i) {
      beta(t, i) = (H * moments.F(t, i)).trace();
    }
  }
  return beta;
}

Matrix full_observation_beta(const std::vector<Matrix>& upsilon,
                             const Matrix& A, const CellMomentTable& moments,
                             const std::vector<int>& delays) {
  const int T = static_cast<int>(upsilon.size()) - 1;
  Matrix beta = Matrix::Zero(T, static_cast<int>(delays.size()));
  for (std::size_t i = 0; i < delays.size(); ++i) {
    const int d = delays[i];
    Matrix power = Matrix::Identity(A.rows(), A.cols());
    for (int s = 0; s < d; ++s) power = A * power;
    for (int t = 0; t < T; ++t) {
      const Matrix& ups = upsilon[std::min(t + d, T)];
      const Matrix G = power.transpose() * ups * power;
      beta(t, static_cast<int>(i)) =
          (G * moments.F(t, static_cast<int>(i))).trace();
    }
  }
  return beta;
}

SelectionSchedule optimal_schedule(const Matrix& beta,
                                   const std::vector<double>& prices) {
  if (beta.cols() != static_cast<Eigen::Index>(prices.size())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "beta has a different number of quantizers than prices");
  }
  SelectionSchedule out;
  out.beta = beta;
  out.c = Matrix(beta.rows(), beta.cols());
  out.theta_star.resize(beta.rows());
  for (Eigen::Index t = 0; t < beta.rows(); ++t) {
    int best = 0;
    for (Eigen::Index i = 0; i < beta.cols(); ++i) {
      out.c(t, i) = prices[i] - beta(t, i);
      if (out.c(t, i) < out.c(t, best)) best = static_cast<int>(i);
    }
    out.theta_star[t] = best;
  }
  return out;
}

double selection_constant(const NTildeTable& ntilde,
                          const InnovationStatistics& stats,
                          const RiccatiSolution& riccati) {
  double total = 0.0;
  for (int t = 0; t < ntilde.horizon(); ++t) {
    total += (stats.Sigma_filt[t] * riccati.N[t]).trace();
    for (int k = 0; k <= t; ++k) {
      total += (ntilde(k, t) * stats.M[k]).trace();
    }
  }
  return total;
}

namespace {

void check_schedule(const std::vector<int>& theta, int horizon, int count) {
  if (static_cast<int>(theta.size()) != horizon) {
    throw Error(ErrorCode::kDimensionMismatch,
                "schedule length " + std::to_string(theta.size()) +
                    " differs from horizon " + std::to_string(horizon));
  }
  for (int i : theta) {
    if (i < 0 || i >= count) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "schedule selects unknown quantizer " + std::to_string(i));
    }
  }
}

// tr(Pi_t(Theta) F_t(theta_t)) with Pi_t = -sum_l vartheta_{t,l} Ntilde_{t,l}.
double reduction_term(const std::vector<int>& theta, int t,
                      const NTildeTable& ntilde,
                      const CellMomentTable& moments,
                      const std::vector<int>& delays) {
  const int T = ntilde.horizon();
  const int p = static_cast<int>(ntilde(t, t).rows());
  Matrix pi = Matrix::Zero(p, p);
  for (int l = t; l < T; ++l) {
    if (arrival_indicator(theta, t, l, delays) == 1) pi -= ntilde(t, l);
  }
  return (pi * moments.F(t, theta[t])).trace();
}

}  // namespace

C0Breakdown evaluate_C0(const std::vector<int>& theta,
                        const NTildeTable& ntilde,
                        const InnovationStatistics& stats,
                        const RiccatiSolution& riccati,
                        const CellMomentTable& moments,
                        const std::vector<int>& delays,
                        const std::vector<double>& prices) {
  check_schedule(theta, ntilde.horizon(), static_cast<int>(delays.size()));
  C0Breakdown out;
  out.constant = selection_constant(ntilde, stats, riccati);
  for (int t = 0; t < ntilde.horizon(); ++t) {
    out.reduction += reduction_term(theta, t, ntilde, moments, delays);
    out.price += prices.at(theta[t]);
  }
  return out;
}

double linearized_selection_cost(const std::vector<int>& theta,
                                 const Matrix& beta,
                                 const std::vector<double>& prices) {
  check_schedule(theta, static_cast<int>(beta.rows()),
                 static_cast<int>(beta.cols()));
  double total = 0.0;
  for (std::size_t t = 0; t < theta.size(); ++t) {
    total += prices.at(theta[t]) - beta(static_cast<Eigen::Index>(t), theta[t]);
  }
  return total;
}

Matrix error_second_moment(const std::vector<int>& theta,
                           const InnovationStatistics& stats,
                           const CellMomentTable& moments,
                           const std::vector<int>& delays, int t) {
  if (t < 0 || t >= stats.horizon()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "error moment requested outside the horizon");
  }
  check_schedule(theta, stats.horizon(), static_cast<int>(delays.size()));
  Matrix out = stats.Sigma_filt[t];
  for (int k = 0; k <= t; ++k) {
    const Matrix psi = psi_factor(stats, t, k);
    const Matrix& inner = arrival_indicator(theta, k, t, delays) == 1
                              ? moments.Mcal(k, theta[k])
                              : stats.M[k];
    out += psi * inner * psi.transpose();
  }
  return linalg::symmetrized(out);
}

std::string export_milp(const Matrix& c, double constant_part) {
  const Eigen::Index T = c.rows();
  const Eigen::Index count = c.cols();
  const auto var = [](Eigen::Index t, Eigen::Index i) {
    return "x_" + std::to_string(t) + "_" + std::to_string(i + 1);
  };
  std::ostringstream out;
  out << "\\ Quantizer selection MILP: " << T << " stages, " << count
      << " quantizers\n";
  out << "\\ Objective omits the schedule-independent constant "
      << format_double(constant_part) << "\n";
  out << "Minimize\n obj:";
  int on_line = 0;
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i < count; ++i) {
      const double coef = c(t, i);
      out << (coef < 0 ? " - " : " + ") << format_double(std::abs(coef)) << " "
          << var(t, i);
      if (++on_line == 4) {
        out << "\n     ";
        on_line = 0;
      }
    }
  }
  out << "\nSubject To\n";
  for (Eigen::Index t = 0; t < T; ++t) {
    out << " stage_" << t << ":";
    for (Eigen::Index i = 0; i < count; ++i) {
      out << (i == 0 ? " " : " + ") << var(t, i);
    }
    out << " = 1\n";
  }
  out << "Binaries\n";
  for (Eigen::Index t = 0; t < T; ++t) {
    out << " ";
    for (Eigen::Index i = 0; i < count; ++i) {
      out << (i == 0 ? "" : " ") << var(t, i);
    }
    out << "\n";
  }
  out << "End\n";
  return out.str();
}

BruteForceResult brute_force_schedule(const NTildeTable& ntilde,
                                      const CellMomentTable& moments,
                                      const std::vector<int>& delays,
                                      const std::vector<double>& prices,
                                      long long max_sequences) {
  const int T = ntilde.horizon();
  const int count = static_cast<int>(delays.size());
  long long total = 1;
  for (int t = 0; t < T; ++t) {
    total *= count;
    if (total > max_sequences) {
      throw Error(ErrorCode::kInstanceTooLarge,
                  "M^T exceeds the enumeration cap of " +
                      std::to_string(max_sequences));
    }
  }
  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<int> theta(T, 0);
  while (true) {
    double value = 0.0;
    for (int t = 0; t < T; ++t) {
      value += reduction_term(theta, t, ntilde, moments, delays) +
               prices.at(theta[t]);
    }
    ++best.enumerated;
    if (value < best.objective) {
      best.objective = value;
      best.theta = theta;
    }
    int t = T - 1;
    while (t >= 0 && ++theta[t] == count) {
      theta[t] = 0;
      --t;
    }
    if (t < 0) break;
  }
  return best;
}

}  // namespace qflqg
