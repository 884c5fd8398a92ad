#pragma once

#include <string>
#include <vector>

#include "qflqg/innovation.hpp"
#include "qflqg/quantizer.hpp"
#include "qflqg/synthesis.hpp"

namespace qflqg {

// [Phi]_{row, j} = 1 iff row >= d_j, for rows 0..T-1. Entry (t-k, j) says
// whether a message sent at k through quantizer j has arrived by t.
struct DelayMatrix {
  Eigen::MatrixXi phi;

  static DelayMatrix build(const std::vector<int>& delays, int horizon);
  int operator()(int row, int j) const { return phi(row, j); }
};

// theta[k] is the quantizer index chosen at time k.
int arrival_indicator(const std::vector<int>& theta, int k, int t,
                      const std::vector<int>& delays);

// Ntilde_{k,t} = Psi(t,k)' N_t Psi(t,k) for 0 <= k <= t <= T-1 (p x p).
class NTildeTable {
 public:
  NTildeTable() = default;
  NTildeTable(const InnovationStatistics& stats, const RiccatiSolution& riccati);

  int horizon() const { return horizon_; }
  const Matrix& operator()(int k, int t) const;
  // Test hook used by fault injection.
  Matrix& mutable_entry(int k, int t);

 private:
  std::size_t offset(int k, int t) const;

  int horizon_ = 0;
  std::vector<Matrix> data_;
};

Matrix n_tilde(const InnovationStatistics& stats,
               const RiccatiSolution& riccati, int k, int t);

// beta_t^i = tr((sum_{l=t}^{T-1} [Phi]_{l-t,i} Ntilde_{t,l}) F_t^i), returned
// as a T x M matrix.
Matrix beta_coefficients(const NTildeTable& ntilde,
                         const CellMomentTable& moments,
                         const std::vector<int>& delays);

// H(t,d) = sum_{l=t+d}^{T-1} Ntilde_{t,l}.
Matrix delay_horizon_weight(const NTildeTable& ntilde, int t, int d);

// Constant-delay route: beta_t^i = tr(H(t,d) F_t^i).
Matrix constant_delay_beta(const NTildeTable& ntilde,
                           const CellMomentTable& moments, int delay);

// Full-observation route (C = I, V = 0, so Psi(t,k) = A^{t-k}):
// beta_t^i = tr((A^d)' Upsilon_{min(t+d,T)} A^d F_t^i) with d = d_i.
Matrix full_observation_beta(const std::vector<Matrix>& upsilon,
                             const Matrix& A, const CellMomentTable& moments,
                             const std::vector<int>& delays);

struct SelectionSchedule {
  Matrix beta;  // T x M
  Matrix c;     // T x M, c_t^i = lambda_i - beta_t^i
  std::vector<int> theta_star;
  double C0 = 0.0;
  double constant_part = 0.0;   // Theta-independent part of C0
  double selection_part = 0.0;  // sum_t c_t^{theta_t}
  double J_star = 0.0;
};

// Per-stage argmin of c_t with lowest-index tie-break. Cost fields are left
// at zero; see solve_schedule for the fully populated result.
SelectionSchedule optimal_schedule(const Matrix& beta,
                                   const std::vector<double>& prices);

struct C0Breakdown {
  double constant = 0.0;   // sum_t tr(Sigma_t N_t) + sum_{k<=t} tr(Nt_{k,t} M_k)
  double reduction = 0.0;  // sum_t tr(Pi_t(Theta) F_t(theta_t))
  double price = 0.0;      // sum_t lambda_{theta_t}
  double total() const { return constant + reduction + price; }
  double selection_dependent() const { return reduction + price; }
};

double selection_constant(const NTildeTable& ntilde,
                          const InnovationStatistics& stats,
                          const RiccatiSolution& riccati);

// C0 for an arbitrary schedule through the nonlinear Pi-form.
C0Breakdown evaluate_C0(const std::vector<int>& theta,
                        const NTildeTable& ntilde,
                        const InnovationStatistics& stats,
                        const RiccatiSolution& riccati,
                        const CellMomentTable& moments,
                        const std::vector<int>& delays,
                        const std::vector<double>& prices);

// Theta-dependent part through the linearized form sum_t (lambda - beta).
double linearized_selection_cost(const std::vector<int>& theta,
                                 const Matrix& beta,
                                 const std::vector<double>& prices);

// E[e_t e_t'] for the controller estimation error under schedule theta.
Matrix error_second_moment(const std::vector<int>& theta,
                           const InnovationStatistics& stats,
                           const CellMomentTable& moments,
                           const std::vector<int>& delays, int t);

// LP-file text of min sum_t c_t' theta_t s.t. binaries, one-hot per stage.
// Variables are x_<t>_<i> with i 1-based in bank order.
std::string export_milp(const Matrix& c, double constant_part = 0.0);

struct BruteForceResult {
  std::vector<int> theta;
  double objective = 0.0;  // Theta-dependent part of C0 (Pi-form)
  long long enumerated = 0;
};

// Exhaustive search over all M^T schedules; throws InstanceTooLarge above
// `max_sequences`.
BruteForceResult brute_force_schedule(const NTildeTable& ntilde,
                                      const CellMomentTable& moments,
                                      const std::vector<int>& delays,
                                      const std::vector<double>& prices,
                                      long long max_sequences = 1000000);

}  // namespace qflqg
