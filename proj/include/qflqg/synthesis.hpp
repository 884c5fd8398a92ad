#pragma once

#include <vector>

#include "qflqg/model.hpp"

namespace qflqg {

// Backward Riccati recursion of the finite-horizon LQ problem.
//   L_k = (R + B'P_{k+1}B)^{-1} B'P_{k+1}A
//   P_k = Q1 + A'P_{k+1}A - L_k'(R + B'P_{k+1}B)L_k,   P_T = Q2
//   N_k = L_k'(R + B'P_{k+1}B)L_k
//   r_k = r_{k+1} + tr(P_{k+1}W),                      r_T = 0
// The gains depend only on the plant and weights, never on quantizers.
struct RiccatiSolution {
  std::vector<Matrix> P;  // P_0..P_T
  std::vector<Matrix> L;  // L_0..L_{T-1}
  std::vector<Matrix> N;  // N_0..N_{T-1}
  std::vector<double> r;  // r_0..r_T

  int horizon() const { return static_cast<int>(L.size()); }
};

// Throws SingularInnerMatrix when R + B'P_{k+1}B has condition number > 1e12.
RiccatiSolution solve_riccati(const ScenarioModel& model);

// U_k = -L_k xbar.
Vector control_gain_apply(const Matrix& gain, const Vector& xbar);
Vector control_gain_apply(const RiccatiSolution& riccati, int k,
                          const Vector& xbar);

// Upsilon_T = 0, Upsilon_t = A' Upsilon_{t+1} A + N_t. Returns T+1 matrices.
std::vector<Matrix> upsilon_recursion(const std::vector<Matrix>& N,
                                      const Matrix& A);

}  // namespace qflqg
