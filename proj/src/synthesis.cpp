#include "qflqg/synthesis.hpp"

#include <sstream>

#include "qflqg/error.hpp"
#include "qflqg/linalg.hpp"

namespace qflqg {

namespace {
constexpr double kMaxInnerCondition = 1e12;
}

RiccatiSolution solve_riccati(const ScenarioModel& model) {
  const int T = model.horizon;
  const Matrix& A = model.A;
  const Matrix& B = model.B;

  RiccatiSolution sol;
  sol.P.resize(T + 1);
  sol.L.resize(T);
  sol.N.resize(T);
  sol.r.assign(T + 1, 0.0);
  sol.P[T] = model.Q2;

  for (int k = T - 1; k >= 0; --k) {
    const Matrix& next = sol.P[k + 1];
    const Matrix inner =
        linalg::symmetrized(model.R + B.transpose() * next * B);
    const double cond = linalg::condition_number(inner);
    if (!(cond <= kMaxInnerCondition)) {
      std::ostringstream msg;
      msg << "R + B'P_{k+1}B at k=" << k << " has condition number " << cond;
      throw Error(ErrorCode::kSingularInnerMatrix, msg.str());
    }
    Eigen::LLT<Matrix> llt(inner);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularInnerMatrix,
                  "R + B'P_{k+1}B is not positive definite at k=" +
                      std::to_string(k));
    }
    sol.L[k] = llt.solve(B.transpose() * next * A);
    sol.N[k] = linalg::symmetrized(sol.L[k].transpose() * inner * sol.L[k]);
    sol.P[k] = linalg::symmetrized(model.Q1 + A.transpose() * next * A -
                                   sol.N[k]);
    sol.r[k] = sol.r[k + 1] + (next * model.W).trace();
  }
  return sol;
}

Vector control_gain_apply(const Matrix& gain, const Vector& xbar) {
  if (gain.cols() != xbar.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "control gain and estimate sizes differ");
  }
  return -(gain * xbar);
}

Vector control_gain_apply(const RiccatiSolution& riccati, int k,
                          const Vector& xbar) {
  if (k < 0 || k >= riccati.horizon()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "control stage " + std::to_string(k) + " outside horizon");
  }
  return control_gain_apply(riccati.L[k], xbar);
}

std::vector<Matrix> upsilon_recursion(const std::vector<Matrix>& N,
                                      const Matrix& A) {
  const auto T = N.size();
  std::vector<Matrix> upsilon(T + 1);
  upsilon[T] = Matrix::Zero(A.rows(), A.cols());
  for (auto t = T; t-- > 0;) {
    upsilon[t] =
        linalg::symmetrized(A.transpose() * upsilon[t + 1] * A + N[t]);
  }
  return upsilon;
}

}  // namespace qflqg
