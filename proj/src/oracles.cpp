#include "qflqg/oracles.hpp"

#include <cmath>
#include <numbers>

#include "qflqg/linalg.hpp"

namespace qflqg::oracle {

RiccatiSolution riccati_value_iteration(const ScenarioModel& model) {
  const int T = model.horizon;
  const int n = model.n();
  const int m = model.m();
  RiccatiSolution out;
  out.P.assign(T + 1, Matrix());
  out.L.assign(T, Matrix());
  out.N.assign(T, Matrix());
  out.r.assign(T + 1, 0.0);
  out.P[T] = model.Q2;
  const Matrix r_root = linalg::psd_factor(model.R).transpose();
  for (int k = T - 1; k >= 0; --k) {
    const Matrix& next = out.P[k + 1];
    const Matrix g = linalg::psd_factor(next).transpose();  // g'g = next
    Matrix lhs(m + g.rows(), m);
    lhs << r_root, g * model.B;
    Matrix rhs(m + g.rows(), n);
    rhs << Matrix::Zero(m, n), g * model.A;
    // u = -L x minimizes |lhs u + rhs x|^2 for every x.
    const Matrix L = lhs.colPivHouseholderQr().solve(rhs);
    const Matrix closed = model.A - model.B * L;
    out.L[k] = L;
    out.P[k] = linalg::symmetrized(model.Q1 + L.transpose() * model.R * L +
                                   closed.transpose() * next * closed);
    out.N[k] = linalg::symmetrized(
        L.transpose() * (model.R + model.B.transpose() * next * model.B) * L);
    out.r[k] = out.r[k + 1] + (next * model.W).trace();
  }
  return out;
}

std::vector<Vector> batch_innovations(const ScenarioModel& model,
                                      const std::vector<Vector>& outputs,
                                      const std::vector<Vector>& inputs) {
  const int T = static_cast<int>(outputs.size());
  const int n = model.n();
  const int p = model.p();

  // Zero-mean state part: xs_t = A^t x0 + sum_{j<t} A^{t-1-j} w_j.
  std::vector<Matrix> state_cov(T);
  Matrix cov = model.Sigma_x;
  for (int t = 0; t < T; ++t) {
    state_cov[t] = cov;
    cov = model.A * cov * model.A.transpose() + model.W;
  }
  Matrix gram = Matrix::Zero(T * p, T * p);
  for (int t = 0; t < T; ++t) {
    Matrix power = Matrix::Identity(n, n);
    for (int s = t; s < T; ++s) {
      // Cov(xs_s, xs_t) = A^{s-t} Cov(xs_t) for s >= t.
      Matrix block = model.C * power * state_cov[t] * model.C.transpose();
      if (s == t) block += model.V;
      gram.block(s * p, t * p, p, p) = block;
      gram.block(t * p, s * p, p, p) = block.transpose();
      power = model.A * power;
    }
  }

  Vector centered(T * p);
  Vector mean = model.mu0;
  for (int t = 0; t < T; ++t) {
    centered.segment(t * p, p) = outputs[t] - model.C * mean;
    if (t < static_cast<int>(inputs.size())) {
      mean = model.A * mean + model.B * inputs[t];
    } else {
      mean = model.A * mean;
    }
  }

  std::vector<Vector> xi(T);
  xi[0] = centered.head(p);
  for (int t = 1; t < T; ++t) {
    const Matrix past = gram.topLeftCorner(t * p, t * p);
    const Matrix cross = gram.block(t * p, 0, p, t * p);
    const Vector coeff =
        past.completeOrthogonalDecomposition().solve(centered.head(t * p));
    xi[t] = centered.segment(t * p, p) - cross * coeff;
  }
  return xi;
}

double quadrant_probability(double rho) {
  return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
}

double half_line_mean(double sigma) {
  return sigma * std::sqrt(2.0 / std::numbers::pi);
}

CellMoments sampled_cell_moments(const Matrix& M, const QuantizerSpec& spec,
                                 int samples, std::mt19937_64& rng) {
  const Matrix factor = linalg::psd_factor(M);
  std::normal_distribution<double> normal;
  const int cells = spec.levels();
  std::vector<long> counts(cells, 0);
  std::vector<Vector> sums(cells, Vector::Zero(M.rows()));
  Vector z(M.rows());
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    const Vector x = factor * z;
    const int j = quantize(spec, x);
    ++counts[j];
    sums[j] += x;
  }
  CellMoments out;
  for (int j = 0; j < cells; ++j) {
    out.probs.push_back(static_cast<double>(counts[j]) / samples);
    out.means.push_back(counts[j] ? Vector(sums[j] / counts[j])
                                  : Vector::Zero(M.rows()));
  }
  return out;
}

}  // namespace qflqg::oracle
