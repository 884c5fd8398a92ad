#include "qflqg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qflqg/error.hpp"
#include "qflqg/linalg.hpp"
#include "qflqg/oracles.hpp"
#include "qflqg/simulate.hpp"

namespace qflqg {

namespace {

std::string describe(double value, double limit) {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific << value << " (limit " << limit << ")";
  return out.str();
}

double max_abs_diff(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, (a[k] - b[k]).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<int> random_theta(std::mt19937_64& rng, int T, int count) {
  std::uniform_int_distribution<int> pick(0, count - 1);
  std::vector<int> theta(T);
  for (int& v : theta) v = pick(rng);
  return theta;
}

CheckResult check_riccati(const OfflineDesign& design) {
  const RiccatiSolution ref = oracle::riccati_value_iteration(design.model);
  const double err = std::max(max_abs_diff(design.riccati.P, ref.P),
                              max_abs_diff(design.riccati.L, ref.L));
  double scale = 1.0;
  for (const auto& P : ref.P) scale = std::max(scale, P.cwiseAbs().maxCoeff());
  const double limit = 1e-10 * scale;
  return {"riccati-oracle", err <= limit, describe(err, limit)};
}

CheckResult check_innovations_and_estimator(const OfflineDesign& design,
                                            const VerifyOptions& options) {
  std::mt19937_64 rng(options.seed);
  const int T = design.model.horizon;
  const int count = design.bank.size();
  double xi_err = 0.0;
  double est_err = 0.0;
  for (int trial = 0; trial < options.trajectories; ++trial) {
    const std::vector<int> theta = random_theta(rng, T, count);
    const TrajectoryRecord rec = run_trial(design, theta, rng());
    const auto xi = oracle::batch_innovations(design.model, rec.outputs,
                                              rec.inputs);
    std::vector<ChannelMessage> messages;
    for (int k = 0; k < T; ++k) {
      const double scale = 1.0 + rec.innovations[k].cwiseAbs().maxCoeff();
      xi_err = std::max(
          xi_err, (xi[k] - rec.innovations[k]).cwiseAbs().maxCoeff() / scale);
      const int cell =
          quantize(design.bank.quantizers[theta[k]], rec.innovations[k]);
      messages.push_back(make_message(theta[k], cell, k, design.bank.delays));
    }
    for (int t = 0; t < T; ++t) {
      const Vector batch = batch_estimate(messages, rec.inputs, design.stats,
                                          design.moments, t);
      const double scale = 1.0 + batch.cwiseAbs().maxCoeff();
      est_err = std::max(
          est_err, (batch - rec.estimates[t]).cwiseAbs().maxCoeff() / scale);
    }
  }
  const bool ok = xi_err <= 1e-8 && est_err <= 1e-12;
  return {"innovation-and-estimator-batch", ok,
          "innovation " + describe(xi_err, 1e-8) + ", estimate " +
              describe(est_err, 1e-12)};
}

CheckResult check_whiteness(const OfflineDesign& design,
                            const VerifyOptions& options) {
  const int T = design.model.horizon;
  const int p = design.model.p();
  const int N = options.whiteness_trials;
  const std::vector<int> theta(T, 0);
  std::vector<std::vector<Vector>> xi(N);
  for (int i = 0; i < N; ++i) {
    xi[i] = run_trial(design, theta, trial_seed(options.seed, i)).innovations;
  }
  double max_m = 0.0;
  for (const auto& M : design.stats.M) {
    max_m = std::max(max_m, M.cwiseAbs().rowwise().sum().maxCoeff());
  }
  const double limit = 5.0 * max_m / std::sqrt(static_cast<double>(N));
  double worst = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < t; ++s) {
      Matrix acc = Matrix::Zero(p, p);
      for (int i = 0; i < N; ++i) acc += xi[i][t] * xi[i][s].transpose();
      worst = std::max(worst, (acc / N).cwiseAbs().maxCoeff());
    }
  }
  return {"innovation-whiteness", worst < limit, describe(worst, limit)};
}

CheckResult check_moments(const OfflineDesign& design,
                          const VerifyOptions& options) {
  std::mt19937_64 rng(options.seed ^ 0x5bd1e995u);
  const int S = options.moment_samples;
  double worst = 0.0;  // in units of the sampling standard error
  const Matrix& M = design.stats.M.front();
  for (int i = 0; i < design.bank.size(); ++i) {
    const auto& spec = design.bank.quantizers[i];
    const CellMoments sampled = oracle::sampled_cell_moments(M, spec, S, rng);
    const CellMomentEntry& exact = design.moments.at(0, i);
    for (int j = 0; j < spec.levels(); ++j) {
      const double p = exact.probs[j];
      const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / S);
      worst = std::max(worst, std::abs(sampled.probs[j] - p) / se);
    }
  }
  const double quadrant_err = std::abs(
      cell_moments((Matrix(2, 2) << 1.0, 0.5, 0.5, 1.0).finished(),
                   orthant_quantizer(2, 0.0).cells)
          .probs.front() -
      oracle::quadrant_probability(0.5));
  const bool ok = worst < 5.0 && quadrant_err < 1e-6;
  return {"cell-moments", ok,
          "max sampled deviation " + describe(worst, 5.0) + " sigma, quadrant " +
              describe(quadrant_err, 1e-6)};
}

CheckResult check_brute_force(const OfflineDesign& design,
                              const VerifyOptions& options) {
  // The oracle rebuilds the Ntilde table from scratch, so a corrupted
  // design table shows up as a value mismatch.
  const NTildeTable clean(design.stats, design.riccati);
  BruteForceResult brute;
  try {
    brute = brute_force_schedule(clean, design.moments, design.bank.delays,
                                 design.bank.prices(), options.max_sequences);
  } catch (const Error& e) {
    return {"brute-force-schedule", false, e.what()};
  }
  const double brute_total =
      brute.objective +
      selection_constant(clean, design.stats, design.riccati);

  const Matrix beta = beta_coefficients(design.ntilde, design.moments,
                                        design.bank.delays);
  const SelectionSchedule sched = optimal_schedule(beta, design.bank.prices());
  const double argmin_total =
      selection_constant(design.ntilde, design.stats, design.riccati) +
      linearized_selection_cost(sched.theta_star, beta, design.bank.prices());
  const double err = std::abs(argmin_total - brute_total);
  const double limit = 1e-10 * std::max(1.0, std::abs(brute_total));
  return {"brute-force-schedule", err <= limit,
          std::to_string(brute.enumerated) + " sequences, |argmin - brute| " +
              describe(err, limit)};
}

CheckResult check_linearization(const OfflineDesign& design,
                                const VerifyOptions& options) {
  std::mt19937_64 rng(options.seed + 17);
  const Matrix beta = beta_coefficients(design.ntilde, design.moments,
                                        design.bank.delays);
  const auto prices = design.bank.prices();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto theta =
        random_theta(rng, design.model.horizon, design.bank.size());
    const double pi_form = evaluate_C0(design, theta).selection_dependent();
    const double linear = linearized_selection_cost(theta, beta, prices);
    worst = std::max(worst, std::abs(pi_form - linear) /
                                std::max(1.0, std::abs(pi_form)));
  }
  return {"pi-form-vs-linearized", worst <= 1e-9, describe(worst, 1e-9)};
}

CheckResult check_tail_rule(const OfflineDesign& design) {
  const Matrix beta = beta_coefficients(design.ntilde, design.moments,
                                        design.bank.delays);
  const int T = design.model.horizon;
  bool ok = true;
  for (int i = 0; i < design.bank.size(); ++i) {
    for (int t = std::max(0, T - design.bank.delays[i]); t < T; ++t) {
      ok = ok && beta(t, i) == 0.0;
    }
  }
  ok = ok && beta.minCoeff() >= -1e-9;
  return {"tail-rule", ok, ok ? "beta vanishes in every tail" : "violated"};
}

}  // namespace

std::vector<CheckResult> run_verification(const OfflineDesign& design,
                                          const VerifyOptions& options) {
  std::vector<CheckResult> results;
  results.push_back(check_riccati(design));
  results.push_back(check_innovations_and_estimator(design, options));
  results.push_back(check_whiteness(design, options));
  results.push_back(check_moments(design, options));
  results.push_back(check_brute_force(design, options));
  results.push_back(check_linearization(design, options));
  results.push_back(check_tail_rule(design));
  return results;
}

}  // namespace qflqg
