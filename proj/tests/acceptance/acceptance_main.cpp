// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every check also enforces its wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "qflqg/error.hpp"
#include "qflqg/linalg.hpp"
#include "qflqg/offline.hpp"
#include "qflqg/oracles.hpp"
#include "qflqg/random_scenario.hpp"
#include "qflqg/simulate.hpp"

namespace {

using namespace qflqg;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Induced infinity norm.
double inf_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

Outcome riccati_oracle_equivalence() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<int> horizon(1, 15);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    RandomScenarioOptions o;
    o.n = dim(rng);
    o.m = dim(rng);
    o.p = dim(rng);
    o.horizon = horizon(rng);
    const ScenarioModel m = random_scenario(rng, o);
    const RiccatiSolution a = solve_riccati(m);
    const RiccatiSolution b = oracle::riccati_value_iteration(m);
    for (int k = 0; k <= m.horizon; ++k) worst = std::max(worst, max_abs(a.P[k] - b.P[k]));
    for (int k = 0; k < m.horizon; ++k) worst = std::max(worst, max_abs(a.L[k] - b.L[k]));
  }
  return {worst <= 1e-10, "20 scenarios, max |dP|,|dL| = " + sci(worst) + " (limit 1e-10)"};
}

Outcome innovation_whiteness() {
  const OfflineDesign d = build_design(testing::two_state_scenario(20), testing::sign_bank(1));
  const int T = 20;
  const int N = 10000;
  const std::vector<int> theta = solve_schedule(d).theta_star;
  std::vector<std::vector<Vector>> xi(N);
  for (int i = 0; i < N; ++i) {
    xi[i] = run_trial(d, theta, trial_seed(202, i)).innovations;
  }
  double max_m = 0.0;
  for (const auto& M : d.stats.M) max_m = std::max(max_m, inf_norm(M));
  const double bound = 5.0 * max_m / std::sqrt(static_cast<double>(N));
  double worst_cross = 0.0;
  double worst_cov = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < T; ++s) {
      if (s == t) continue;
      Matrix acc = Matrix::Zero(2, 2);
      for (int i = 0; i < N; ++i) acc += xi[i][t] * xi[i][s].transpose();
      worst_cross = std::max(worst_cross, max_abs(acc / N));
    }
    Vector mean = Vector::Zero(2);
    for (int i = 0; i < N; ++i) mean += xi[i][t];
    mean /= N;
    Matrix cov = Matrix::Zero(2, 2);
    for (int i = 0; i < N; ++i) {
      const Vector c = xi[i][t] - mean;
      cov += c * c.transpose();
    }
    cov /= (N - 1);
    worst_cov = std::max(worst_cov, linalg::relative_frobenius(cov, d.stats.M[t]));
  }
  return {worst_cross < bound && worst_cov <= 0.05,
          "max cross moment " + sci(worst_cross) + " (limit " + sci(bound) +
              "), max cov rel err " + sci(worst_cov) + " (limit 5e-2)"};
}

// Objective coefficients of an LP-format model, keyed by variable name.
std::map<std::string, double> parse_lp_objective(const std::string& lp) {
  std::map<std::string, double> coef;
  const auto begin = lp.find("obj:");
  const auto end = lp.find("Subject To");
  std::istringstream in(lp.substr(begin + 4, end - begin - 4));
  std::string sign, value, name;
  while (in >> sign >> value >> name) {
    coef[name] = (sign == "-" ? -1.0 : 1.0) * std::stod(value);
  }
  return coef;
}

Outcome selection_decoupling() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<int> pdim(1, 2);
  std::uniform_int_distribution<int> rate(1, 3);
  double worst_brute = 0.0;
  double worst_lp = 0.0;
  std::vector<int> seen_delays;
  for (int s = 0; s < 10; ++s) {
    RandomScenarioOptions o;
    o.n = dim(rng);
    o.m = dim(rng);
    o.p = pdim(rng);
    o.horizon = 5;
    const ScenarioModel m = random_scenario(rng, o);
    const QuantizerBank bank = random_bank(rng, m.p(), 3, {1, 2, 4, 8}, 1, 2.0);
    for (int dl : bank.delays) seen_delays.push_back(dl);
    const OfflineDesign d = build_design(m, bank);
    const BruteForceResult brute =
        brute_force_schedule(d.ntilde, d.moments, d.bank.delays, d.bank.prices());
    if (brute.enumerated != 243) return {false, "enumerated " + std::to_string(brute.enumerated)};
    const SelectionSchedule sched = solve_schedule(d);
    const double scale = std::max(1.0, std::abs(brute.objective));
    worst_brute = std::max(worst_brute, std::abs(sched.selection_part - brute.objective) / scale);

    // The LP optimum over all one-hot assignments, from the exported text.
    const auto coef = parse_lp_objective(export_milp(sched.c, sched.constant_part));
    double lp_best = 0.0;
    for (int t = 0; t < 5; ++t) {
      double best = INFINITY;
      for (int i = 0; i < 3; ++i) {
        best = std::min(best, coef.at("x_" + std::to_string(t) + "_" + std::to_string(i + 1)));
      }
      lp_best += best;
    }
    double lp_at_theta = 0.0;
    for (int t = 0; t < 5; ++t) {
      lp_at_theta += coef.at("x_" + std::to_string(t) + "_" + std::to_string(sched.theta_star[t] + 1));
    }
    worst_lp = std::max({worst_lp, std::abs(lp_best - brute.objective) / scale,
                         std::abs(lp_at_theta - brute.objective) / scale});
  }
  std::sort(seen_delays.begin(), seen_delays.end());
  seen_delays.erase(std::unique(seen_delays.begin(), seen_delays.end()), seen_delays.end());
  std::string delays;
  for (int dl : seen_delays) delays += std::to_string(dl);
  return {worst_brute <= 1e-10 && worst_lp <= 1e-10,
          "243 sequences x 10, delays seen {" + delays + "}, argmin rel err " +
              sci(worst_brute) + ", LP rel err " + sci(worst_lp) + " (limit 1e-10)"};
}

Outcome cell_moment_accuracy() {
  double worst_mean = 0.0;
  for (double sigma : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    const CellMoments cm = cell_moments(Matrix::Constant(1, 1, sigma * sigma),
                                        orthant_quantizer(1, 0.0).cells);
    worst_mean = std::max(worst_mean, std::abs(cm.means[0][0] - oracle::half_line_mean(sigma)));
  }
  double worst_prob = 0.0;
  for (double rho : {0.0, 0.5, -0.5, 0.9, -0.9}) {
    const Matrix M = (Matrix(2, 2) << 1.0, rho, rho, 1.0).finished();
    const CellMoments cm = cell_moments(M, orthant_quantizer(2, 0.0).cells);
    const double same = oracle::quadrant_probability(rho);
    const double expected[4] = {same, 0.5 - same, 0.5 - same, same};
    for (int j = 0; j < 4; ++j) worst_prob = std::max(worst_prob, std::abs(cm.probs[j] - expected[j]));
  }
  return {worst_mean <= 1e-6 && worst_prob <= 1e-6,
          "half-line mean err " + sci(worst_mean) + ", quadrant prob err " + sci(worst_prob) +
              " (limit 1e-6)"};
}

Outcome end_to_end_cost() {
  const OfflineDesign d = build_design(testing::two_state_scenario(20), testing::sign_bank(1));
  const SelectionSchedule sched = solve_schedule(d);
  SimulationConfig c;
  c.trials = 10000;
  c.master_seed = 505;
  c.schedule = sched.theta_star;
  const CostReport r = monte_carlo(d, c);
  const double closed_form = control_cost_floor(d) + sched.C0;
  const double gap = std::abs(r.empirical_mean - closed_form);
  return {gap <= 2.0 * r.empirical_stderr && std::abs(r.theoretical - closed_form) <= 1e-9 * closed_form,
          "empirical " + sci(r.empirical_mean) + " +/- " + sci(r.empirical_stderr) +
              ", closed form " + sci(closed_form) + ", gap " + sci(gap) + " (limit 2 stderr)"};
}

Outcome delay_sensitivity() {
  const ScenarioModel m = testing::two_state_scenario(50);
  const OfflineDesign rb1 = build_design(m, testing::sign_bank(1));
  const OfflineDesign rb3 = build_design(m, testing::sign_bank(3));
  const SelectionSchedule s1 = solve_schedule(rb1);
  const SelectionSchedule s3 = solve_schedule(rb3);
  const bool deterministic = solve_schedule(rb1).theta_star == s1.theta_star &&
                             solve_schedule(rb3).theta_star == s3.theta_star;
  int differing = 0;
  for (int t = 0; t < 50; ++t) differing += s1.theta_star[t] != s3.theta_star[t];
  bool tail_prices = true;
  const auto prices = rb1.bank.prices();
  for (int i = 0; i < 3; ++i) {
    for (int t = 50 - rb1.bank.delays[i]; t < 50; ++t) tail_prices = tail_prices && s1.c(t, i) == prices[i];
  }
  // Where every quantizer is in its tail the cheapest one must win.
  const int cheapest = static_cast<int>(std::min_element(prices.begin(), prices.end()) - prices.begin());
  const int min_delay = *std::min_element(rb1.bank.delays.begin(), rb1.bank.delays.end());
  bool tail_choice = true;
  for (int t = 50 - min_delay; t < 50; ++t) tail_choice = tail_choice && s1.theta_star[t] == cheapest;
  std::string sched1, sched3;
  for (int t = 0; t < 50; ++t) {
    sched1 += std::to_string(s1.theta_star[t] + 1);
    sched3 += std::to_string(s3.theta_star[t] + 1);
  }
  return {deterministic && differing >= 1 && tail_prices && tail_choice,
          std::to_string(differing) + " stage(s) differ; r_b=1 " + sched1 + " r_b=3 " + sched3};
}

Outcome open_loop_null_quantizer() {
  const OfflineDesign d = build_design(testing::two_state_scenario(50), testing::open_loop_bank(1, 1e9));
  const SelectionSchedule s = solve_schedule(d);
  const bool all_null = std::all_of(s.theta_star.begin(), s.theta_star.end(), [&](int i) {
    return d.bank.quantizers[i].levels() == 1 && d.bank.quantizers[i].price == 0.0;
  });
  const C0Breakdown c0 = evaluate_C0(d, s.theta_star);
  return {all_null && c0.price == 0.0 && c0.reduction == 0.0,
          std::string(all_null ? "all 50 stages null" : "non-null stage selected") +
              ", price part " + sci(c0.price)};
}

Outcome estimator_identity() {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<int> pdim(1, 2);
  std::uniform_int_distribution<int> horizon(6, 12);
  double worst = 0.0;
  int out_of_order = 0;
  for (int trial = 0; trial < 100; ++trial) {
    RandomScenarioOptions o;
    o.n = dim(rng);
    o.m = dim(rng);
    o.p = pdim(rng);
    o.horizon = horizon(rng);
    const ScenarioModel m = random_scenario(rng, o);
    std::vector<QuantizerSpec> specs;
    for (int levels : {1, 2, 4, 8}) {
      specs.push_back(random_partition(rng, m.p(), levels, 1.0, "L" + std::to_string(levels)));
      specs.back().original_index = static_cast<int>(specs.size()) - 1;
    }
    const OfflineDesign d = build_design(m, make_bank(specs, 1));  // delays 0,1,2,3
    std::uniform_int_distribution<int> pick(0, 3);
    std::vector<int> theta(m.horizon);
    for (int& v : theta) v = pick(rng);
    // Delays 3, 1, 1, 2 at the start: origin 1 overtakes origin 0, and
    // origins 0 and 2 arrive together.
    theta[0] = 3;
    theta[1] = 1;
    theta[2] = 1;
    theta[3] = 2;
    const TrajectoryRecord rec = run_trial(d, theta, trial_seed(808, trial));
    std::vector<ChannelMessage> messages;
    for (int k = 0; k < m.horizon; ++k) {
      const int cell = quantize(d.bank.quantizers[theta[k]], rec.innovations[k]);
      messages.push_back(make_message(theta[k], cell, k, d.bank.delays));
    }
    for (int t = 0; t < m.horizon; ++t) {
      const Vector batch = batch_estimate(messages, rec.inputs, d.stats, d.moments, t);
      worst = std::max(worst, max_abs(batch - rec.estimates[t]) / (1.0 + max_abs(batch)));
    }
    out_of_order += rec.arrivals[2] == std::vector<int>{1} && rec.arrivals[3] == std::vector<int>{0, 2};
  }
  return {worst <= 1e-12 && out_of_order == 100,
          "100 trajectories, out-of-order pattern in " + std::to_string(out_of_order) +
              ", max scaled diff " + sci(worst) + " (limit 1e-12)"};
}

Outcome error_moment_formula() {
  const int T = 50;
  const int N = 10000;
  const OfflineDesign d = build_design(testing::two_state_scenario(T), testing::sign_bank(1));
  const std::vector<int> theta = solve_schedule(d).theta_star;
  std::vector<Matrix> acc(T, Matrix::Zero(2, 2));
  for (int i = 0; i < N; ++i) {
    const TrajectoryRecord r = run_trial(d, theta, trial_seed(909, i));
    for (int t = 0; t < T; ++t) {
      const Vector e = r.states[t] - r.estimates[t];
      acc[t] += e * e.transpose();
    }
  }
  double worst = 0.0;
  int worst_t = 0;
  for (int t = 0; t < T; ++t) {
    const Matrix theory = error_second_moment(theta, d.stats, d.moments, d.bank.delays, t);
    const double err = linalg::relative_frobenius(acc[t] / N, theory);
    if (err > worst) {
      worst = err;
      worst_t = t;
    }
  }
  return {worst <= 0.05,
          "T=50, max rel Frobenius err " + sci(worst) + " at t=" + std::to_string(worst_t) +
              " (limit 5e-2)"};
}

Outcome special_cases() {
  ScenarioDescription raw = testing::two_state_scenario(50).description();
  raw.C = Matrix::Identity(2, 2);
  raw.V.setZero();
  const OfflineDesign full = build_design(validate_scenario(raw), testing::sign_bank(1));
  const Matrix general = beta_coefficients(full.ntilde, full.moments, full.bank.delays);
  const auto ups = upsilon_recursion(full.riccati.N, full.model.A);
  const Matrix shortcut = full_observation_beta(ups, full.model.A, full.moments, full.bank.delays);
  const double scale = std::max(1.0, max_abs(general));
  const double full_err = max_abs(general - shortcut) / scale;

  const OfflineDesign d = build_design(testing::two_state_scenario(50), testing::sign_bank(1));
  double const_err = 0.0;
  for (int delay = 0; delay <= 3; ++delay) {
    const Matrix g = beta_coefficients(d.ntilde, d.moments, std::vector<int>(3, delay));
    const Matrix h = constant_delay_beta(d.ntilde, d.moments, delay);
    const_err = std::max(const_err, max_abs(g - h) / std::max(1.0, max_abs(g)));
  }
  return {full_err <= 1e-9 && const_err <= 1e-10,
          "Upsilon route rel err " + sci(full_err) + " (limit 1e-9), H(t,d) route rel err " +
              sci(const_err) + " (limit 1e-10)"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "riccati-oracle-equivalence", 5, riccati_oracle_equivalence},
      {2, "innovation-whiteness-and-covariance", 60, innovation_whiteness},
      {3, "selection-decoupling-vs-brute-force", 30, selection_decoupling},
      {4, "cell-moment-accuracy", 10, cell_moment_accuracy},
      {5, "end-to-end-cost-identity", 120, end_to_end_cost},
      {6, "delay-sensitivity", 10, delay_sensitivity},
      {7, "open-loop-null-quantizer", 5, open_loop_null_quantizer},
      {8, "estimator-incremental-vs-batch", 10, estimator_identity},
      {9, "error-second-moment", 60, error_moment_formula},
      {10, "special-case-consistency", 5, special_cases},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds < c.budget_seconds;
    const bool passed = o.passed && in_budget;
    failures += !passed;
    char timing[64];
    std::snprintf(timing, sizeof(timing), "%.2fs of %.0fs", seconds, c.budget_seconds);
    std::cout << (passed ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << ": "
              << o.detail << " [" << timing << (in_budget ? "" : ", over budget") << "]\n";
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
