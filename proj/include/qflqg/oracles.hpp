#pragma once

#include <random>
#include <vector>

#include "qflqg/model.hpp"
#include "qflqg/quantizer.hpp"
#include "qflqg/synthesis.hpp"

namespace qflqg::oracle {

// Finite-horizon LQ value iteration written as a least-squares problem per
// stage: min_u |R^{1/2} u|^2 + |P^{1/2}(Ax + Bu)|^2, with the cost-to-go
// updated in Joseph form. Shares no code with solve_riccati.
RiccatiSolution riccati_value_iteration(const ScenarioModel& model);

// Innovations of an observed output record by Gram-matrix projection onto
// all earlier outputs, after removing the input-driven mean.
std::vector<Vector> batch_innovations(const ScenarioModel& model,
                                      const std::vector<Vector>& outputs,
                                      const std::vector<Vector>& inputs);

// P(x1 >= 0, x2 >= 0) for a standard bivariate normal with correlation rho.
double quadrant_probability(double rho);

// E[x | x >= 0] for x ~ N(0, sigma^2).
double half_line_mean(double sigma);

// Sample-based probabilities and conditional means of N(0, M) on cells.
CellMoments sampled_cell_moments(const Matrix& M, const QuantizerSpec& spec,
                                 int samples, std::mt19937_64& rng);

}  // namespace qflqg::oracle
