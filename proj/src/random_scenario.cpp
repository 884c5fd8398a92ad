#include "qflqg/random_scenario.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace qflqg {

namespace {

Matrix gaussian_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal;
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

Matrix random_spd(std::mt19937_64& rng, int size, double floor) {
  const Matrix g = gaussian_matrix(rng, size, size);
  return 0.5 * g * g.transpose() / size +
         floor * Matrix::Identity(size, size);
}

}  // namespace

ScenarioModel random_scenario(std::mt19937_64& rng,
                              const RandomScenarioOptions& options) {
  std::uniform_real_distribution<double> radius(0.5,
                                                options.max_spectral_radius);
  const int n = options.n;
  const int p = options.full_observation ? n : options.p;
  ScenarioDescription raw;
  raw.A = gaussian_matrix(rng, n, n);
  const double rho = Eigen::EigenSolver<Matrix>(raw.A, false)
                         .eigenvalues()
                         .cwiseAbs()
                         .maxCoeff();
  raw.A *= radius(rng) / std::max(rho, 1e-6);
  raw.B = gaussian_matrix(rng, n, options.m);
  if (options.full_observation) {
    raw.C = Matrix::Identity(n, n);
    raw.V = Matrix::Zero(n, n);
  } else {
    raw.C = gaussian_matrix(rng, p, n);
    raw.V = random_spd(rng, p, 0.1);
  }
  raw.W = random_spd(rng, n, 0.1);
  raw.Sigma_x = random_spd(rng, n, 0.2);
  raw.mu0 = gaussian_matrix(rng, n, 1);
  raw.Q1 = random_spd(rng, n, 0.1);
  raw.Q2 = random_spd(rng, n, 0.1);
  raw.R = random_spd(rng, options.m, 0.1);
  raw.horizon = options.horizon;
  return validate_scenario(raw);
}

QuantizerSpec random_partition(std::mt19937_64& rng, int p, int levels,
                               double price, std::string name) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::normal_distribution<double> normal;
  std::vector<Box> cells{Box{std::vector<Interval>(p, {-kInf, kInf})}};
  while (static_cast<int>(cells.size()) < levels) {
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    std::uniform_int_distribution<int> axis_pick(0, p - 1);
    Box& cell = cells[pick(rng)];
    const int axis = axis_pick(rng);
    const Interval side = cell.sides[axis];
    double cut = normal(rng);
    if (std::isfinite(side.lower) && std::isfinite(side.upper)) {
      std::uniform_real_distribution<double> inside(side.lower, side.upper);
      cut = inside(rng);
    } else if (std::isfinite(side.lower)) {
      cut = side.lower + std::abs(cut) + 0.05;
    } else if (std::isfinite(side.upper)) {
      cut = side.upper - std::abs(cut) - 0.05;
    }
    Box upper = cell;
    cell.sides[axis].upper = cut;
    upper.sides[axis].lower = cut;
    cells.push_back(std::move(upper));
  }
  QuantizerSpec spec;
  spec.name = std::move(name);
  spec.price = price;
  spec.cells = std::move(cells);
  return spec;
}

QuantizerBank random_bank(std::mt19937_64& rng, int p, int count,
                          const std::vector<int>& level_choices, int bit_rate,
                          double max_price) {
  std::uniform_int_distribution<std::size_t> pick(0, level_choices.size() - 1);
  std::uniform_real_distribution<double> price(0.0, max_price);
  std::vector<QuantizerSpec> specs;
  for (int i = 0; i < count; ++i) {
    const int levels = level_choices[pick(rng)];
    QuantizerSpec spec = random_partition(rng, p, levels, price(rng),
                                          "Q" + std::to_string(i + 1));
    spec.original_index = i;
    specs.push_back(std::move(spec));
  }
  return make_bank(std::move(specs), bit_rate);
}

}  // namespace qflqg
