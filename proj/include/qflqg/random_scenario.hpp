#pragma once

#include <random>
#include <vector>

#include "qflqg/model.hpp"
#include "qflqg/quantizer.hpp"

namespace qflqg {

struct RandomScenarioOptions {
  int n = 2;
  int m = 2;
  int p = 2;
  int horizon = 5;
  double max_spectral_radius = 1.1;
  bool full_observation = false;  // C = I, V = 0 (forces p = n)
};

// Random well-posed scenario for property checks.
ScenarioModel random_scenario(std::mt19937_64& rng,
                              const RandomScenarioOptions& options);

// Random axis-aligned partition of R^p into `levels` boxes, built by
// repeatedly splitting a cell along one coordinate.
QuantizerSpec random_partition(std::mt19937_64& rng, int p, int levels,
                               double price, std::string name);

// Bank whose level counts are drawn from `level_choices`.
QuantizerBank random_bank(std::mt19937_64& rng, int p, int count,
                          const std::vector<int>& level_choices, int bit_rate,
                          double max_price);

}  // namespace qflqg
