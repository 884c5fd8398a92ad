#pragma once

#include <limits>
#include <string>
#include <vector>

#include "qflqg/model.hpp"
#include "qflqg/quantizer.hpp"

namespace qflqg::testing {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Two-state unstable plant observed through two mixed outputs.
inline ScenarioModel two_state_scenario(int horizon = 50) {
  ScenarioDescription raw;
  raw.A = (Matrix(2, 2) << 1.01, 0.5, 0.0, 1.1).finished();
  raw.B = (Matrix(2, 2) << 0.1, 0.0, 0.0, 0.15).finished();
  raw.C = (Matrix(2, 2) << 1.0, 0.0, 1.0, 1.0).finished();
  raw.W = 0.5 * Matrix::Identity(2, 2);
  raw.V = 0.25 * Matrix::Identity(2, 2);
  raw.Sigma_x = Matrix::Identity(2, 2);
  raw.mu0 = Vector::Zero(2);
  raw.Q1 = 0.5 * Matrix::Identity(2, 2);
  raw.Q2 = 0.5 * Matrix::Identity(2, 2);
  raw.R = 0.5 * Matrix::Identity(2, 2);
  raw.horizon = horizon;
  return validate_scenario(raw);
}

inline Box box2(double a, double b, double c, double d) {
  return Box{{Interval{a, b}, Interval{c, d}}};
}

// Sign of the first coordinate (2 cells), quadrants (4 cells), and quadrants
// with the first coordinate further split at +-1 (8 cells).
inline std::vector<QuantizerSpec> sign_quantizers(
    const std::vector<double>& prices = {100, 200, 300}) {
  QuantizerSpec q1{"Q1", {box2(0, kInf, -kInf, kInf), box2(-kInf, 0, -kInf, kInf)},
                   prices[0], 0};
  QuantizerSpec q2{"Q2",
                   {box2(0, kInf, 0, kInf), box2(0, kInf, -kInf, 0),
                    box2(-kInf, 0, 0, kInf), box2(-kInf, 0, -kInf, 0)},
                   prices[1], 1};
  QuantizerSpec q3{"Q3",
                   {box2(0, 1, 0, kInf), box2(1, kInf, 0, kInf),
                    box2(0, 1, -kInf, 0), box2(1, kInf, -kInf, 0),
                    box2(-1, 0, 0, kInf), box2(-kInf, -1, 0, kInf),
                    box2(-1, 0, -kInf, 0), box2(-kInf, -1, -kInf, 0)},
                   prices[2], 2};
  return {q1, q2, q3};
}

inline QuantizerBank sign_bank(int bit_rate,
                               const std::vector<double>& prices = {100, 200,
                                                                    300}) {
  return make_bank(sign_quantizers(prices), bit_rate);
}

inline QuantizerBank open_loop_bank(int bit_rate, double price) {
  auto specs = sign_quantizers({price, price, price});
  for (auto& s : specs) ++s.original_index;
  QuantizerSpec null = null_quantizer(2);
  null.original_index = 0;
  specs.insert(specs.begin(), null);
  return make_bank(std::move(specs), bit_rate);
}

}  // namespace qflqg::testing
