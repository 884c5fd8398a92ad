#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qflqg/innovation.hpp"
#include "qflqg/model.hpp"

namespace qflqg {

// Half-open interval [lower, upper); bounds may be infinite.
struct Interval {
  double lower;
  double upper;

  bool contains(double x) const { return lower <= x && x < upper; }
};

// Axis-aligned cell of a partition of R^p.
struct Box {
  std::vector<Interval> sides;

  int dimension() const { return static_cast<int>(sides.size()); }
  bool contains(const Vector& x) const;
  bool overlaps(const Box& other) const;
};

struct QuantizerSpec {
  std::string name;
  std::vector<Box> cells;
  double price = 0.0;
  int original_index = 0;  // position in the input file, 0-based

  int levels() const { return static_cast<int>(cells.size()); }
};

// Quantizers are kept sorted by delay (stable, so equal delays keep their
// input order). `index` arguments throughout the library refer to this
// sorted order; original_index maps back for reporting.
struct QuantizerBank {
  std::vector<QuantizerSpec> quantizers;
  std::vector<int> delays;
  int bit_rate = 1;

  int size() const { return static_cast<int>(quantizers.size()); }
  int dimension() const;
  std::vector<double> prices() const;
  int max_delay() const;
};

// Number of bits needed to index `levels` cells: ceil(log2(levels)).
int bits_for_levels(int levels);

// d_i = ceil(ceil(log2 l_i) / r_b); zero for a single-level quantizer.
std::vector<int> compute_delays(const std::vector<int>& levels, int bit_rate);

// Validates the cells, computes delays and applies the sorted-delay order.
QuantizerBank make_bank(std::vector<QuantizerSpec> quantizers, int bit_rate);

QuantizerBank load_bank(const std::filesystem::path& path);

// Single-cell zero-price quantizer: choosing it means sending nothing.
QuantizerSpec null_quantizer(int dimension, std::string name = "null");

// Half-line quantizer splitting every coordinate at zero (2^p cells).
QuantizerSpec orthant_quantizer(int dimension, double price,
                                std::string name = "orthant");

// Returns the 0-based cell index containing xi (closed below, open above).
int quantize(const QuantizerSpec& spec, const Vector& xi);

struct QuadratureConfig {
  int order = 8;                 // Gauss-Legendre points per panel
  int max_nodes_per_dim = 1024;  // refinement cap
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 1e-15;
  double clip_sigmas = 10.0;  // infinite bounds clipped at this many sigma
  int max_dimension = 3;
};

struct CellMoments {
  std::vector<double> probs;
  std::vector<Vector> means;
};

// Probability and conditional mean of N(0, M) on each box, by tensor-product
// composite Gauss-Legendre quadrature with panel doubling.
CellMoments cell_moments(const Matrix& M, const std::vector<Box>& cells,
                         const QuadratureConfig& config = {});

// F = sum_j prob_j mean_j mean_j', the covariance of the decoded mean.
Matrix reduction_covariance(const std::vector<double>& probs,
                            const std::vector<Vector>& means);

struct CellMomentEntry {
  std::vector<double> probs;
  std::vector<Vector> means;
  Matrix F;     // covariance removed by the quantizer
  Matrix Mcal;  // residual M_t - F
};

// entries[t][i] for time t and (sorted) quantizer i.
struct CellMomentTable {
  std::vector<std::vector<CellMomentEntry>> entries;
  std::vector<Matrix> M;

  int horizon() const { return static_cast<int>(entries.size()); }
  int size() const {
    return entries.empty() ? 0 : static_cast<int>(entries.front().size());
  }
  const CellMomentEntry& at(int t, int i) const;
  const Matrix& F(int t, int i) const { return at(t, i).F; }
  const Matrix& Mcal(int t, int i) const { return at(t, i).Mcal; }
  const Vector& mean(int t, int i, int j) const;
};

CellMomentTable build_moment_tables(const QuantizerBank& bank,
                                    const InnovationStatistics& stats,
                                    const QuadratureConfig& config = {});

}  // namespace qflqg
