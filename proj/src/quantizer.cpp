#include "qflqg/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "qflqg/error.hpp"
#include "qflqg/linalg.hpp"

namespace qflqg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPartitionTolerance = 1e-6;
constexpr double kPsdFloor = -1e-9;
}  // namespace

bool Box::contains(const Vector& x) const {
  if (x.size() != dimension()) return false;
  for (int d = 0; d < dimension(); ++d) {
    if (!sides[d].contains(x[d])) return false;
  }
  return true;
}

bool Box::overlaps(const Box& other) const {
  for (int d = 0; d < dimension(); ++d) {
    const double lo = std::max(sides[d].lower, other.sides[d].lower);
    const double hi = std::min(sides[d].upper, other.sides[d].upper);
    if (!(lo < hi)) return false;
  }
  return true;
}

int QuantizerBank::dimension() const {
  if (quantizers.empty() || quantizers.front().cells.empty()) return 0;
  return quantizers.front().cells.front().dimension();
}

std::vector<double> QuantizerBank::prices() const {
  std::vector<double> out;
  out.reserve(quantizers.size());
  for (const auto& q : quantizers) out.push_back(q.price);
  return out;
}

int QuantizerBank::max_delay() const {
  return delays.empty() ? 0 : *std::max_element(delays.begin(), delays.end());
}

int bits_for_levels(int levels) {
  int bits = 0;
  long long capacity = 1;
  while (capacity < levels) {
    capacity <<= 1;
    ++bits;
  }
  return bits;
}

std::vector<int> compute_delays(const std::vector<int>& levels, int bit_rate) {
  if (bit_rate < 1) {
    throw ValidationError(
        {{ErrorCode::kParseError, "bit_rate", "bit rate must be >= 1"}});
  }
  std::vector<int> delays;
  delays.reserve(levels.size());
  for (int l : levels) {
    if (l < 1) {
      throw ValidationError(
          {{ErrorCode::kInvalidPartition, "levels", "levels must be >= 1"}});
    }
    const int bits = bits_for_levels(l);
    delays.push_back((bits + bit_rate - 1) / bit_rate);
  }
  return delays;
}

QuantizerBank make_bank(std::vector<QuantizerSpec> quantizers, int bit_rate) {
  std::vector<ValidationIssue> issues;
  if (quantizers.empty()) {
    issues.push_back(
        {ErrorCode::kInvalidPartition, "quantizers", "bank is empty"});
    throw ValidationError(std::move(issues));
  }
  const int p = quantizers.front().cells.empty()
                    ? 0
                    : quantizers.front().cells.front().dimension();
  for (const auto& q : quantizers) {
    const std::string field = "quantizers[" + q.name + "]";
    if (q.cells.empty()) {
      issues.push_back({ErrorCode::kInvalidPartition, field, "no cells"});
      continue;
    }
    if (!(q.price >= 0.0) || !std::isfinite(q.price)) {
      issues.push_back({ErrorCode::kParseError, field,
                        "price must be finite and nonnegative"});
    }
    for (std::size_t j = 0; j < q.cells.size(); ++j) {
      const Box& cell = q.cells[j];
      if (cell.dimension() != p || p == 0) {
        issues.push_back({ErrorCode::kDimensionMismatch, field,
                          "cell " + std::to_string(j) +
                              " has inconsistent dimension"});
        continue;
      }
      for (const auto& side : cell.sides) {
        if (std::isnan(side.lower) || std::isnan(side.upper) ||
            !(side.lower < side.upper)) {
          issues.push_back({ErrorCode::kInvalidPartition, field,
                            "cell " + std::to_string(j) +
                                " has an empty or invalid interval"});
          break;
        }
      }
    }
    if (!issues.empty()) continue;
    for (std::size_t a = 0; a < q.cells.size(); ++a) {
      for (std::size_t b = a + 1; b < q.cells.size(); ++b) {
        if (q.cells[a].overlaps(q.cells[b])) {
          issues.push_back({ErrorCode::kInvalidPartition, field,
                            "cells " + std::to_string(a) + " and " +
                                std::to_string(b) + " overlap"});
        }
      }
    }
  }
  if (bit_rate < 1) {
    issues.push_back(
        {ErrorCode::kParseError, "bit_rate", "bit rate must be >= 1"});
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  std::vector<int> levels;
  for (const auto& q : quantizers) levels.push_back(q.levels());
  const std::vector<int> delays = compute_delays(levels, bit_rate);

  std::vector<std::size_t> order(quantizers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return delays[a] < delays[b];
                   });
  QuantizerBank bank;
  bank.bit_rate = bit_rate;
  for (std::size_t idx : order) {
    bank.quantizers.push_back(std::move(quantizers[idx]));
    bank.delays.push_back(delays[idx]);
  }
  return bank;
}

namespace {

using nlohmann::json;

double parse_bound(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ValidationError({{ErrorCode::kParseError, "cells",
                          "interval bound must be a number, \"inf\" or "
                          "\"-inf\", got " + value.dump()}});
}

}  // namespace

QuantizerBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError(
        {{ErrorCode::kParseError, path.string(), "cannot open file"}});
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError({{ErrorCode::kParseError, path.string(), e.what()}});
  }
  if (!doc.contains("bit_rate") || !doc.at("bit_rate").is_number_integer()) {
    throw ValidationError(
        {{ErrorCode::kParseError, "bit_rate", "missing integer bit_rate"}});
  }
  if (!doc.contains("quantizers") || !doc.at("quantizers").is_array()) {
    throw ValidationError(
        {{ErrorCode::kParseError, "quantizers", "missing quantizer list"}});
  }
  std::vector<QuantizerSpec> specs;
  int index = 0;
  for (const json& q : doc.at("quantizers")) {
    QuantizerSpec spec;
    spec.original_index = index;
    spec.name = q.value("name", "Q" + std::to_string(index + 1));
    if (!q.contains("price") || !q.at("price").is_number()) {
      throw ValidationError(
          {{ErrorCode::kParseError, spec.name, "missing numeric price"}});
    }
    spec.price = q.at("price").get<double>();
    if (!q.contains("cells") || !q.at("cells").is_array()) {
      throw ValidationError(
          {{ErrorCode::kParseError, spec.name, "missing cell list"}});
    }
    for (const json& cell : q.at("cells")) {
      Box box;
      if (!cell.is_array()) {
        throw ValidationError(
            {{ErrorCode::kParseError, spec.name, "cell must be an array"}});
      }
      for (const json& side : cell) {
        if (!side.is_array() || side.size() != 2) {
          throw ValidationError({{ErrorCode::kParseError, spec.name,
                                  "interval must be [lower, upper]"}});
        }
        box.sides.push_back({parse_bound(side[0]), parse_bound(side[1])});
      }
      spec.cells.push_back(std::move(box));
    }
    specs.push_back(std::move(spec));
    ++index;
  }
  return make_bank(std::move(specs), doc.at("bit_rate").get<int>());
}

QuantizerSpec null_quantizer(int dimension, std::string name) {
  QuantizerSpec spec;
  spec.name = std::move(name);
  spec.cells.push_back(Box{std::vector<Interval>(dimension, {-kInf, kInf})});
  return spec;
}

QuantizerSpec orthant_quantizer(int dimension, double price,
                                std::string name) {
  QuantizerSpec spec;
  spec.name = std::move(name);
  spec.price = price;
  const int count = 1 << dimension;
  for (int mask = 0; mask < count; ++mask) {
    Box box;
    for (int d = 0; d < dimension; ++d) {
      const bool negative = (mask >> d) & 1;
      box.sides.push_back(negative ? Interval{-kInf, 0.0}
                                   : Interval{0.0, kInf});
    }
    spec.cells.push_back(std::move(box));
  }
  return spec;
}

int quantize(const QuantizerSpec& spec, const Vector& xi) {
  for (int j = 0; j < spec.levels(); ++j) {
    if (spec.cells[j].contains(xi)) return j;
  }
  throw Error(ErrorCode::kNoCellFound,
              "no cell of quantizer '" + spec.name + "' contains the input");
}

namespace {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Golub-Welsch: eigen-decomposition of the Jacobi matrix.
GaussLegendre gauss_legendre(int order) {
  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  GaussLegendre rule;
  for (int k = 0; k < order; ++k) {
    rule.nodes.push_back(solver.eigenvalues()[k]);
    const double v = solver.eigenvectors()(0, k);
    rule.weights.push_back(2.0 * v * v);
  }
  return rule;
}

struct Axis {
  std::vector<double> x;
  std::vector<double> w;
};

Axis composite_axis(const GaussLegendre& rule, double lo, double hi,
                    int panels) {
  Axis axis;
  const double width = (hi - lo) / panels;
  for (int k = 0; k < panels; ++k) {
    const double a = lo + k * width;
    const double half = 0.5 * width;
    const double mid = a + half;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      axis.x.push_back(mid + half * rule.nodes[q]);
      axis.w.push_back(half * rule.weights[q]);
    }
  }
  return axis;
}

// Mass and first moment of the density over a clipped box.
struct RawMoments {
  double mass = 0.0;
  Vector first;
};

RawMoments integrate_box(const std::vector<Axis>& axes, const Matrix& precision,
                         double normalizer) {
  const int p = static_cast<int>(axes.size());
  RawMoments out;
  out.first = Vector::Zero(p);
  std::vector<std::size_t> idx(p, 0);
  Vector xi(p);
  while (true) {
    double weight = normalizer;
    for (int d = 0; d < p; ++d) {
      xi[d] = axes[d].x[idx[d]];
      weight *= axes[d].w[idx[d]];
    }
    double quad = 0.0;
    for (int r = 0; r < p; ++r) {
      double row = 0.0;
      for (int c = 0; c < p; ++c) row += precision(r, c) * xi[c];
      quad += xi[r] * row;
    }
    const double value = weight * std::exp(-0.5 * quad);
    out.mass += value;
    for (int d = 0; d < p; ++d) out.first[d] += value * xi[d];
    int d = p - 1;
    while (d >= 0 && ++idx[d] == axes[d].x.size()) {
      idx[d] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return out;
}

bool converged(const RawMoments& prev, const RawMoments& next,
               const QuadratureConfig& config, double& error) {
  error = std::abs(next.mass - prev.mass);
  bool ok = error <= config.relative_tolerance * std::abs(next.mass) +
                         config.absolute_tolerance;
  for (Eigen::Index d = 0; d < next.first.size(); ++d) {
    const double diff = std::abs(next.first[d] - prev.first[d]);
    error = std::max(error, diff);
    ok = ok && diff <= config.relative_tolerance * std::abs(next.first[d]) +
                           config.absolute_tolerance;
  }
  return ok;
}

bool is_whole_space(const Box& box) {
  for (const auto& side : box.sides) {
    if (side.lower != -kInf || side.upper != kInf) return false;
  }
  return true;
}

}  // namespace

CellMoments cell_moments(const Matrix& M, const std::vector<Box>& cells,
                         const QuadratureConfig& config) {
  const int p = static_cast<int>(M.rows());
  if (p > config.max_dimension) {
    throw Error(ErrorCode::kUnsupportedDimension,
                "cell quadrature supports p <= " +
                    std::to_string(config.max_dimension) + ", got p=" +
                    std::to_string(p));
  }
  for (const auto& cell : cells) {
    if (cell.dimension() != p) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "cell dimension differs from the covariance");
    }
  }
  CellMoments out;
  if (cells.size() == 1 && is_whole_space(cells.front())) {
    out.probs = {1.0};
    out.means = {Vector::Zero(p)};
    return out;
  }

  if (M.isZero(0.0)) {
    // Point mass at the origin.
    const Vector origin = Vector::Zero(p);
    for (const auto& cell : cells) {
      Vector nearest(p);
      for (int d = 0; d < p; ++d) {
        nearest[d] = std::clamp(0.0, cell.sides[d].lower,
                                std::nextafter(cell.sides[d].upper, -kInf));
      }
      const bool hit = cell.contains(origin);
      out.probs.push_back(hit ? 1.0 : 0.0);
      out.means.push_back(hit ? origin : nearest);
    }
    return out;
  }

  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPsd,
                "cell_moments needs a positive definite covariance");
  }
  const Matrix precision = llt.solve(Matrix::Identity(p, p));
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double normalizer =
      std::exp(-0.5 * (p * std::log(2.0 * std::numbers::pi) + log_det));
  const Vector clip = config.clip_sigmas * M.diagonal().cwiseSqrt();
  const GaussLegendre rule = gauss_legendre(config.order);

  for (std::size_t j = 0; j < cells.size(); ++j) {
    const Box& cell = cells[j];
    std::vector<double> lo(p), hi(p);
    bool empty = false;
    for (int d = 0; d < p; ++d) {
      lo[d] = std::max(cell.sides[d].lower, -clip[d]);
      hi[d] = std::min(cell.sides[d].upper, clip[d]);
      if (!(lo[d] < hi[d])) empty = true;
    }
    if (empty) {
      // Beyond the clipping radius: no mass. Report the box point nearest
      // the origin so the decoder still has a finite representative.
      Vector nearest(p);
      for (int d = 0; d < p; ++d) {
        nearest[d] = std::clamp(0.0, cell.sides[d].lower,
                                std::nextafter(cell.sides[d].upper, -kInf));
      }
      out.probs.push_back(0.0);
      out.means.push_back(nearest);
      continue;
    }

    RawMoments prev;
    bool have_prev = false;
    bool done = false;
    double error = kInf;
    for (int panels = 2; panels * config.order <= config.max_nodes_per_dim;
         panels *= 2) {
      std::vector<Axis> axes;
      for (int d = 0; d < p; ++d) {
        axes.push_back(composite_axis(rule, lo[d], hi[d], panels));
      }
      RawMoments next = integrate_box(axes, precision, normalizer);
      if (have_prev && converged(prev, next, config, error)) {
        prev = std::move(next);
        done = true;
        break;
      }
      prev = std::move(next);
      have_prev = true;
    }
    if (!done) {
      std::ostringstream msg;
      msg << "cell " << j << " did not converge; last change " << error;
      throw Error(ErrorCode::kQuadratureNotConverged, msg.str());
    }
    out.probs.push_back(prev.mass);
    if (prev.mass > 0.0) {
      out.means.push_back(prev.first / prev.mass);
    } else {
      Vector nearest(p);
      for (int d = 0; d < p; ++d) nearest[d] = std::clamp(0.0, lo[d], hi[d]);
      out.means.push_back(nearest);
    }
  }
  return out;
}

Matrix reduction_covariance(const std::vector<double>& probs,
                            const std::vector<Vector>& means) {
  if (means.empty()) return Matrix();
  const auto p = means.front().size();
  Matrix F = Matrix::Zero(p, p);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    F += probs[j] * means[j] * means[j].transpose();
  }
  return linalg::symmetrized(F);
}

const CellMomentEntry& CellMomentTable::at(int t, int i) const {
  if (t < 0 || t >= horizon() || i < 0 || i >= size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "moment table lookup (t=" + std::to_string(t) + ", i=" +
                    std::to_string(i) + ") out of range");
  }
  return entries[t][i];
}

const Vector& CellMomentTable::mean(int t, int i, int j) const {
  const CellMomentEntry& entry = at(t, i);
  if (j < 0 || j >= static_cast<int>(entry.means.size())) {
    throw Error(ErrorCode::kUnknownCell,
                "cell " + std::to_string(j) + " of quantizer " +
                    std::to_string(i) + " does not exist");
  }
  return entry.means[j];
}

CellMomentTable build_moment_tables(const QuantizerBank& bank,
                                    const InnovationStatistics& stats,
                                    const QuadratureConfig& config) {
  const int T = stats.horizon();
  const int count = bank.size();
  if (count > 0 && bank.dimension() != stats.C.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "quantizer cells live in R^" +
                    std::to_string(bank.dimension()) +
                    " but the innovation has dimension " +
                    std::to_string(stats.C.rows()));
  }
  CellMomentTable table;
  table.M = stats.M;
  table.entries.resize(T);
  for (int t = 0; t < T; ++t) {
    const Matrix& M = stats.M[t];
    for (int i = 0; i < count; ++i) {
      const QuantizerSpec& q = bank.quantizers[i];
      const auto where = [&] {
        return "(t=" + std::to_string(t) + ", i=" + std::to_string(i) + ")";
      };
      CellMoments moments;
      try {
        moments = cell_moments(M, q.cells, config);
      } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " at " + where());
      }
      CellMomentEntry entry;
      entry.F = reduction_covariance(moments.probs, moments.means);
      if (q.levels() == 1) entry.F = Matrix::Zero(M.rows(), M.cols());
      entry.Mcal = linalg::symmetrized(M - entry.F);
      entry.probs = std::move(moments.probs);
      entry.means = std::move(moments.means);

      const double mass =
          std::accumulate(entry.probs.begin(), entry.probs.end(), 0.0);
      Vector centroid = Vector::Zero(M.rows());
      for (std::size_t j = 0; j < entry.probs.size(); ++j) {
        centroid += entry.probs[j] * entry.means[j];
      }
      if (std::abs(mass - 1.0) > kPartitionTolerance ||
          centroid.cwiseAbs().maxCoeff() > kPartitionTolerance) {
        std::ostringstream msg;
        msg << "quantizer '" << q.name << "' is not a partition of R^p "
            << where() << ": total probability " << mass;
        throw Error(ErrorCode::kInvalidPartition, msg.str());
      }
      if (linalg::min_eigenvalue(entry.F) < kPsdFloor ||
          linalg::min_eigenvalue(entry.Mcal) < kPsdFloor) {
        throw Error(ErrorCode::kInvalidPartition,
                    "covariance reduction is not PSD or exceeds M_t " +
                        where());
      }
      table.entries[t].push_back(std::move(entry));
    }
  }
  return table;
}

}  // namespace qflqg
