#include "qflqg/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qflqg/error.hpp"
#include "qflqg/linalg.hpp"

namespace qflqg {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-10;

std::string dims(const Matrix& m) {
  std::ostringstream out;
  out << m.rows() << "x" << m.cols();
  return out.str();
}

void expect_shape(std::vector<ValidationIssue>& issues, const char* name,
                  const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << "expected " << rows << "x" << cols << ", got " << dims(m);
    issues.push_back({ErrorCode::kDimensionMismatch, name, msg.str()});
  }
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

// Symmetrizes and clamps tiny negative eigenvalues. Eigenvalues within
// roundoff of zero are left alone so a second pass is a no-op.
Matrix checked_psd(std::vector<ValidationIssue>& issues, const char* name,
                   const Matrix& m, bool positive_definite) {
  if (!all_finite(m)) {
    issues.push_back({ErrorCode::kNotPsd, name, "non-finite entry"});
    return m;
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (linalg::max_asymmetry(m) > kSymmetryTolerance * scale) {
    issues.push_back({ErrorCode::kNotPsd, name, "matrix is not symmetric"});
    return m;
  }
  Matrix sym = linalg::symmetrized(m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const double lo = solver.eigenvalues().minCoeff();
  if (positive_definite) {
    if (!(lo > 0.0)) {
      std::ostringstream msg;
      msg << "matrix must be positive definite (min eigenvalue " << lo << ")";
      issues.push_back({ErrorCode::kNotPsd, name, msg.str()});
    }
    return sym;
  }
  if (lo < -kPsdTolerance) {
    std::ostringstream msg;
    msg << "matrix must be positive semidefinite (min eigenvalue " << lo
        << ")";
    issues.push_back({ErrorCode::kNotPsd, name, msg.str()});
    return sym;
  }
  if (lo < -1e-13 * scale) {
    const Vector clamped = solver.eigenvalues().cwiseMax(0.0);
    sym = linalg::symmetrized(solver.eigenvectors() * clamped.asDiagonal() *
                              solver.eigenvectors().transpose());
  }
  return sym;
}

}  // namespace

ScenarioDescription ScenarioModel::description() const {
  return ScenarioDescription{A, B, C, W, V, Sigma_x, mu0, Q1, Q2, R, horizon};
}

bool ScenarioModel::operator==(const ScenarioModel& o) const {
  auto same = [](const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(A, o.A) && same(B, o.B) && same(C, o.C) && same(W, o.W) &&
         same(V, o.V) && same(Sigma_x, o.Sigma_x) && same(mu0, o.mu0) &&
         same(Q1, o.Q1) && same(Q2, o.Q2) && same(R, o.R) &&
         horizon == o.horizon;
}

ScenarioModel validate_scenario(const ScenarioDescription& raw) {
  std::vector<ValidationIssue> issues;
  const Eigen::Index n = raw.A.rows();
  const Eigen::Index m = raw.B.cols();
  const Eigen::Index p = raw.C.rows();

  if (n == 0) issues.push_back({ErrorCode::kDimensionMismatch, "A", "empty"});
  if (m == 0) issues.push_back({ErrorCode::kDimensionMismatch, "B", "empty"});
  if (p == 0) issues.push_back({ErrorCode::kDimensionMismatch, "C", "empty"});
  expect_shape(issues, "A", raw.A, n, n);
  expect_shape(issues, "B", raw.B, n, m);
  expect_shape(issues, "C", raw.C, p, n);
  expect_shape(issues, "W", raw.W, n, n);
  expect_shape(issues, "V", raw.V, p, p);
  expect_shape(issues, "Sigma_x", raw.Sigma_x, n, n);
  expect_shape(issues, "mu0", raw.mu0, n, 1);
  expect_shape(issues, "Q1", raw.Q1, n, n);
  expect_shape(issues, "Q2", raw.Q2, n, n);
  expect_shape(issues, "R", raw.R, m, m);
  if (raw.horizon < 1) {
    issues.push_back({ErrorCode::kNonpositiveHorizon, "T",
                      "horizon must be at least 1"});
  } else if (raw.horizon > std::numeric_limits<int>::max()) {
    issues.push_back({ErrorCode::kNonpositiveHorizon, "T", "horizon too large"});
  }
  if (!raw.A.allFinite() || !raw.B.allFinite() || !raw.C.allFinite() ||
      !raw.mu0.allFinite()) {
    issues.push_back(
        {ErrorCode::kParseError, "A/B/C/mu0", "non-finite entry"});
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  ScenarioModel model;
  model.A = raw.A;
  model.B = raw.B;
  model.C = raw.C;
  model.mu0 = raw.mu0;
  model.horizon = static_cast<int>(raw.horizon);
  model.W = checked_psd(issues, "W", raw.W, false);
  model.V = checked_psd(issues, "V", raw.V, false);
  model.Sigma_x = checked_psd(issues, "Sigma_x", raw.Sigma_x, false);
  model.Q1 = checked_psd(issues, "Q1", raw.Q1, false);
  model.Q2 = checked_psd(issues, "Q2", raw.Q2, false);
  model.R = checked_psd(issues, "R", raw.R, true);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return model;
}

ScenarioModel with_horizon(const ScenarioModel& model, int horizon) {
  ScenarioDescription raw = model.description();
  raw.horizon = horizon;
  return validate_scenario(raw);
}

double stage_cost(const ScenarioModel& model, const Vector& x, const Vector& u,
                  double theta_price) {
  if (x.size() != model.n() || u.size() != model.m()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "stage_cost: state or input has the wrong length");
  }
  return x.dot(model.Q1 * x) + u.dot(model.R * u) + theta_price;
}

double recompute_cost(const ScenarioModel& model,
                      const std::vector<double>& prices,
                      const TrajectoryRecord& record) {
  const int T = model.horizon;
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    total += stage_cost(model, record.states.at(t), record.inputs.at(t),
                        prices.at(record.selections.at(t)));
  }
  const Vector& xT = record.states.at(T);
  return total + xT.dot(model.Q2 * xT);
}

bool trajectory_consistent(const ScenarioModel& model,
                           const std::vector<double>& prices,
                           const TrajectoryRecord& record) {
  const auto T = static_cast<std::size_t>(model.horizon);
  if (record.states.size() != T + 1 || record.inputs.size() != T ||
      record.outputs.size() != T || record.innovations.size() != T ||
      record.selections.size() != T) {
    return false;
  }
  const double replay = recompute_cost(model, prices, record);
  return std::abs(replay - record.realized_cost) <=
         1e-9 * std::max(1.0, std::abs(replay));
}

namespace {

using nlohmann::json;

Matrix parse_matrix(const json& doc, const char* key,
                    std::vector<ValidationIssue>& issues) {
  if (!doc.contains(key)) {
    issues.push_back({ErrorCode::kParseError, key, "missing key"});
    return {};
  }
  const json& value = doc.at(key);
  if (value.is_number()) {
    Matrix m(1, 1);
    m(0, 0) = value.get<double>();
    return m;
  }
  if (!value.is_array() || value.empty()) {
    issues.push_back(
        {ErrorCode::kParseError, key, "expected a non-empty array of rows"});
    return {};
  }
  // A flat array is accepted as a single row.
  const bool flat = !value.front().is_array();
  const std::size_t rows = flat ? 1 : value.size();
  const std::size_t cols = flat ? value.size() : value.front().size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = flat ? value : value[i];
    if (!row.is_array() || row.size() != cols) {
      issues.push_back({ErrorCode::kDimensionMismatch, key, "ragged rows"});
      return {};
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!row[j].is_number()) {
        issues.push_back({ErrorCode::kParseError, key, "non-numeric entry"});
        return {};
      }
      m(i, j) = row[j].get<double>();
    }
  }
  return m;
}

}  // namespace

ScenarioDescription load_scenario_description(
    const std::filesystem::path& path) {
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
  std::vector<ValidationIssue> issues;
  ScenarioDescription raw;
  raw.A = parse_matrix(doc, "A", issues);
  raw.B = parse_matrix(doc, "B", issues);
  raw.C = parse_matrix(doc, "C", issues);
  raw.W = parse_matrix(doc, "W", issues);
  raw.V = parse_matrix(doc, "V", issues);
  raw.Sigma_x = parse_matrix(doc, "Sigma_x", issues);
  const Matrix mu = parse_matrix(doc, "mu0", issues);
  if (mu.size() > 0) {
    if (mu.rows() != 1 && mu.cols() != 1) {
      issues.push_back(
          {ErrorCode::kDimensionMismatch, "mu0", "expected a vector"});
    } else {
      raw.mu0 = Eigen::Map<const Vector>(mu.data(), mu.size());
    }
  }
  raw.Q1 = parse_matrix(doc, "Q1", issues);
  raw.Q2 = parse_matrix(doc, "Q2", issues);
  raw.R = parse_matrix(doc, "R", issues);
  if (!doc.contains("T")) {
    issues.push_back({ErrorCode::kParseError, "T", "missing key"});
  } else if (!doc.at("T").is_number_integer()) {
    issues.push_back({ErrorCode::kParseError, "T", "expected an integer"});
  } else {
    raw.horizon = doc.at("T").get<long>();
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return raw;
}

ScenarioModel load_scenario(const std::filesystem::path& path,
                            std::optional<int> horizon_override) {
  ScenarioDescription raw = load_scenario_description(path);
  if (horizon_override) raw.horizon = *horizon_override;
  return validate_scenario(raw);
}

}  // namespace qflqg
