#include "qflqg/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qflqg/error.hpp"
#include "qflqg/format.hpp"

namespace qflqg::io {

namespace {

Error malformed(const std::string& what) {
  return Error(ErrorCode::kParseError, "malformed artifact: " + what);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw malformed(std::string("missing key '") + key + "'");
  }
  return j.at(key);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

json RunManifest::to_json() const {
  json params = json::object();
  for (const auto& [k, v] : parameters) params[k] = v;
  return json{{"command", command},
              {"scenario", scenario_path},
              {"bank", bank_path},
              {"parameters", params},
              {"tool_version", tool_version},
              {"master_seed", master_seed},
              {"output_dir", output_dir}};
}

std::string RunManifest::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = field(j, "rows").get<Eigen::Index>();
  const auto cols = field(j, "cols").get<Eigen::Index>();
  const json& data = field(j, "data");
  if (rows < 0 || cols < 0 || !data.is_array() ||
      data.size() != static_cast<std::size_t>(rows * cols)) {
    throw malformed("matrix data does not match its dimensions");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++].get<double>();
  }
  return m;
}

json matrices_to_json(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<Matrix> matrices_from_json(const json& j) {
  if (!j.is_array()) throw malformed("expected a list of matrices");
  std::vector<Matrix> out;
  out.reserve(j.size());
  for (const auto& item : j) out.push_back(matrix_from_json(item));
  return out;
}

json riccati_to_json(const RiccatiSolution& riccati) {
  return json{{"horizon", riccati.horizon()},
              {"P", matrices_to_json(riccati.P)},
              {"L", matrices_to_json(riccati.L)},
              {"N", matrices_to_json(riccati.N)},
              {"r", riccati.r}};
}

RiccatiSolution riccati_from_json(const json& j) {
  RiccatiSolution out;
  out.P = matrices_from_json(field(j, "P"));
  out.L = matrices_from_json(field(j, "L"));
  out.N = matrices_from_json(field(j, "N"));
  out.r = field(j, "r").get<std::vector<double>>();
  const auto T = out.L.size();
  if (out.P.size() != T + 1 || out.N.size() != T || out.r.size() != T + 1) {
    throw malformed("riccati sequences have inconsistent lengths");
  }
  return out;
}

json statistics_to_json(const InnovationStatistics& stats) {
  return json{{"horizon", stats.horizon()},
              {"A", matrix_to_json(stats.A)},
              {"B", matrix_to_json(stats.B)},
              {"C", matrix_to_json(stats.C)},
              {"mu0", matrix_to_json(stats.mu0)},
              {"M", matrices_to_json(stats.M)},
              {"Sigma_pred", matrices_to_json(stats.Sigma_pred)},
              {"Sigma_filt", matrices_to_json(stats.Sigma_filt)},
              {"K", matrices_to_json(stats.K)}};
}

InnovationStatistics statistics_from_json(const json& j) {
  InnovationStatistics out;
  out.A = matrix_from_json(field(j, "A"));
  out.B = matrix_from_json(field(j, "B"));
  out.C = matrix_from_json(field(j, "C"));
  out.mu0 = matrix_from_json(field(j, "mu0"));
  out.M = matrices_from_json(field(j, "M"));
  out.Sigma_pred = matrices_from_json(field(j, "Sigma_pred"));
  out.Sigma_filt = matrices_from_json(field(j, "Sigma_filt"));
  out.K = matrices_from_json(field(j, "K"));
  const auto T = out.M.size();
  if (out.Sigma_pred.size() != T || out.Sigma_filt.size() != T ||
      out.K.size() != T || out.A.rows() != out.A.cols()) {
    throw malformed("innovation statistics have inconsistent lengths");
  }
  out.A_powers.reserve(T + 1);
  out.A_powers.push_back(Matrix::Identity(out.A.rows(), out.A.cols()));
  for (std::size_t t = 0; t < T; ++t) {
    out.A_powers.push_back(out.A * out.A_powers.back());
  }
  return out;
}

json moments_to_json(const CellMomentTable& table, const QuantizerBank& bank) {
  json quantizers = json::array();
  for (int i = 0; i < bank.size(); ++i) {
    const auto& q = bank.quantizers[i];
    quantizers.push_back({{"name", q.name},
                          {"levels", q.levels()},
                          {"delay", bank.delays[i]},
                          {"price", q.price},
                          {"original_index", q.original_index}});
  }
  json entries = json::array();
  for (int t = 0; t < table.horizon(); ++t) {
    json row = json::array();
    for (int i = 0; i < table.size(); ++i) {
      const CellMomentEntry& e = table.at(t, i);
      row.push_back({{"probs", e.probs},
                     {"means", matrices_to_json(std::vector<Matrix>(
                                   e.means.begin(), e.means.end()))},
                     {"F", matrix_to_json(e.F)},
                     {"Mcal", matrix_to_json(e.Mcal)}});
    }
    entries.push_back(std::move(row));
  }
  return json{{"horizon", table.horizon()},
              {"bit_rate", bank.bit_rate},
              {"quantizers", quantizers},
              {"M", matrices_to_json(table.M)},
              {"entries", entries}};
}

CellMomentTable moments_from_json(const json& j) {
  CellMomentTable out;
  out.M = matrices_from_json(field(j, "M"));
  const json& entries = field(j, "entries");
  if (!entries.is_array() || entries.size() != out.M.size()) {
    throw malformed("moment table rows do not match the horizon");
  }
  for (const auto& row : entries) {
    std::vector<CellMomentEntry> parsed;
    for (const auto& e : row) {
      CellMomentEntry entry;
      entry.probs = field(e, "probs").get<std::vector<double>>();
      for (const auto& m : matrices_from_json(field(e, "means"))) {
        entry.means.emplace_back(Eigen::Map<const Vector>(m.data(), m.size()));
      }
      entry.F = matrix_from_json(field(e, "F"));
      entry.Mcal = matrix_from_json(field(e, "Mcal"));
      parsed.push_back(std::move(entry));
    }
    out.entries.push_back(std::move(parsed));
  }
  return out;
}

json report_to_json(const CostReport& report) {
  json stderr_value = report.stderr_defined ? json(report.empirical_stderr)
                                            : json(nullptr);
  return json{{"trials", report.trials},
              {"empirical_mean", report.empirical_mean},
              {"empirical_stderr", stderr_value},
              {"stderr_defined", report.stderr_defined},
              {"theoretical", report.theoretical},
              {"breakdown",
               {{"state_cost", report.mean_state_cost},
                {"input_cost", report.mean_input_cost},
                {"price_cost", report.mean_price_cost}}}};
}

json with_manifest(json payload, const RunManifest& manifest) {
  payload["manifest"] = manifest.to_json();
  payload["manifest_hash"] = manifest.hash();
  return payload;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kParseError, "cannot write " + path.string());
  }
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParseError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

std::string schedule_csv(const SelectionSchedule& schedule,
                         const std::string& manifest_hash) {
  std::ostringstream out;
  out << "# manifest_hash=" << manifest_hash << '\n';
  out << "t";
  for (Eigen::Index i = 0; i < schedule.c.cols(); ++i) out << ",c_" << i + 1;
  out << ",theta_star\n";
  for (Eigen::Index t = 0; t < schedule.c.rows(); ++t) {
    out << t;
    for (Eigen::Index i = 0; i < schedule.c.cols(); ++i) {
      out << ',' << format_double(schedule.c(t, i));
    }
    out << ',' << schedule.theta_star[t] + 1 << '\n';
  }
  return out.str();
}

std::vector<int> schedule_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<int> theta;
  int column = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line, ',');
    if (column < 0) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k] == "theta_star" || cells[k] == "theta") {
          column = static_cast<int>(k);
        }
      }
      if (column < 0) throw malformed("schedule has no theta_star column");
      continue;
    }
    if (static_cast<int>(cells.size()) <= column) {
      throw malformed("short schedule row");
    }
    try {
      theta.push_back(std::stoi(cells[column]) - 1);
    } catch (const std::exception&) {
      throw malformed("non-integer schedule entry '" + cells[column] + "'");
    }
  }
  return theta;
}

std::string tidy_csv(const SelectionSchedule& schedule,
                     const QuantizerBank& bank,
                     const std::string& manifest_hash) {
  std::ostringstream out;
  out << "# manifest_hash=" << manifest_hash << '\n';
  out << "t,quantizer,name,levels,delay,price,beta,c,selected\n";
  for (Eigen::Index t = 0; t < schedule.c.rows(); ++t) {
    for (int i = 0; i < bank.size(); ++i) {
      const auto& q = bank.quantizers[i];
      out << t << ',' << i + 1 << ',' << q.name << ',' << q.levels() << ','
          << bank.delays[i] << ',' << format_double(q.price) << ','
          << format_double(schedule.beta(t, i)) << ','
          << format_double(schedule.c(t, i)) << ','
          << (schedule.theta_star[t] == i ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string trajectory_csv(const TrajectoryRecord& record,
                           const std::string& manifest_hash) {
  std::ostringstream out;
  out << "# manifest_hash=" << manifest_hash << '\n';
  const auto n = record.states.empty() ? 0 : record.states.front().size();
  const auto m = record.inputs.empty() ? 0 : record.inputs.front().size();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u_" << i + 1;
  out << ",theta,arrivals\n";
  for (std::size_t t = 0; t < record.states.size(); ++t) {
    const bool stage = t < record.inputs.size();
    out << t;
    for (Eigen::Index i = 0; i < n; ++i) {
      out << ',' << format_double(record.states[t][i]);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      out << ',';
      if (stage) out << format_double(record.inputs[t][i]);
    }
    out << ',';
    if (stage) out << record.selections[t] + 1;
    out << ',';
    if (stage) {
      for (std::size_t k = 0; k < record.arrivals[t].size(); ++k) {
        if (k) out << '|';
        out << record.arrivals[t][k];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace qflqg::io
