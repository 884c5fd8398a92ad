#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qflqg/innovation.hpp"
#include "qflqg/offline.hpp"
#include "qflqg/quantizer.hpp"
#include "qflqg/selection.hpp"
#include "qflqg/simulate.hpp"
#include "qflqg/synthesis.hpp"

namespace qflqg::io {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance of one CLI invocation. The hash is FNV-1a over the canonical
// (sorted-key, compact) JSON dump, printed as 16 hex digits.
struct RunManifest {
  std::string command;
  std::string scenario_path;
  std::string bank_path;
  std::map<std::string, std::string> parameters;
  std::string tool_version = kToolVersion;
  std::uint64_t master_seed = 0;
  std::string output_dir;

  json to_json() const;
  std::string hash() const;
};

std::uint64_t fnv1a64(const std::string& bytes);

// {"rows": r, "cols": c, "data": [row-major entries]}
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);
json matrices_to_json(const std::vector<Matrix>& ms);
std::vector<Matrix> matrices_from_json(const json& j);

json riccati_to_json(const RiccatiSolution& riccati);
RiccatiSolution riccati_from_json(const json& j);

json statistics_to_json(const InnovationStatistics& stats);
InnovationStatistics statistics_from_json(const json& j);

json moments_to_json(const CellMomentTable& table, const QuantizerBank& bank);
CellMomentTable moments_from_json(const json& j);

json report_to_json(const CostReport& report);

// Wraps a payload with the manifest and its hash.
json with_manifest(json payload, const RunManifest& manifest);

// Writes text atomically enough for our purposes (truncate + write).
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);

// Schedule table: t, c_1..c_M, theta_star (1-based bank order).
std::string schedule_csv(const SelectionSchedule& schedule,
                         const std::string& manifest_hash);
std::vector<int> schedule_from_csv(const std::string& text);

// One row per (t, quantizer) for plotting.
std::string tidy_csv(const SelectionSchedule& schedule,
                     const QuantizerBank& bank,
                     const std::string& manifest_hash);

// t, x_1..x_n, u_1..u_m, theta, arrivals ('|'-separated origin times).
std::string trajectory_csv(const TrajectoryRecord& record,
                           const std::string& manifest_hash);

}  // namespace qflqg::io
