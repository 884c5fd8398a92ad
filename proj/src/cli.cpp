#include "qflqg/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <random>

#include "qflqg/error.hpp"
#include "qflqg/format.hpp"
#include "qflqg/offline.hpp"
#include "qflqg/random_scenario.hpp"
#include "qflqg/serialization.hpp"
#include "qflqg/simulate.hpp"
#include "qflqg/verify.hpp"

namespace qflqg::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr const char* kRiccatiFile = "riccati.json";
constexpr const char* kStatsFile = "innovation_stats.json";
constexpr const char* kMomentsFile = "moment_tables.json";
constexpr const char* kScheduleFile = "schedule.csv";

class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VerificationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scenario;
  std::string bank;
  std::string out = ".";
  std::uint64_t seed = 0;
  int trials = 1000;
  std::optional<int> horizon_override;
  bool emit_lp = false;
  // simulate
  std::string schedule_path;
  bool inline_optimal = false;
  std::optional<int> constant_quantizer;
  int dump_trajectories = 0;
  int threads = 0;
  // verify
  std::string inject_fault;
  long long max_sequences = 1000000;
  int horizon = 5;
  int quantizers = 3;
};

io::RunManifest manifest_for(const std::string& command, const Options& o) {
  io::RunManifest m;
  m.command = command;
  m.scenario_path = o.scenario;
  m.bank_path = o.bank;
  m.output_dir = o.out;
  m.master_seed = o.seed;
  if (o.horizon_override) {
    m.parameters["horizon_override"] = std::to_string(*o.horizon_override);
  }
  if (command == "simulate" || command == "verify") {
    m.parameters["trials"] = std::to_string(o.trials);
  }
  if (command == "simulate") {
    if (o.constant_quantizer) {
      m.parameters["constant_quantizer"] = std::to_string(*o.constant_quantizer);
    }
    if (o.inline_optimal) m.parameters["schedule"] = "optimal";
    if (!o.schedule_path.empty()) m.parameters["schedule"] = o.schedule_path;
  }
  if (command == "verify" && !o.inject_fault.empty()) {
    m.parameters["inject_fault"] = o.inject_fault;
  }
  return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void require_file(const fs::path& path) {
  if (!fs::exists(path)) {
    throw MissingArtifact("missing artifact " + path.string() +
                          " (run synth first)");
  }
}

// Rebuilds the offline design from scenario/bank files plus the persisted
// synth artifacts, checking that they belong together.
OfflineDesign load_design(const Options& o) {
  const ScenarioModel model = load_scenario(o.scenario, o.horizon_override);
  const QuantizerBank bank = load_bank(o.bank);
  const fs::path dir(o.out);
  for (const char* name : {kRiccatiFile, kStatsFile, kMomentsFile}) {
    require_file(dir / name);
  }
  OfflineDesign design;
  design.model = model;
  design.bank = bank;
  design.riccati = io::riccati_from_json(io::read_json(dir / kRiccatiFile));
  design.stats = io::statistics_from_json(io::read_json(dir / kStatsFile));
  design.moments = io::moments_from_json(io::read_json(dir / kMomentsFile));
  const int T = model.horizon;
  const bool consistent =
      design.riccati.horizon() == T && design.stats.horizon() == T &&
      design.moments.horizon() == T && design.moments.size() == bank.size() &&
      design.riccati.P[0].rows() == model.n() &&
      design.stats.M[0].rows() == model.p();
  if (!consistent) {
    throw ValidationError({{ErrorCode::kDimensionMismatch, o.out,
                            "synth artifacts do not match the scenario/bank "
                            "(rerun synth with the same flags)"}});
  }
  design.ntilde = NTildeTable(design.stats, design.riccati);
  return design;
}

void print_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << "  [";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? ", " : "") << format_double(m(i, j));
    }
    out << "]\n";
  }
}

int cmd_synth(const Options& o, std::ostream& out) {
  const ScenarioModel model = load_scenario(o.scenario, o.horizon_override);
  const QuantizerBank bank = load_bank(o.bank);
  const OfflineDesign design = build_design(model, bank);
  const io::RunManifest manifest = manifest_for("synth", o);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  io::write_text(dir / kRiccatiFile,
                 dump(io::with_manifest(io::riccati_to_json(design.riccati),
                                        manifest)));
  io::write_text(dir / kStatsFile,
                 dump(io::with_manifest(io::statistics_to_json(design.stats),
                                        manifest)));
  io::write_text(dir / kMomentsFile,
                 dump(io::with_manifest(
                     io::moments_to_json(design.moments, design.bank),
                     manifest)));
  out << "horizon " << model.horizon << ", n=" << model.n()
      << ", m=" << model.m() << ", p=" << model.p() << ", quantizers "
      << bank.size() << "\n";
  out << "P_0 =\n";
  print_matrix(out, design.riccati.P[0]);
  out << "r_0 = " << format_double(design.riccati.r[0]) << "\n";
  out << "manifest " << manifest.hash() << "\n";
  return kOk;
}

json schedule_json(const SelectionSchedule& s, const QuantizerBank& bank) {
  json names = json::array();
  for (const auto& q : bank.quantizers) names.push_back(q.name);
  json theta = json::array();
  for (int v : s.theta_star) theta.push_back(v + 1);
  return json{{"quantizers", names},
              {"delays", bank.delays},
              {"prices", bank.prices()},
              {"beta", io::matrix_to_json(s.beta)},
              {"c", io::matrix_to_json(s.c)},
              {"theta_star", theta},
              {"C0", s.C0},
              {"C0_constant", s.constant_part},
              {"C0_selection", s.selection_part},
              {"J_star", s.J_star}};
}

int cmd_schedule(const Options& o, std::ostream& out) {
  const OfflineDesign design = load_design(o);
  const SelectionSchedule s = solve_schedule(design);
  const io::RunManifest manifest = manifest_for("schedule", o);
  const fs::path dir(o.out);
  const std::string hash = manifest.hash();
  io::write_text(dir / kScheduleFile, io::schedule_csv(s, hash));
  io::write_text(dir / "schedule_tidy.csv",
                 io::tidy_csv(s, design.bank, hash));
  io::write_text(dir / "schedule.json",
                 dump(io::with_manifest(schedule_json(s, design.bank),
                                        manifest)));
  if (o.emit_lp) {
    io::write_text(dir / "milp.lp", "\\ manifest_hash=" + hash + "\n" +
                                         export_milp(s.c, s.constant_part));
  }
  out << "theta*:";
  for (int v : s.theta_star) out << ' ' << v + 1;
  out << "\nC0 = " << format_double(s.C0)
      << "\nJ* = " << format_double(s.J_star) << "\n";
  return kOk;
}

int cmd_export_milp(const Options& o, std::ostream& out) {
  const OfflineDesign design = load_design(o);
  const SelectionSchedule s = solve_schedule(design);
  const io::RunManifest manifest = manifest_for("export-milp", o);
  const fs::path path = fs::path(o.out) / "milp.lp";
  io::write_text(path, "\\ manifest_hash=" + manifest.hash() + "\n" +
                           export_milp(s.c, s.constant_part));
  out << "wrote " << path.string() << " (" << s.c.rows() * s.c.cols()
      << " binaries, " << s.c.rows() << " constraints)\n";
  return kOk;
}

std::vector<int> resolve_schedule(const Options& o,
                                  const OfflineDesign& design) {
  const int T = design.model.horizon;
  if (o.constant_quantizer) {
    const int q = *o.constant_quantizer;
    if (q < 1 || q > design.bank.size()) {
      throw ValidationError({{ErrorCode::kIndexOutOfRange,
                              "--constant-quantizer",
                              "quantizer index must be in 1.." +
                                  std::to_string(design.bank.size())}});
    }
    return std::vector<int>(T, q - 1);
  }
  if (o.inline_optimal) return solve_schedule(design).theta_star;
  const fs::path path = o.schedule_path.empty()
                            ? fs::path(o.out) / kScheduleFile
                            : fs::path(o.schedule_path);
  if (!fs::exists(path)) {
    throw MissingArtifact("missing schedule " + path.string() +
                          " (run schedule first or pass --optimal)");
  }
  std::vector<int> theta = io::schedule_from_csv(io::read_text(path));
  if (static_cast<int>(theta.size()) != T) {
    throw ValidationError({{ErrorCode::kDimensionMismatch, path.string(),
                            "schedule length differs from the horizon"}});
  }
  for (int v : theta) {
    if (v < 0 || v >= design.bank.size()) {
      throw ValidationError({{ErrorCode::kIndexOutOfRange, path.string(),
                              "schedule names an unknown quantizer"}});
    }
  }
  return theta;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  if (o.trials < 1) {
    throw ValidationError(
        {{ErrorCode::kIndexOutOfRange, "--trials", "must be at least 1"}});
  }
  const OfflineDesign design = load_design(o);
  SimulationConfig config;
  config.trials = o.trials;
  config.master_seed = o.seed;
  config.schedule = resolve_schedule(o, design);
  config.record_trajectories = o.dump_trajectories > 0;
  config.threads = o.threads;
  const CostReport report = monte_carlo(design, config);

  const io::RunManifest manifest = manifest_for("simulate", o);
  json payload = io::report_to_json(report);
  json theta = json::array();
  for (int v : config.schedule) theta.push_back(v + 1);
  payload["schedule"] = theta;

  if (o.constant_quantizer) {
    SimulationConfig optimal = config;
    optimal.schedule = solve_schedule(design).theta_star;
    optimal.record_trajectories = false;
    const CostReport best = monte_carlo(design, optimal);
    const double combined =
        report.stderr_defined
            ? std::hypot(report.empirical_stderr, best.empirical_stderr)
            : 0.0;
    payload["dominance"] = {
        {"optimal", io::report_to_json(best)},
        {"optimal_theoretical_not_worse",
         best.theoretical <= report.theoretical + 1e-9 * std::abs(report.theoretical)},
        {"empirical_consistent",
         report.empirical_mean >= best.empirical_mean - 2.0 * combined}};
  }

  const fs::path dir(o.out);
  io::write_text(dir / "report.json",
                 dump(io::with_manifest(payload, manifest)));
  const int dumps = std::min<int>(o.dump_trajectories, report.trajectories.size());
  for (int i = 0; i < dumps; ++i) {
    io::write_text(dir / ("trajectory_" + std::to_string(i) + ".csv"),
                   io::trajectory_csv(report.trajectories[i], manifest.hash()));
  }
  out << "trials " << report.trials << "\nempirical "
      << format_double(report.empirical_mean) << " +/- "
      << (report.stderr_defined ? format_double(report.empirical_stderr)
                                : std::string("undefined"))
      << "\ntheoretical " << format_double(report.theoretical) << "\n";
  return kOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  std::mt19937_64 rng(o.seed);
  std::optional<QuantizerBank> bank;
  if (!o.bank.empty()) bank = load_bank(o.bank);
  ScenarioModel model;
  if (!o.scenario.empty()) {
    model = load_scenario(o.scenario, o.horizon_override);
  } else {
    RandomScenarioOptions ro;
    ro.n = 2;
    ro.m = 2;
    ro.p = bank ? bank->dimension() : 2;
    ro.horizon = o.horizon_override.value_or(o.horizon);
    model = random_scenario(rng, ro);
  }
  if (!bank) {
    bank = random_bank(rng, model.p(), o.quantizers, {1, 2, 4, 8}, 1, 2.0);
  }
  OfflineDesign design = build_design(model, *bank);
  if (!o.inject_fault.empty()) {
    if (o.inject_fault != "ntilde") {
      throw ValidationError({{ErrorCode::kParseError, "--inject-fault",
                              "known faults: ntilde"}});
    }
    const int T = model.horizon;
    Matrix& entry = design.ntilde.mutable_entry(0, T - 1);
    entry += 1e3 * Matrix::Identity(entry.rows(), entry.cols());
  }
  VerifyOptions vo;
  vo.seed = o.seed;
  vo.whiteness_trials = o.trials;
  vo.max_sequences = o.max_sequences;
  const auto results = run_verification(design, vo);
  const CheckResult* first_failure = nullptr;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    if (!r.passed && !first_failure) first_failure = &r;
  }
  if (first_failure) {
    throw VerificationFailed("verification failed at " + first_failure->name);
  }
  out << "all " << results.size() << " checks passed\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Quantized-feedback LQG synthesis, scheduling and simulation"};
  app.name("qflqg");
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool files_required) {
    auto* s = sub->add_option("--scenario", o.scenario, "scenario JSON file");
    auto* b = sub->add_option("--bank", o.bank, "quantizer bank JSON file");
    if (files_required) {
      s->required();
      b->required();
    }
    sub->add_option("--out", o.out, "artifact directory")->capture_default_str();
    sub->add_option("--horizon-override", o.horizon_override,
                    "replace the scenario horizon");
    sub->add_option("--seed", o.seed, "master seed")->capture_default_str();
  };

  auto* synth = app.add_subcommand("synth", "Riccati, innovation and cell-moment artifacts");
  add_common(synth, true);
  synth->add_flag("--emit-lp", o.emit_lp, "accepted for symmetry; no effect");

  auto* schedule = app.add_subcommand("schedule", "optimal quantizer schedule");
  add_common(schedule, true);
  schedule->add_flag("--emit-lp", o.emit_lp, "also write milp.lp");

  auto* simulate = app.add_subcommand("simulate", "closed-loop Monte Carlo");
  add_common(simulate, true);
  simulate->add_option("--trials", o.trials, "number of trials")->capture_default_str();
  simulate->add_option("--schedule", o.schedule_path,
                       "schedule CSV (default: <out>/schedule.csv)");
  simulate->add_flag("--optimal", o.inline_optimal,
                     "compute the optimal schedule inline");
  simulate->add_option("--constant-quantizer", o.constant_quantizer,
                       "use quantizer I (1-based) at every stage and compare "
                       "with the optimal schedule");
  simulate->add_option("--trajectories", o.dump_trajectories,
                       "write the first K trajectories as CSV");
  simulate->add_option("--threads", o.threads, "worker threads (0: all cores)");

  auto* verify = app.add_subcommand("verify", "run the oracle check suite");
  add_common(verify, false);
  verify->add_option("--trials", o.trials, "whiteness sample size");
  verify->add_option("--horizon", o.horizon, "random scenario horizon")->capture_default_str();
  verify->add_option("--quantizers", o.quantizers, "random bank size")->capture_default_str();
  verify->add_option("--max-sequences", o.max_sequences,
                     "brute-force enumeration cap")->capture_default_str();
  verify->add_option("--inject-fault", o.inject_fault,
                     "corrupt an offline table (ntilde)");

  auto* milp = app.add_subcommand("export-milp", "write the selection MILP as an LP file");
  add_common(milp, true);
  milp->add_flag("--emit-lp", o.emit_lp, "accepted for symmetry; no effect");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }
  if (verify->parsed() && !verify->count("--trials")) o.trials = 4000;

  try {
    if (synth->parsed()) return cmd_synth(o, out);
    if (schedule->parsed()) return cmd_schedule(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (milp->parsed()) return cmd_export_milp(o, out);
  } catch (const MissingArtifact& e) {
    err << "error: " << e.what() << "\n";
    return kMissingArtifact;
  } catch (const VerificationFailed& e) {
    err << "error: " << e.what() << "\n";
    return kVerificationFailure;
  } catch (const ValidationError& e) {
    err << "error: validation failed\n";
    for (const auto& issue : e.issues()) {
      err << "  " << to_string(issue.code) << " [" << issue.field
          << "]: " << issue.message << "\n";
    }
    return kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kTrialFailed ? kTrialFailure : kValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace qflqg::cli
