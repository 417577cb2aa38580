// Experiment runner: strict JSON configs, builtin model registry, epsilon
// convergence studies (semiclassical vs grid oracle, Herman-Kluk vs grid
// oracle), named numerical checks, and artifact/report plumbing shared by
// the CLI and the acceptance tests.
#ifndef WAVECROSS_EXPERIMENT_HPP
#define WAVECROSS_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavecross/hk.hpp"
#include "wavecross/propagate.hpp"

namespace wx {

// Configuration / usage problems exit with code 2; numerical failures (from
// fail()/require()) are plain runtime_errors and exit with code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

inline constexpr int kSchemaVersion = 1;

struct CheckSpec {
  std::string name;
  json params;  // check-specific keys; each check rejects unknown ones
};

struct ExperimentConfig {
  std::string study;
  std::uint64_t seed = 0;
  // study pipeline (absent for check-only configs)
  std::string model_name;  // empty = no pipeline
  bool is_scalar = false;  // scalar models run the Herman-Kluk pipeline
  TwoLevelModel two_level;
  ScalarModel scalar;
  InitialData init;  // profile defaults to the unit-width Gaussian
  double t_end = 0.0;
  std::vector<double> sample_times;
  std::vector<double> eps;  // strictly decreasing when more than one
  PropOpts prop;
  bool oracle_enabled = true;
  OracleOpts oracle;
  double pad_sigmas = 10.0;
  int min_n = 256;
  int max_n = 1 << 21;
  HKQuadSpec hk;
  // outputs
  bool out_solutions = true;
  bool out_grids = false;
  bool out_seeds = false;
  bool include_profiles = false;
  std::vector<CheckSpec> checks;
  json raw;  // parsed config, echoed into summaries
};

ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config_file(const std::string& path);

// builtin models
std::vector<std::string> builtin_model_names();
bool builtin_is_scalar(const std::string& name);
TwoLevelModel builtin_two_level(const std::string& name);
ScalarModel builtin_scalar(const std::string& name);
VecR builtin_default_z0(const std::string& name);

// one convergence-table row; order_est only on final-time rows of the
// second and later epsilon entries
struct StudyRow {
  double eps = 0.0;
  double t = 0.0;
  double err_total = 0.0;
  double err_band1 = 0.0;
  double err_band2 = 0.0;
  double overlap_band2 = 0.0;
  std::optional<double> order_est;
};

struct EpsRun {
  double eps = 0.0;
  // two-level pipeline
  SemiclassicalSolution sol;
  Grid grid;
  GridState oracle_final;
  GridState recon_final;
  OracleDiagnostics odiag;
  // scalar pipeline
  HKRun hk;
  std::vector<StudyRow> rows;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  json data;
};

struct StudyResult {
  std::string study;
  ExperimentConfig cfg;
  std::vector<EpsRun> runs;
  std::vector<StudyRow> rows;  // merged, epsilon-major
  std::vector<CheckResult> checks;
  bool all_pass = true;
};

struct RunOptions {
  std::string out_dir;  // empty: no artifacts written
  int threads = 0;      // 0: one per epsilon entry, capped by hardware
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
  bool verbose = false;
};

StudyResult run_study(const ExperimentConfig& cfg,
                      const RunOptions& opt = RunOptions{});

// deterministic: no timings, no paths, doubles in shortest round-trip form
json summary_json(const StudyResult& res);
std::string rows_csv(const std::vector<StudyRow>& rows);
void write_artifacts(const StudyResult& res, const RunOptions& opt);

// report: merge summaries (schema-checked; duplicate study ids rejected),
// studies ordered by id
json report_merge(const std::vector<json>& summaries);
std::string report_text(const json& merged);
std::string report_csv(const json& merged);

}  // namespace wx

#endif  // WAVECROSS_EXPERIMENT_HPP
