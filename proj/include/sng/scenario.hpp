#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sng/choquard.hpp"
#include "sng/fields.hpp"
#include "sng/guidance.hpp"
#include "sng/oracles.hpp"
#include "sng/potentials.hpp"
#include "sng/propagate.hpp"

namespace sng {

enum class ScenarioKind { figure1, ground_state, choquard, ehrenfest, boost, custom };
enum class KernelKind { none, sphere_quadratic, custom_table };

std::string to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(const std::string& name);

/// Declarative description of one run. Unset optionals take scenario
/// defaults at resolve time; widths are amplitude e-folding lengths.
struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::figure1;

  std::optional<std::size_t> n_points;
  std::optional<double> x_min;
  std::optional<double> x_max;

  PhysParams phys;

  std::optional<double> k_ext;
  std::optional<double> k_self;
  std::optional<double> k_ratio;
  std::optional<double> sphere_mass;
  std::optional<double> sphere_radius;
  KernelKind kernel = KernelKind::none;
  std::string kernel_file;
  double kernel_coupling = 1.0;

  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<int> output_stride;
  Scheme scheme = Scheme::strang_split;
  SelfConsistency self_consistency = SelfConsistency::midpoint_predictor;

  std::optional<double> soliton_center;
  std::optional<double> soliton_width;
  std::optional<double> boost_velocity;
  double pilot_center = 0.0;
  double pilot_momentum = 0.0;
  double variance_ratio = 1e-3;
  std::optional<double> pilot_width;

  std::string out = "out";
  std::size_t snapshot_every = 0;  // output rows between snapshots; 0 = none

  double r_max = 0.0;  // 0 = automatic
  std::size_t radial_points = 3000;
  std::optional<double> tol;
};

/// Every quantity a pipeline needs, with defaults filled in and checked.
struct ResolvedScenario {
  ScenarioKind kind = ScenarioKind::figure1;
  Grid1D grid{2, 0.0, 1.0};
  PhysParams phys;
  HarmonicModelParams model;
  EvolutionSpec spec;
  KernelKind kernel = KernelKind::none;
  std::string kernel_file;
  double kernel_coupling = 1.0;
  double soliton_center = 0.0;
  double soliton_extent = 0.0;
  double boost_velocity = 0.0;
  double pilot_center = 0.0;
  double pilot_momentum = 0.0;
  double pilot_extent = 0.0;
  std::filesystem::path out;
  std::size_t snapshot_every = 0;
  ChoquardOptions choquard;
  double tol = 1e-10;
};

/// Ground-state extent sqrt(hbar / sqrt(k m)) of a harmonic confinement.
double harmonic_extent(double stiffness, const PhysParams& phys);

/// Flat "key = value" text, '#' comments. Collects every problem into one
/// ConfigError. `forced` overrides (and must agree with) a scenario key.
ScenarioConfig parse_config(const std::string& text,
                            std::optional<ScenarioKind> forced = std::nullopt);
std::string render_config(const ScenarioConfig& cfg);

/// Replaces one key with a textual value, re-validating the result.
ScenarioConfig with_value(const ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Names of keys that take a numeric value.
std::vector<std::string> numeric_keys();

ResolvedScenario resolve(const ScenarioConfig& cfg);

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
  bool flag = false;  // pass/fail only, no numeric value
};

struct RunReport {
  std::string scenario;
  std::vector<Check> checks;
  std::map<std::string, double> metrics;
  std::vector<std::string> notes;
  std::vector<std::filesystem::path> outputs;
  double wall_seconds = 0.0;

  bool passed() const;
  void add_check(std::string name, double value, double tolerance, std::string detail = {});
  void add_flag(std::string name, bool ok, std::string detail = {});
};

void write_report(std::ostream& out, const RunReport& report);

/// Figure-1 pipeline: pilot and full wave stepped in lockstep, guidance
/// analysis at each output time, oracle comparisons.
struct Figure1Result {
  std::vector<VelocityDecomposition> rows;
  std::vector<double> step_times;  // every solver step
  std::vector<double> step_mean_x;
  std::vector<double> out_times;
  std::vector<double> out_mean_x;
  std::vector<double> out_variance;
  std::vector<double> out_norm_sq;
  std::optional<std::string> extraction_failure;
  std::vector<WaveField> snapshots;
  std::vector<double> snapshot_times;

  double p1_residual = 0.0;
  double p2_deviation = 0.0;
  double norm_rate_residual = 0.0;
  double discarded_terms = 0.0;
  double v_int_imag = 0.0;
  double classical_match = 0.0;
  double ehrenfest_residual = 0.0;
  double oracle_mean = 0.0;
  double oracle_variance = 0.0;
  double norm_drift = 0.0;
  double initial_soliton_extent = 0.0;
  StabilityReport stability;
};

Figure1Result run_figure1(const ResolvedScenario& s);

/// max |(x[n+1] - 2x[n] + x[n-1])/dt^2 + (k/m) x[n]| / max |(k/m) x| over a
/// uniformly stepped series. For k = 0 the absolute max |x''| is returned.
double ehrenfest_residual(const std::vector<double>& x, double dt, double k_ext, double mass);

/// Moment oracle vs measured mean/variance series sampled at dt_out.
struct OracleComparison {
  double mean = 0.0;      // max |dmean| / max |mean|
  double variance = 0.0;  // max |dvar| / var
};

OracleComparison compare_with_moment_oracle(const GaussianMoments& init,
                                            const HarmonicModelParams& model, double dt_out,
                                            const std::vector<double>& mean,
                                            const std::vector<double>& variance,
                                            const PhysParams& phys);

/// Runs one scenario and writes its artifacts under cfg.out.
RunReport run_scenario(const ScenarioConfig& cfg);

struct SweepRow {
  std::string value;
  double numeric = 0.0;
  bool ok = false;
  std::string error;
  std::map<std::string, double> metrics;
  bool checks_passed = false;
};

/// Runs one scenario per value on a bounded pool of `jobs` threads, each in
/// <out>/<param>_<index>; rows come back sorted by value. Throws
/// ConfigError for an empty value list or a non-numeric key.
std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& param,
                            const std::vector<std::string>& values, unsigned jobs);

void write_sweep_tsv(const std::filesystem::path& path, const std::string& param,
                     const std::vector<SweepRow>& rows);

}  // namespace sng
