#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnls/diagnostics.hpp"
#include "fnls/dynamics.hpp"
#include "fnls/ground_state.hpp"

namespace fnls {

using Json = nlohmann::ordered_json;

enum class Scenario {
  defocusing_scatter,
  focusing_subthreshold,
  focusing_superthreshold,
  scaling_covariance,
  stationarity,
  virial_suite
};

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& name);

enum class InitialFamily { gaussian, ground_state, scaled_ground_state };

std::string to_string(InitialFamily f);
InitialFamily parse_initial_family(const std::string& name);

struct InitialCondition {
  InitialFamily family = InitialFamily::gaussian;
  /// c for c W; peak value for the Gaussian.
  double amplitude = 1.0;
  /// Gaussian exp(-|x|^2 / (2 width^2)).
  double width = 1.0;
  /// Extra phase e^{i chirp |x|^2}.
  double chirp = 0.0;
  /// Relative size of a seeded smooth radial perturbation.
  double perturbation = 0.0;
};

struct AnalysisConfig {
  /// Steps between trajectory samples.
  long cadence = 100;
  long monitor_every = 10;
  double cutoff_radius = 8.0;
  double delta0 = 0.0;
  double cauchy_fraction = 0.05;
  double decay_factor = 5.0;
  std::vector<double> exterior_radii{5.0, 10.0, 20.0, 30.0, 40.0};
  double exterior_epsilon = 1e-3;
  double scaling_lambda = 2.0;
  int tail_extension = kDefaultExtension;
  double blowup_growth = 1e3;
  double tail_threshold = 0.1;
  double contamination_threshold = 1e-3;
  bool keep_snapshots = true;
};

struct ScenarioConfig {
  static constexpr int kSchemaVersion = 1;

  /// Absent for plain simulations.
  std::optional<Scenario> scenario;
  PhysicsParams physics = PhysicsParams::make(2, 0.8, -1);
  Grid grid = Grid::make(2, 100.0, 256);
  IntegratorConfig integrator{};
  InitialCondition initial{};
  AnalysisConfig analysis{};
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

/// Strict parse: unknown keys, wrong types and out-of-domain values throw
/// ValidationError naming the offending key.
ScenarioConfig config_from_json(const Json& j);
Json config_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Parameter and scenario constraints that need no computation.
void validate_config(const ScenarioConfig& cfg);
/// 16 hex digits identifying the canonical JSON form of cfg.
std::string config_hash(const ScenarioConfig& cfg);

bool is_ground_state_family(const InitialCondition& ic);
Field initial_field(const ScenarioConfig& cfg);
/// Far-field closure for W-family data, scaled by the amplitude.
std::optional<FarField> closure_for(const ScenarioConfig& cfg);

struct ScatteringThresholds {
  double cauchy_fraction = 0.05;
  double decay_factor = 5.0;
};

struct ScatteringProxyReport {
  /// int |u|^{p+2} at the start of the window over its value at the end.
  double potential_decay_factor = 0.0;
  /// Largest ||e^{-itD^{2a}} u(t) - e^{-isD^{2a}} u(s)||_{Hdot^a} over the last five window samples.
  double uplus_cauchy = 0.0;
  /// uplus_cauchy / ||u(0)||_{Hdot^a}.
  double cauchy_fraction = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  int samples = 0;
  /// "scattering-consistent", "not-scattering-consistent" or "inconclusive".
  std::string verdict;
};

/// Uses trajectory samples with t <= window_end.
ScatteringProxyReport scattering_proxy(const std::vector<Snapshot>& trajectory,
                                       const PhysicsParams& params, double window_end,
                                       const ScatteringThresholds& thresholds = {});

struct ExteriorRow {
  double t = 0.0;
  double radius = 0.0;
  /// int_{|x|>R} |D^a u|^2 with D^a u computed on the whole box.
  double hdot_density = 0.0;
  /// int_{|x|>R} |u|^{2N/(N-2a)}.
  double potential_density = 0.0;
  /// int_{|x|>R} |u|^2 / |x|^{2a}.
  double hardy_density = 0.0;
};

std::vector<ExteriorRow> exterior_decay_scan(const std::vector<Snapshot>& trajectory,
                                             const std::vector<double>& radii,
                                             const PhysicsParams& params);
/// Smallest scanned radius from which all three exterior quantities stay
/// below eps at every sampled time; empty when no radius qualifies.
std::optional<double> uniform_exterior_radius(const std::vector<ExteriorRow>& rows, double eps);

struct RunArtifacts {
  Json report;
  std::vector<DiagnosticsRecord> records;
  std::vector<Snapshot> snapshots;
  std::optional<SimState> checkpoint;
  /// Blow-up or contamination flag raised.
  bool flagged = false;
};

/// Evolves the configured data and records diagnostics; no scenario analysis.
RunArtifacts run_simulation(const ScenarioConfig& cfg);
/// Scenario pipeline; throws ValidationError when a precondition fails.
RunArtifacts run_scenario(const ScenarioConfig& cfg);

/// Writes report.json, config.json, diagnostics.csv, plots/<column>.dat,
/// snapshots/snapshot_NNNNNN.bin and checkpoint files under dir.
void emit_artifacts(const RunArtifacts& run, const ScenarioConfig& cfg, const std::filesystem::path& dir);

/// {kappa, C1, C_N, grad_norm_sq, potential_integral, E_focusing, E_defocusing, residual, ...}.
Json constants_json(const GroundStateConstants& c);

/// Fixed formatting for JSON output: two-space indent, key order preserved.
std::string dump_json(const Json& j);

}  // namespace fnls
