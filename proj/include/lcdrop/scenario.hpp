#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcdrop/mesh.hpp"
#include "lcdrop/output.hpp"
#include "lcdrop/solver.hpp"

namespace lcdrop {

/// Bad preset name, malformed override or invalid config document.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MeshSpec {
  int nx = 64;
  int ny = 64;
  Rect rect;
};

/// Expressions over x, y, z, eps, h, s_star, pi.
struct InitialSpec {
  std::string s = "s_star";
  std::vector<std::string> n = {"1", "0"};  // normalized nodewise
  std::string phi = "1";
  /// Restart file written by a previous run; overrides the expressions.
  std::string from_state;
};

struct BoundarySpec {
  std::string s = "s_star";
  std::vector<std::string> n = {"1", "0"};
};

struct OutputSpec {
  std::string dir = "out";
  int snapshot_every = 0;  // 0: choose so that a run emits at least 12
  std::string energy_log = "energy.csv";
  bool snapshots = true;
};

struct ScenarioConfig {
  std::string name = "custom";
  MeshSpec mesh;
  ModelWeights weights;
  bool eps_from_mesh = true;  // ε = 3h/√2 when set
  SchemeConfig scheme;
  InitialSpec initial;
  BoundarySpec bc;
  OutputSpec output;
};

const std::vector<std::string>& preset_names();

/// Config document of a preset; throws UsageError listing the presets.
nlohmann::json preset_document(const std::string& name);

/// Applies "key=value". The key is a dotted path (scheme.tau) or a leaf
/// name that occurs exactly once in the document (tau). The value is parsed
/// as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Strict conversion; unknown keys are rejected.
ScenarioConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ScenarioConfig& config);

/// preset < file < overrides, then validated.
ScenarioConfig resolve_config(const std::string& preset, const std::string& config_file,
                              const std::vector<std::string>& overrides);

inline ScenarioConfig preset(const std::string& name) {
  return config_from_json(preset_document(name));
}

/// Discretized problem ready for run().
struct Scenario {
  std::shared_ptr<const TriMesh> mesh;
  std::shared_ptr<const P1Space> space;
  ModelWeights weights;
  SchemeConfig scheme;
  PhaseState initial;
  BoundaryConditions bc;
};

/// Builds mesh, interpolated initial data (boundary values imposed) and
/// Dirichlet data. Throws UsageError for bad expressions or a vanishing
/// director expression at a node.
Scenario build_scenario(const ScenarioConfig& config);

struct ScenarioResult {
  PhaseState final_state;
  int steps = 0;
  bool aborted = false;
  std::string error;
  int components = 0;                  // of {φ > 0} at the end
  double max_energy_increase = 0.0;    // max_m total_m - total_{m-1}
  double max_abs_mass_drift = 0.0;
  double max_ledger_defect = 0.0;      // relative to |E_before|
  double min_remainder = 0.0;
  std::vector<StepReport> reports;     // only with keep_reports
};

struct RunOptions {
  bool write_files = true;
  bool keep_reports = false;
  std::ostream* progress = nullptr;
};

/// Runs the scenario, writing energy CSV, VTK snapshots and final_state.json
/// into config.output.dir. Solver failures are reported in the result (with
/// partial artifacts kept), not thrown.
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace lcdrop
