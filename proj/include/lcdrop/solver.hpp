#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcdrop/assembly.hpp"
#include "lcdrop/energy.hpp"
#include "lcdrop/operators.hpp"

namespace lcdrop {

/// One time slab (s, n, φ, μ) of the coupled system.
struct PhaseState {
  ScalarField s;
  DirectorField n;
  ScalarField phi;
  ScalarField mu;
  double time = 0.0;
  int step_index = 0;
};

/// Nodal Dirichlet data for s and n. φ and μ carry none.
struct BoundaryConditions {
  std::vector<int> s_nodes;
  Eigen::VectorXd s_values;
  std::vector<int> n_nodes;
  VectorField n_values;  // dim x n_nodes.size(), unit columns

  /// Throws std::invalid_argument on size mismatches, out-of-range nodes,
  /// non-unit directors or s values outside (-1/2, 1).
  void validate(int dim, int num_nodes) const;
  /// Overwrites the constrained nodal values of `state`.
  void apply(PhaseState& state) const;
};

enum class LinearSolverKind { direct, cg };

struct LinearSolverConfig {
  LinearSolverKind kind = LinearSolverKind::direct;
  double cg_tol = 1e-13;
  int cg_max_iter = 20000;
};

struct SchemeConfig {
  double tau = 0.002;
  double t_final = 0.0;
  double newton_abs_tol = 1e-15;
  double newton_res_tol = 1e-7;
  int newton_max_iter = 50;
  LinearSolverConfig linear_solver;
  bool mass_lumping_timederiv = false;

  void validate() const;
};

/// The nonnegative terms of the discrete energy law for one step, each
/// already multiplied by its weight.
struct Dissipation {
  double erk_normalization = 0.0;  // ω_erk/2 [e(ñ) - e(n)]
  double wan_normalization = 0.0;  // ω_wan ε/2 [c(ñ) - c(n)]
  double chem_potential = 0.0;     // τ ε ‖∇μ‖²
  double director_rate = 0.0;      // τ ρ ‖δτ n‖²
  double s_rate = 0.0;             // τ ‖δτ s‖²
  double ch_grad_tau2 = 0.0;
  double ch_dw_tau2 = 0.0;
  double erk_tau2 = 0.0;
  double wan_tau2 = 0.0;
  double was_tau2 = 0.0;

  double sum() const;
};

struct StepReport {
  int step = 0;
  double time = 0.0;
  EnergyReport before;
  EnergyReport after;
  Dissipation dissipation;
  /// Convex-splitting slack, ≥ 0 for a convex split.
  double remainder = 0.0;
  int newton_iters = 0;
  std::vector<double> newton_residuals;
  /// ⟨φ^m - φ^0, 1⟩ once run() has filled it, else ⟨φ^m - φ^{m-1}, 1⟩.
  double mass_drift = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
  double max_unit_defect = 0.0;
  /// max over free nodes of |(ñ_i - n_i^{m-1})·n_i^{m-1}|
  double max_tangency_defect = 0.0;

  /// before - after - dissipation - remainder (zero up to roundoff).
  double ledger_defect() const;
};

class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, std::vector<double> residuals = {})
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

// ---------------------------------------------------------------------------

/// Unit tangent frames at the nodes without Dirichlet director data:
/// +90° rotation in 2D, two orthonormal vectors in 3D.
TangentFrames tangent_space(const DirectorField& n_prev, const BoundaryConditions& bc);

struct DirectorUpdate {
  VectorField n_tilde;
  DirectorField n_new;
  VectorField rate;  // (ñ - n_prev)/τ
  TangentFrames frames;
};

DirectorUpdate director_step(const P1Space& space, const PhaseState& state,
                             const ModelWeights& weights, const SchemeConfig& config,
                             const BoundaryConditions& bc);

ScalarField s_step(const P1Space& space, const PhaseState& state, const DirectorField& n_new,
                   const ModelWeights& weights, const SchemeConfig& config,
                   const BoundaryConditions& bc);

struct ChResult {
  ScalarField phi;
  ScalarField mu;
  int iterations = 0;
  std::vector<double> residuals;  // ‖R‖₂ before each update
};

/// Newton on the coupled (φ, μ) system starting from (φ_prev, μ_prev).
ChResult ch_step(const P1Space& space, const PhaseState& state, const ScalarField& s_new,
                 const DirectorField& n_new, const ModelWeights& weights,
                 const SchemeConfig& config);

struct StepResult {
  PhaseState state;
  StepReport report;
};

StepResult gradient_flow_step(const P1Space& space, const PhaseState& state,
                              const ModelWeights& weights, const SchemeConfig& config,
                              const BoundaryConditions& bc);

/// Callbacks invoked by run(). Any may be empty.
struct RunSinks {
  std::function<void(const PhaseState&, const EnergyReport&)> on_start;
  std::function<void(const PhaseState&, const StepReport&)> on_step;
};

/// Raised by run() when a step fails; carries the last good state.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& what, PhaseState last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const PhaseState& last_good() const { return last_good_; }

 private:
  PhaseState last_good_;
};

/// Advances from initial.time to config.t_final in uniform steps.
PhaseState run(const P1Space& space, const PhaseState& initial, const ModelWeights& weights,
               const SchemeConfig& config, const BoundaryConditions& bc,
               const RunSinks& sinks = {});

/// Connected components of the nodal graph {φ_i > level} over mesh edges.
int count_components(const TriMesh& mesh, const ScalarField& phi, double level = 0.0);

/// ∫ f_h for a nodal field (row sums of the mass matrix).
double integral(const P1Space& space, const ScalarField& f);

}  // namespace lcdrop
