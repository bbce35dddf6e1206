#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lcdrop/solver.hpp"

namespace lcdrop {

struct CheckOutcome {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string witness;  // serialized counterexample or extra detail
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kDefaultSeed = 20180627;

// ---------------------------------------------------------------------------
// Variational derivatives against central differences.

enum class EnergyDerivative {
  erk_n,
  erk_s,
  dw_s,
  ch_phi,
  wan_n,
  wan_s,
  wan_phi,
  was_s,
  was_phi,
};

const std::vector<EnergyDerivative>& all_energy_derivatives();
std::string derivative_name(EnergyDerivative which);

struct FdFields {
  ScalarField s;
  VectorField n;
  ScalarField phi;
};

/// Relative error between (E(x + hδ) - E(x - hδ))/(2h) and the assembled
/// derivative applied to δ. Only the component of `direction` matching
/// `which` is used.
double fd_relative_error(const P1Space& space, EnergyDerivative which, const FdFields& base,
                         const FdFields& direction, const ModelWeights& weights, double h);

/// Random base fields and admissible directions (tangent for n, zero on the
/// boundary for s and n) on a 4x4 mesh, `trials` samples.
CheckOutcome fd_derivative_check(EnergyDerivative which, std::uint64_t seed, int trials = 5,
                                 double h = 1e-5, double tol = 1e-6);

// ---------------------------------------------------------------------------
// Forms against naive reference loops.

/// Naive eform: all ordered node pairs, stiffness entries from explicit
/// triangle formulas.
double eform_reference(const TriMesh& mesh, const ScalarField& s, const ScalarField& z,
                       const VectorField& n, const VectorField& w);
/// Naive cform: gradients recomputed per element from nodal values.
double cform_reference(const TriMesh& mesh, const VectorField& v, const ScalarField& phi,
                       const VectorField& w, const ScalarField& psi, const ScalarField& s,
                       const ScalarField& z);

CheckOutcome brute_force_form_check(std::uint64_t seed, int trials = 1000, double tol = 1e-12);
/// cform against Σ_T ∫_T I_h{...} integrated with the degree-4 rule.
CheckOutcome cform_interpolant_check(std::uint64_t seed, int trials = 1000, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Randomized inequalities.

CheckOutcome projection_lemma_eform(std::uint64_t seed, int trials = 1000, double tol = -1e-12);
CheckOutcome projection_lemma_cform(std::uint64_t seed, int trials = 1000, double tol = -1e-12);
/// Σ_i m_i n_i^T H_i n_i with lumped weights m_i and random PSD H_i.
CheckOutcome lumped_mass_monotone(std::uint64_t seed, int trials = 1000, double tol = -1e-12);
CheckOutcome convex_split_inequality(std::uint64_t seed, int trials = 1000, double tol = -1e-12);
/// |f'(s*)|-type stationarity of the default double well at 0.75 plus
/// f(0) = 0 and f(0.75) = -0.5625.
CheckOutcome double_well_stationarity(double tol = 1e-12);

// ---------------------------------------------------------------------------
// Energy law.

/// Cumulative form E_ℓ + Σ_{m≤ℓ} D_m ≤ E_0 + rel_tol |E_0|, plus per-step
/// closure |before - after - D - R| ≤ rel_tol max(1, |before|), R ≥ 0 and
/// nonnegative normalization drops.
CheckOutcome energy_law_audit(double initial_energy, const std::vector<StepReport>& reports,
                              double rel_tol = 1e-9);

/// Runs the cornering preset at 16x16 to T = 0.2 and audits it.
CheckOutcome energy_law_audit_run(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Refinement and identities.

struct RefinementRow {
  int n = 0;
  double h = 0.0;
  double discrete = 0.0;
  double continuous = 0.0;
  double error = 0.0;
  double order = 0.0;  // against the previous row, 0 for the first
};

struct RefinementStudy {
  std::vector<RefinementRow> rows;
  double min_order = 0.0;
  /// max relative gap between the two forms of the anisotropic tension,
  /// continuous and discrete, over all meshes
  double anisotropic_gap = 0.0;
};

/// Smooth triple s = 0.5 + 0.2x, n = (cos θ, sin θ), φ = tanh profile, on
/// nx = 8, 16, 32, 64; continuous energies by dense tensor Gauss quadrature
/// with analytic gradients; ε fixed.
RefinementStudy refinement_study(const std::vector<int>& cells = {8, 16, 32, 64}, double eps = 0.1);
CheckOutcome refinement_energy_consistency(double min_order = 1.0);
CheckOutcome anisotropic_tension_identity(double tol = 1e-10);

// ---------------------------------------------------------------------------
// Mesh.

CheckOutcome weak_acuteness_sweep(int max_cells = 64);
/// Unit cell below the x axis with the obtuse triangle (0,0),(1,0),(-2,1)
/// attached; must be flagged with k = -1.
CheckOutcome obtuse_fixture_check();
TriMesh obtuse_fixture_mesh();

// ---------------------------------------------------------------------------

std::vector<CheckOutcome> run_verification_suite(std::uint64_t seed, std::ostream* progress = nullptr);
std::string to_json_line(const CheckOutcome& outcome);
void write_report(const std::string& path, const std::vector<CheckOutcome>& outcomes);

}  // namespace lcdrop
