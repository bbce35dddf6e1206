#pragma once

#include <vector>

#include "lcdrop/assembly.hpp"
#include "lcdrop/energy.hpp"

namespace lcdrop {

// ---------------------------------------------------------------------------
// Building blocks of the forms, assembled once per step and reused.

/// k_ij (s_i z_i + s_j z_j)/2 for every edge of space.edges(), in order.
Eigen::VectorXd ericksen_edge_weights(const P1Space& space, const ScalarField& s,
                                      const ScalarField& z);
/// Σ_e w_e (e_i - e_j)(e_i - e_j)^T. With Ericksen edge weights,
/// eform(s, z, n, w) = 2 Σ_c n_c^T L w_c.
SparseMatrix edge_laplacian(const P1Space& space, const Eigen::VectorXd& edge_weights);
/// D_i = Σ_j k_ij |n_i - n_j|^2, so eform(s, z, n, n) = Σ_i s_i z_i D_i.
Eigen::VectorXd ericksen_s_diagonal(const P1Space& space, const VectorField& n);

/// Per-node lumped tensors H_i = Σ_{T∋i} |T|/(d+1) [(g_T·g_T) I - g_T ⊗ g_T],
/// stored column-major as (dim*dim) x N.
Eigen::MatrixXd anchoring_node_tensors(const P1Space& space, const ElementGradients& gphi);
/// h_i = n_i^T H_i n_i, so cform(n, g, n, g, s, z) = Σ_i s_i z_i h_i.
Eigen::VectorXd anchoring_s_diagonal(const P1Space& space, const VectorField& n,
                                     const ElementGradients& gphi);
/// C with φ^T C ψ = cform(n, ∇φ, n, ∇ψ, s, s).
SparseMatrix anchoring_stiffness(const P1Space& space, const ScalarField& s, const VectorField& n);
/// W with s^T W z = ∫ |g|^2 s_h z_h for piecewise-constant g.
SparseMatrix gradient_weighted_mass(const P1Space& space, const ElementGradients& gphi);
/// S with φ^T S ψ = ∫ (s_h - s*)^2 ∇φ_h·∇ψ_h.
SparseMatrix profile_weighted_stiffness(const P1Space& space, const ScalarField& s, double s_star);

/// Mass matrix used for the time-derivative pairings (consistent unless
/// `lumped`).
const SparseMatrix& time_mass(const P1Space& space, bool lumped);

// ---------------------------------------------------------------------------
// Director equation on the tangent space of the previous director.

/// Orthonormal tangent frames at the free director nodes: for node
/// nodes[k], columns k*(dim-1) ... (k+1)*(dim-1)-1 of `tangents`.
struct TangentFrames {
  int dim = 2;
  std::vector<int> nodes;
  Eigen::MatrixXd tangents;

  int frame_size() const { return dim - 1; }
  int num_unknowns() const { return static_cast<int>(tangents.cols()); }
  /// Σ coeff_u t_u scattered back to a nodal vector field.
  VectorField expand(const Eigen::VectorXd& coeffs, int num_nodes) const;
};

/// SPD system for the tangent coefficients a of v = Σ a_u t_u:
///   ρ⟨v, w⟩ + ω_erk e(s,s; n + τv, w) + ω_wan ε c(n + τv, ∇φ, w, ∇φ, s, s) = 0
/// for all tangent w, with s, φ, n from the previous step.
struct DirectorSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
};

DirectorSystem residual_director(const P1Space& space, const ScalarField& s_prev,
                                 const VectorField& n_prev, const ElementGradients& gphi_prev,
                                 const ModelWeights& weights, double tau,
                                 const TangentFrames& frames, bool lumped_time_mass = false);

// ---------------------------------------------------------------------------
// Orientation equation with the convex splitting of the double well.

/// R(s) = A s - b + ω_dw ∫ f_c'(s_h) η  (no boundary conditions applied).
/// A holds the mass/τ, Ericksen, surface-anchoring and half of the
/// weak-anchoring contribution; the other half of the averaged-s coupling,
/// the explicit f_e'(s_prev) and the s* shift live in b.
class OrientationEquation {
 public:
  OrientationEquation(const P1Space& space, const ScalarField& s_prev, const VectorField& n_new,
                      const ElementGradients& gphi_prev, const ModelWeights& weights, double tau,
                      bool lumped_time_mass = false);

  Eigen::VectorXd residual(const ScalarField& s) const;
  SparseMatrix jacobian(const ScalarField& s) const;
  /// True when the residual is affine in s (one linear solve suffices).
  bool is_linear() const;

 private:
  const P1Space& space_;
  ModelWeights weights_;
  SparseMatrix linear_part_;
  Eigen::VectorXd rhs_;
};

// ---------------------------------------------------------------------------
// Cahn-Hilliard pair (φ, μ), unknown vector x = [φ; μ].

class CahnHilliardEquation {
 public:
  CahnHilliardEquation(const P1Space& space, const ScalarField& phi_prev, const ScalarField& s_new,
                       const VectorField& n_new, const ModelWeights& weights, double tau,
                       bool lumped_time_mass = false);

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const;
  SparseMatrix jacobian(const Eigen::VectorXd& x) const;
  int num_nodes() const { return space_.num_nodes(); }

 private:
  const P1Space& space_;
  ModelWeights weights_;
  double tau_;
  const SparseMatrix& time_mass_;
  ScalarField phi_prev_;
  Eigen::VectorXd explicit_load_;  // ⟨φ_prev, ψ⟩
  SparseMatrix phi_operator_;      // ω_chgd ε K + ω_wan ε C + ω_was ε S
};

}  // namespace lcdrop
