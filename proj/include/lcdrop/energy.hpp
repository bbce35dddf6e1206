#pragma once

#include <functional>
#include <string>

#include "lcdrop/assembly.hpp"
#include "lcdrop/double_well.hpp"

namespace lcdrop {

/// Energy weights and material constants of the droplet model.
struct ModelWeights {
  double w_erk = 1.0;
  double w_dw = 1.0;
  double w_chdw = 1.0;
  double w_chgd = 1.0;
  double w_wan = 1.0;
  double w_was = 1.0;
  double kappa = 1.0;
  double rho = 1.0;
  double eps = 0.05;
  double s_star = 0.750025;
  DoubleWell double_well = DoubleWell::nematic_default();

  /// Throws std::invalid_argument on negative weights, non-positive
  /// kappa/rho/eps, s_star outside (-1/2, 1) or a non-convex split.
  void validate() const;
};

/// Unit-length nodal vector field (the discrete director space).
class DirectorField {
 public:
  DirectorField() = default;

  /// Accepts `values` only if every column has unit length to `tol`.
  static DirectorField from_unit(VectorField values, double tol = 1e-12);
  /// Normalizes nodewise; throws std::domain_error naming the node when a
  /// column is shorter than `min_norm`.
  static DirectorField normalize(const VectorField& raw, double min_norm = 1e-14);

  const VectorField& values() const { return values_; }
  operator const VectorField&() const { return values_; }
  int dim() const { return static_cast<int>(values_.rows()); }
  int size() const { return static_cast<int>(values_.cols()); }
  /// max_i | |n_i| - 1 |
  double max_unit_defect() const;

 private:
  explicit DirectorField(VectorField values) : values_(std::move(values)) {}
  VectorField values_;
};

struct EnergyReport {
  double e_erk = 0.0;
  double e_dw = 0.0;
  double e_chdw = 0.0;
  double e_chgd = 0.0;
  double e_wan = 0.0;
  double e_was = 0.0;
  double total = 0.0;
};

using WarningSink = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Multilinear forms

/// Σ_{i,j} k_ij (s_i z_i + s_j z_j)/2 (n_i - n_j)·(w_i - w_j) over all ordered
/// node pairs.
double eform(const P1Space& space, const ScalarField& s, const ScalarField& z,
             const VectorField& n, const VectorField& w);

/// Lumped coupling form: Σ_T |T|/(d+1) Σ_{vertices} s z [(gφ·gψ)(v·w) -
/// (v·gφ)(w·gψ)], with the gradients restricted to T.
double cform(const P1Space& space, const VectorField& v, const ElementGradients& gphi,
             const VectorField& w, const ElementGradients& gpsi, const ScalarField& s,
             const ScalarField& z);

// ---------------------------------------------------------------------------
// Discrete energies

double energy_ericksen(const P1Space& space, const ScalarField& s, const VectorField& n,
                       double kappa);
/// ∫ f(s_h) by degree-4 quadrature. Nodal values outside (-1/2, 1) are
/// reported to `warn` but still evaluated.
double energy_dw(const P1Space& space, const ScalarField& s, const DoubleWell& dw,
                 const WarningSink& warn = {});
double energy_ch_dw(const P1Space& space, const ScalarField& phi, double eps);
double energy_ch_grad(const P1Space& space, const ScalarField& phi, double eps);
double energy_wan(const P1Space& space, const ScalarField& s, const VectorField& n,
                  const ElementGradients& gphi, double eps);
double energy_was(const P1Space& space, const ScalarField& s, const ElementGradients& gphi,
                  double eps, double s_star);

EnergyReport total_energy(const P1Space& space, const ScalarField& s, const VectorField& n,
                          const ScalarField& phi, const ModelWeights& weights);
/// Weighted sum of the components of `report`.
double weighted_total(const EnergyReport& report, const ModelWeights& weights);

// ---------------------------------------------------------------------------
// Assembled variational derivatives: the returned vector g satisfies
// δE[x; δ] = Σ_i g_i · δ_i.

VectorField grad_ericksen_n(const P1Space& space, const ScalarField& s, const VectorField& n);
ScalarField grad_ericksen_s(const P1Space& space, const ScalarField& s, const VectorField& n,
                            double kappa);
ScalarField grad_dw_s(const P1Space& space, const ScalarField& s, const DoubleWell& dw);
ScalarField grad_ch_dw_phi(const P1Space& space, const ScalarField& phi, double eps);
ScalarField grad_ch_grad_phi(const P1Space& space, const ScalarField& phi, double eps);
VectorField grad_wan_n(const P1Space& space, const ScalarField& s, const VectorField& n,
                       const ElementGradients& gphi, double eps);
ScalarField grad_wan_s(const P1Space& space, const ScalarField& s, const VectorField& n,
                       const ElementGradients& gphi, double eps);
ScalarField grad_wan_phi(const P1Space& space, const ScalarField& s, const VectorField& n,
                         const ScalarField& phi, double eps);
ScalarField grad_was_s(const P1Space& space, const ScalarField& s, const ElementGradients& gphi,
                       double eps, double s_star);
ScalarField grad_was_phi(const P1Space& space, const ScalarField& s, const ScalarField& phi,
                         double eps, double s_star);

}  // namespace lcdrop
