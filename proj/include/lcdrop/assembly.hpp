#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "lcdrop/mesh.hpp"
#include "lcdrop/quadrature.hpp"
#include "lcdrop/sparse_operator.hpp"

namespace lcdrop {

/// P1 scalar field: one value per node.
using ScalarField = Eigen::VectorXd;
/// P1 vector field: column i holds the d-vector at node i (dim x N).
using VectorField = Eigen::MatrixXd;
/// Piecewise-constant vector field: column e holds the value on element e.
using ElementGradients = Eigen::MatrixXd;

/// Raised for degenerate elements; the message names the element.
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Off-diagonal stiffness pair with i < j and k_ij = -∫∇η_i·∇η_j.
struct Edge {
  int i;
  int j;
  double kij;
};

SparseOperator assemble_stiffness(const TriMesh& mesh);
SparseOperator assemble_mass(const TriMesh& mesh);
/// Diagonal operator with entry i = Σ_{T∋i} |T|/(d+1).
SparseOperator assemble_lumped_mass(const TriMesh& mesh);

/// Constant gradient of the affine interpolant of `f` on every element.
ElementGradients element_gradients(const TriMesh& mesh, const ScalarField& f);

ScalarField interpolate(const TriMesh& mesh,
                        const std::function<double(const Eigen::VectorXd&)>& g);
VectorField interpolate_vector(const TriMesh& mesh,
                               const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g);

/// Mesh plus the P1 operators and per-element data every form needs.
/// Built once per mesh and shared read-only.
class P1Space {
 public:
  explicit P1Space(std::shared_ptr<const TriMesh> mesh);

  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> mesh_ptr() const { return mesh_; }
  int dim() const { return mesh_->dim(); }
  int num_nodes() const { return mesh_->num_nodes(); }
  int num_elements() const { return mesh_->num_elements(); }
  int vertex(int a, int e) const { return mesh_->elements()(a, e); }
  double measure(int e) const { return mesh_->element_measure(e); }

  const SparseOperator& stiffness() const { return stiffness_; }
  const SparseOperator& mass() const { return mass_; }
  const SparseOperator& lumped_mass() const { return lumped_mass_; }
  /// Lumped mass diagonal as a vector.
  const Eigen::VectorXd& lumped_diagonal() const { return lumped_diag_; }
  /// ∫η_i, i.e. the row sums of the mass matrix.
  const Eigen::VectorXd& basis_integrals() const { return basis_integrals_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Gradients of the element's barycentric basis functions (dim x (dim+1)).
  const Eigen::MatrixXd& basis_gradients(int e) const {
    return basis_gradients_[static_cast<std::size_t>(e)];
  }
  ElementGradients gradients(const ScalarField& f) const;

  /// Degree-4-exact rule used for every non-lumped nonlinear integral.
  const SimplexQuadrature& quadrature() const { return quadrature_; }

  /// Local P1 mass matrix of element e: |T|/((d+1)(d+2)) (1 + δ_ab).
  Eigen::MatrixXd local_mass(int e) const;

  void check_scalar(const ScalarField& f, const char* what) const;
  void check_vector(const VectorField& f, const char* what) const;
  void check_gradients(const ElementGradients& g, const char* what) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  SparseOperator stiffness_;
  SparseOperator mass_;
  SparseOperator lumped_mass_;
  Eigen::VectorXd lumped_diag_;
  Eigen::VectorXd basis_integrals_;
  std::vector<Edge> edges_;
  std::vector<Eigen::MatrixXd> basis_gradients_;
  SimplexQuadrature quadrature_;
};

/// ∫_Ω g(u_h(x)) dx with the space's degree-4 rule.
template <class Fn>
double integrate_nodal(const P1Space& space, const ScalarField& u, Fn&& g) {
  const auto& rule = space.quadrature();
  const int nv = space.dim() + 1;
  double total = 0.0;
  for (int e = 0; e < space.num_elements(); ++e) {
    double local = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      double uq = 0.0;
      for (int a = 0; a < nv; ++a) uq += rule.barycentric(a, q) * u[space.vertex(a, e)];
      local += rule.weights[static_cast<std::size_t>(q)] * g(uq);
    }
    total += space.measure(e) * local;
  }
  return total;
}

/// Load vector b_a = ∫_Ω g(u_h) η_a with the degree-4 rule.
template <class Fn>
Eigen::VectorXd load_nodal(const P1Space& space, const ScalarField& u, Fn&& g) {
  const auto& rule = space.quadrature();
  const int nv = space.dim() + 1;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.num_nodes());
  for (int e = 0; e < space.num_elements(); ++e) {
    for (int q = 0; q < rule.size(); ++q) {
      double uq = 0.0;
      for (int a = 0; a < nv; ++a) uq += rule.barycentric(a, q) * u[space.vertex(a, e)];
      const double wg = space.measure(e) * rule.weights[static_cast<std::size_t>(q)] * g(uq);
      for (int a = 0; a < nv; ++a) b[space.vertex(a, e)] += wg * rule.barycentric(a, q);
    }
  }
  return b;
}

/// ∫_Ω g(u1_h, ..., uk_h) dx for several nodal fields; `g` receives a
/// pointer to the k interpolated values at each quadrature point.
template <class Fn>
double integrate_fields(const P1Space& space, std::initializer_list<const ScalarField*> fields,
                        Fn&& g) {
  const auto& rule = space.quadrature();
  const int nv = space.dim() + 1;
  const std::vector<const ScalarField*> fs(fields);
  for (const ScalarField* f : fs) space.check_scalar(*f, "integrate_fields");
  std::vector<double> vals(fs.size());
  double total = 0.0;
  for (int e = 0; e < space.num_elements(); ++e) {
    double local = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      for (std::size_t k = 0; k < fs.size(); ++k) {
        double v = 0.0;
        for (int a = 0; a < nv; ++a) v += rule.barycentric(a, q) * (*fs[k])[space.vertex(a, e)];
        vals[k] = v;
      }
      local += rule.weights[static_cast<std::size_t>(q)] * g(vals.data());
    }
    total += space.measure(e) * local;
  }
  return total;
}

/// Weighted mass matrix ∫_Ω g(u_h) η_a η_b with the degree-4 rule.
SparseMatrix weighted_mass_nodal(const P1Space& space, const ScalarField& u,
                                 const std::function<double(double)>& g);

}  // namespace lcdrop
