#include "lcdrop/assembly.hpp"

#include <string>

#include <Eigen/LU>
#include <Eigen/SparseCore>

namespace lcdrop {

SparseOperator::SparseOperator(SparseMatrix matrix, bool symmetric)
    : matrix_(std::move(matrix)), symmetric_(symmetric) {
  matrix_.makeCompressed();
}

namespace {

using Triplet = Eigen::Triplet<double>;

Eigen::MatrixXd element_vertices(const TriMesh& mesh, int e) {
  Eigen::MatrixXd v(mesh.dim(), mesh.dim() + 1);
  for (int a = 0; a <= mesh.dim(); ++a) v.col(a) = mesh.nodes().col(mesh.elements()(a, e));
  return v;
}

/// Barycentric basis gradients (dim x (dim+1)) of element e.
Eigen::MatrixXd local_basis_gradients(const TriMesh& mesh, int e) {
  const int d = mesh.dim();
  const Eigen::MatrixXd v = element_vertices(mesh, e);
  Eigen::MatrixXd jac(d, d);
  for (int k = 0; k < d; ++k) jac.col(k) = v.col(k + 1) - v.col(0);
  const double det = jac.determinant();
  if (!(det > 0.0)) {
    throw AssemblyError("degenerate element " + std::to_string(e) + " (Jacobian determinant " +
                        std::to_string(det) + ")");
  }
  const Eigen::MatrixXd inv = jac.inverse();
  Eigen::MatrixXd grads(d, d + 1);
  for (int a = 1; a <= d; ++a) grads.col(a) = inv.row(a - 1).transpose();
  grads.col(0) = -grads.rightCols(d).rowwise().sum();
  return grads;
}

Eigen::MatrixXd local_mass_matrix(int dim, double measure) {
  const int nv = dim + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(nv, nv, 1.0);
  m.diagonal().array() += 1.0;
  return m * (measure / ((dim + 1) * (dim + 2)));
}

SparseMatrix from_local(const TriMesh& mesh, const std::function<Eigen::MatrixXd(int)>& local) {
  const int nv = mesh.dim() + 1;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_elements() * nv * nv));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::MatrixXd m = local(e);
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) {
        trips.emplace_back(mesh.elements()(a, e), mesh.elements()(b, e), m(a, b));
      }
    }
  }
  SparseMatrix out(mesh.num_nodes(), mesh.num_nodes());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

SparseOperator assemble_stiffness(const TriMesh& mesh) {
  return SparseOperator(from_local(mesh,
                                   [&](int e) {
                                     const Eigen::MatrixXd g = local_basis_gradients(mesh, e);
                                     return Eigen::MatrixXd(mesh.element_measure(e) *
                                                            (g.transpose() * g));
                                   }),
                        true);
}

SparseOperator assemble_mass(const TriMesh& mesh) {
  return SparseOperator(
      from_local(mesh,
                 [&](int e) {
                   local_basis_gradients(mesh, e);  // degeneracy check
                   return local_mass_matrix(mesh.dim(), mesh.element_measure(e));
                 }),
      true);
}

SparseOperator assemble_lumped_mass(const TriMesh& mesh) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double share = mesh.element_measure(e) / (mesh.dim() + 1);
    for (int a = 0; a <= mesh.dim(); ++a) diag[mesh.elements()(a, e)] += share;
  }
  SparseMatrix m(mesh.num_nodes(), mesh.num_nodes());
  std::vector<Triplet> trips;
  for (int i = 0; i < mesh.num_nodes(); ++i) trips.emplace_back(i, i, diag[i]);
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(std::move(m), true);
}

ElementGradients element_gradients(const TriMesh& mesh, const ScalarField& f) {
  if (f.size() != mesh.num_nodes()) {
    throw std::invalid_argument("element_gradients: field size does not match mesh");
  }
  ElementGradients g(mesh.dim(), mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::MatrixXd grads = local_basis_gradients(mesh, e);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(mesh.dim());
    for (int a = 0; a <= mesh.dim(); ++a) acc += f[mesh.elements()(a, e)] * grads.col(a);
    g.col(e) = acc;
  }
  return g;
}

ScalarField interpolate(const TriMesh& mesh,
                        const std::function<double(const Eigen::VectorXd&)>& g) {
  ScalarField out(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) out[i] = g(mesh.nodes().col(i));
  return out;
}

VectorField interpolate_vector(const TriMesh& mesh,
                               const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g) {
  VectorField out(mesh.dim(), mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Eigen::VectorXd v = g(mesh.nodes().col(i));
    if (v.size() != mesh.dim()) {
      throw std::invalid_argument("interpolate_vector: function returned wrong dimension");
    }
    out.col(i) = v;
  }
  return out;
}

P1Space::P1Space(std::shared_ptr<const TriMesh> mesh)
    : mesh_(std::move(mesh)),
      stiffness_(assemble_stiffness(*mesh_)),
      mass_(assemble_mass(*mesh_)),
      lumped_mass_(assemble_lumped_mass(*mesh_)),
      quadrature_(simplex_quadrature(mesh_->dim(), 4)) {
  lumped_diag_ = lumped_mass_.diagonal();
  basis_integrals_ = mass_.matrix() * Eigen::VectorXd::Ones(num_nodes());

  const SparseMatrix& k = stiffness_.matrix();
  for (Eigen::Index col = 0; col < k.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
      if (it.row() < it.col()) {
        edges_.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), -it.value()});
      }
    }
  }
  basis_gradients_.reserve(static_cast<std::size_t>(num_elements()));
  for (int e = 0; e < num_elements(); ++e) basis_gradients_.push_back(local_basis_gradients(*mesh_, e));
}

ElementGradients P1Space::gradients(const ScalarField& f) const {
  check_scalar(f, "gradients");
  ElementGradients g(dim(), num_elements());
  for (int e = 0; e < num_elements(); ++e) {
    const Eigen::MatrixXd& grads = basis_gradients(e);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim());
    for (int a = 0; a <= dim(); ++a) acc += f[vertex(a, e)] * grads.col(a);
    g.col(e) = acc;
  }
  return g;
}

Eigen::MatrixXd P1Space::local_mass(int e) const { return local_mass_matrix(dim(), measure(e)); }

void P1Space::check_scalar(const ScalarField& f, const char* what) const {
  if (f.size() != num_nodes()) {
    throw std::invalid_argument(std::string(what) + ": scalar field size does not match mesh");
  }
}

void P1Space::check_vector(const VectorField& f, const char* what) const {
  if (f.rows() != dim() || f.cols() != num_nodes()) {
    throw std::invalid_argument(std::string(what) + ": vector field shape does not match mesh");
  }
}

void P1Space::check_gradients(const ElementGradients& g, const char* what) const {
  if (g.rows() != dim() || g.cols() != num_elements()) {
    throw std::invalid_argument(std::string(what) + ": element gradient count does not match mesh");
  }
}

SparseMatrix weighted_mass_nodal(const P1Space& space, const ScalarField& u,
                                 const std::function<double(double)>& g) {
  space.check_scalar(u, "weighted_mass_nodal");
  const auto& rule = space.quadrature();
  const int nv = space.dim() + 1;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(space.num_elements() * nv * nv));
  Eigen::MatrixXd local(nv, nv);
  for (int e = 0; e < space.num_elements(); ++e) {
    local.setZero();
    for (int q = 0; q < rule.size(); ++q) {
      const auto lam = rule.barycentric.col(q);
      double uq = 0.0;
      for (int a = 0; a < nv; ++a) uq += lam[a] * u[space.vertex(a, e)];
      local += (space.measure(e) * rule.weights[static_cast<std::size_t>(q)] * g(uq)) *
               (lam * lam.transpose());
    }
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) trips.emplace_back(space.vertex(a, e), space.vertex(b, e), local(a, b));
    }
  }
  SparseMatrix out(space.num_nodes(), space.num_nodes());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace lcdrop
