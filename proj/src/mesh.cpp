#include "lcdrop/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace lcdrop {

namespace {

std::string element_error(int e, const std::string& what) {
  return "element " + std::to_string(e) + ": " + what;
}

}  // namespace

double simplex_signed_measure(const Eigen::MatrixXd& vertices) {
  const Eigen::Index dim = vertices.rows();
  if (vertices.cols() != dim + 1) {
    throw std::invalid_argument("simplex_signed_measure: expected dim+1 vertices");
  }
  Eigen::MatrixXd edges(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) edges.col(k) = vertices.col(k + 1) - vertices.col(0);
  double factorial = 1.0;
  for (Eigen::Index k = 2; k <= dim; ++k) factorial *= static_cast<double>(k);
  return edges.determinant() / factorial;
}

TriMesh::TriMesh(int dim, Eigen::MatrixXd nodes, Eigen::MatrixXi elements,
                 std::vector<int> boundary_nodes)
    : dim_(dim),
      nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      boundary_nodes_(std::move(boundary_nodes)) {
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("TriMesh: dim must be 2 or 3");
  if (nodes_.rows() != dim_) throw std::invalid_argument("TriMesh: node table must have dim rows");
  if (elements_.rows() != dim_ + 1) {
    throw std::invalid_argument("TriMesh: element table must have dim+1 rows");
  }
  const int n = num_nodes();

  on_boundary_.assign(static_cast<std::size_t>(n), 0);
  std::sort(boundary_nodes_.begin(), boundary_nodes_.end());
  boundary_nodes_.erase(std::unique(boundary_nodes_.begin(), boundary_nodes_.end()),
                        boundary_nodes_.end());
  for (int b : boundary_nodes_) {
    if (b < 0 || b >= n) throw std::invalid_argument("TriMesh: boundary node out of range");
    on_boundary_[static_cast<std::size_t>(b)] = 1;
  }

  std::map<std::array<int, 3>, int> facet_count;
  measures_.resize(static_cast<std::size_t>(num_elements()));
  Eigen::MatrixXd vertices(dim_, dim_ + 1);
  for (int e = 0; e < num_elements(); ++e) {
    std::array<int, 4> verts{-1, -1, -1, -1};
    for (int a = 0; a <= dim_; ++a) {
      const int v = elements_(a, e);
      if (v < 0 || v >= n) throw std::invalid_argument(element_error(e, "vertex index out of range"));
      verts[static_cast<std::size_t>(a)] = v;
      vertices.col(a) = nodes_.col(v);
    }
    std::sort(verts.begin(), verts.begin() + dim_ + 1);
    if (std::adjacent_find(verts.begin(), verts.begin() + dim_ + 1) != verts.begin() + dim_ + 1) {
      throw std::invalid_argument(element_error(e, "repeated vertex"));
    }
    const double measure = simplex_signed_measure(vertices);
    if (!(measure > 0.0)) {
      throw std::invalid_argument(element_error(e, "non-positive measure " + std::to_string(measure)));
    }
    measures_[static_cast<std::size_t>(e)] = measure;

    // Facets: drop one vertex at a time from the sorted vertex list.
    for (int skip = 0; skip <= dim_; ++skip) {
      std::array<int, 3> key{-1, -1, -1};
      int k = 0;
      for (int a = 0; a <= dim_; ++a) {
        if (a != skip) key[static_cast<std::size_t>(k++)] = verts[static_cast<std::size_t>(a)];
      }
      if (++facet_count[key] > 2) {
        throw std::invalid_argument(element_error(e, "facet shared by more than two elements"));
      }
    }
  }
}

std::string TriMesh::boundary_tag(int i) const { return is_boundary(i) ? "dirichlet" : ""; }

double TriMesh::total_measure() const {
  double total = 0.0;
  for (double m : measures_) total += m;
  return total;
}

TriMesh build_structured_mesh(int nx, int ny, const Rect& rect) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_structured_mesh: cell counts must be >= 1");
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0)) {
    throw std::invalid_argument("build_structured_mesh: degenerate rectangle");
  }
  const int n = (nx + 1) * (ny + 1);
  Eigen::MatrixXd nodes(2, n);
  std::vector<int> boundary;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int id = j * (nx + 1) + i;
      // (L * i) / n is bit-identical for (L * 2i) / 2n, so refinements nest exactly.
      nodes(0, id) = (i == nx) ? rect.x1 : rect.x0 + (rect.x1 - rect.x0) * i / nx;
      nodes(1, id) = (j == ny) ? rect.y1 : rect.y0 + (rect.y1 - rect.y0) * j / ny;
      if (i == 0 || j == 0 || i == nx || j == ny) boundary.push_back(id);
    }
  }
  Eigen::MatrixXi elements(3, 2 * nx * ny);
  int e = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = j * (nx + 1) + i;
      const int b = a + 1;
      const int c = b + (nx + 1);
      const int d = a + (nx + 1);
      elements.col(e++) << a, b, c;
      elements.col(e++) << a, c, d;
    }
  }
  return TriMesh(2, std::move(nodes), std::move(elements), std::move(boundary));
}

double mesh_size(const TriMesh& mesh) {
  double h = 0.0;
  const auto& el = mesh.elements();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int a = 0; a <= mesh.dim(); ++a) {
      for (int b = a + 1; b <= mesh.dim(); ++b) {
        h = std::max(h, (mesh.nodes().col(el(a, e)) - mesh.nodes().col(el(b, e))).norm());
      }
    }
  }
  return h;
}

AcutenessReport audit_weak_acuteness(const TriMesh& mesh, const SparseOperator& stiffness) {
  if (stiffness.size() != mesh.num_nodes()) {
    throw std::invalid_argument("audit_weak_acuteness: stiffness size does not match mesh");
  }
  AcutenessReport report;
  bool seen = false;
  const SparseMatrix& k = stiffness.matrix();
  for (Eigen::Index col = 0; col < k.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
      if (it.row() == it.col()) continue;
      const double kij = -it.value();
      if (!seen || kij < report.min_offdiag_kij) report.min_offdiag_kij = kij;
      seen = true;
      if (kij < kAcutenessTolerance && it.row() < it.col()) {
        report.violating_pairs.push_back(
            {static_cast<int>(it.row()), static_cast<int>(it.col()), kij});
      }
    }
  }
  report.is_weakly_acute = report.violating_pairs.empty();
  return report;
}

}  // namespace lcdrop
