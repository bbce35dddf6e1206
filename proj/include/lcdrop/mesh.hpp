#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "lcdrop/sparse_operator.hpp"

namespace lcdrop {

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;
};

/// Conforming simplicial triangulation (triangles for dim 2, tetrahedra for
/// dim 3). Immutable after construction.
///
/// Nodes are stored column-wise (dim x N), elements column-wise ((dim+1) x E)
/// with positive orientation. Boundary information is node-based: every
/// boundary node carries the single tag "dirichlet".
class TriMesh {
 public:
  /// Validates the element table (indices in range and distinct, strictly
  /// positive measure, every facet shared by at most two elements).
  /// Throws std::invalid_argument naming the first offending element.
  TriMesh(int dim, Eigen::MatrixXd nodes, Eigen::MatrixXi elements,
          std::vector<int> boundary_nodes);

  int dim() const { return dim_; }
  int num_nodes() const { return static_cast<int>(nodes_.cols()); }
  int num_elements() const { return static_cast<int>(elements_.cols()); }

  const Eigen::MatrixXd& nodes() const { return nodes_; }
  const Eigen::MatrixXi& elements() const { return elements_; }
  Eigen::VectorXd node(int i) const { return nodes_.col(i); }

  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  bool is_boundary(int i) const { return on_boundary_[static_cast<std::size_t>(i)] != 0; }
  /// "dirichlet" for boundary nodes, empty for interior nodes.
  std::string boundary_tag(int i) const;

  /// |T_e|, computed once at construction.
  double element_measure(int e) const { return measures_[static_cast<std::size_t>(e)]; }
  const std::vector<double>& element_measures() const { return measures_; }
  double total_measure() const;

 private:
  int dim_;
  Eigen::MatrixXd nodes_;
  Eigen::MatrixXi elements_;
  std::vector<int> boundary_nodes_;
  std::vector<char> on_boundary_;
  std::vector<double> measures_;
};

/// Signed measure of a simplex given its vertex coordinates (dim x (dim+1)).
double simplex_signed_measure(const Eigen::MatrixXd& vertices);

/// Structured triangulation of `rect` with nx x ny cells, each cell split
/// along its lower-left to upper-right diagonal. Node (i, j) has index
/// j * (nx + 1) + i.
TriMesh build_structured_mesh(int nx, int ny, const Rect& rect = {});

/// Longest edge over all elements.
double mesh_size(const TriMesh& mesh);

struct ViolatingPair {
  int i;
  int j;
  double kij;
};

struct AcutenessReport {
  bool is_weakly_acute = true;
  double min_offdiag_kij = 0.0;
  std::vector<ViolatingPair> violating_pairs;
};

/// Classification threshold for k_ij; exact zeros occur on the structured
/// mesh and must not be flagged.
inline constexpr double kAcutenessTolerance = -1e-12;

/// Reports k_ij = -(stiffness)_ij over every stored off-diagonal entry.
AcutenessReport audit_weak_acuteness(const TriMesh& mesh, const SparseOperator& stiffness);

}  // namespace lcdrop
