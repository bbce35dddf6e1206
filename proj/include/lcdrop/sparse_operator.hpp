#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace lcdrop {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Square sparse matrix (column-major compressed storage) with a symmetry
/// flag. Explicit stored zeros are kept so the pattern follows the mesh
/// adjacency exactly.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(SparseMatrix matrix, bool symmetric);

  Eigen::Index size() const { return matrix_.rows(); }
  const SparseMatrix& matrix() const { return matrix_; }
  bool is_symmetric() const { return symmetric_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix_ * x; }
  double quadratic_form(const Eigen::VectorXd& x) const { return x.dot(matrix_ * x); }
  /// Diagonal of the matrix as a dense vector.
  Eigen::VectorXd diagonal() const { return matrix_.diagonal(); }

 private:
  SparseMatrix matrix_;
  bool symmetric_ = false;
};

}  // namespace lcdrop
