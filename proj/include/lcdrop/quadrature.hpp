#pragma once

#include <vector>

#include <Eigen/Core>

namespace lcdrop {

/// Quadrature rule on the reference simplex. Points are given in barycentric
/// coordinates ((dim+1) x q); weights are fractions of the simplex measure and
/// sum to one.
struct SimplexQuadrature {
  Eigen::MatrixXd barycentric;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed-coordinate (Duffy) Gauss rule exact for polynomials of total
/// degree <= `degree` on a `dim`-simplex. All weights are positive.
SimplexQuadrature simplex_quadrature(int dim, int degree);

/// Vertex rule |T|/(dim+1) per vertex; exact for affine functions.
SimplexQuadrature vertex_quadrature(int dim);

}  // namespace lcdrop
