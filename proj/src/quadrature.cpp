#include "lcdrop/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lcdrop {

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_unit: n must be >= 1");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map [-1, 1] -> [0, 1].
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

SimplexQuadrature simplex_quadrature(int dim, int degree) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("simplex_quadrature: dim must be 2 or 3");
  if (degree < 0) throw std::invalid_argument("simplex_quadrature: negative degree");
  // The Duffy Jacobian adds dim-1 to the degree in the first collapsed direction.
  const int n = (degree + dim + 1) / 2;
  std::vector<double> x, w;
  gauss_legendre_unit(n, x, w);

  SimplexQuadrature rule;
  const double ref_measure = (dim == 2) ? 0.5 : 1.0 / 6.0;
  if (dim == 2) {
    rule.barycentric.resize(3, n * n);
    int q = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const double u = x[static_cast<std::size_t>(a)];
        const double v = x[static_cast<std::size_t>(b)];
        const double xi = u;
        const double eta = v * (1.0 - u);
        rule.barycentric.col(q++) << 1.0 - xi - eta, xi, eta;
        rule.weights.push_back(w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)] *
                               (1.0 - u) / ref_measure);
      }
    }
  } else {
    rule.barycentric.resize(4, n * n * n);
    int q = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          const double u = x[static_cast<std::size_t>(a)];
          const double v = x[static_cast<std::size_t>(b)];
          const double t = x[static_cast<std::size_t>(c)];
          const double xi = u;
          const double eta = v * (1.0 - u);
          const double zeta = t * (1.0 - u) * (1.0 - v);
          rule.barycentric.col(q++) << 1.0 - xi - eta - zeta, xi, eta, zeta;
          rule.weights.push_back(w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)] *
                                 w[static_cast<std::size_t>(c)] * (1.0 - u) * (1.0 - u) *
                                 (1.0 - v) / ref_measure);
        }
      }
    }
  }
  return rule;
}

SimplexQuadrature vertex_quadrature(int dim) {
  SimplexQuadrature rule;
  rule.barycentric = Eigen::MatrixXd::Identity(dim + 1, dim + 1);
  rule.weights.assign(static_cast<std::size_t>(dim + 1), 1.0 / (dim + 1));
  return rule;
}

}  // namespace lcdrop
