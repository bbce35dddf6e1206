#include <doctest.h>

#include <cmath>
#include <memory>

#include "lcdrop/assembly.hpp"
#include "lcdrop/quadrature.hpp"

using namespace lcdrop;

namespace {

std::shared_ptr<const P1Space> space_on(int nx, int ny) {
  return std::make_shared<P1Space>(std::make_shared<TriMesh>(build_structured_mesh(nx, ny)));
}

int node_at(const TriMesh& m, double x, double y) {
  for (int i = 0; i < m.num_nodes(); ++i) {
    if (std::abs(m.nodes()(0, i) - x) < 1e-14 && std::abs(m.nodes()(1, i) - y) < 1e-14) return i;
  }
  return -1;
}

}  // namespace

TEST_CASE("stiffness: interior diagonal of the 2x2 mesh is 4") {
  const auto sp = space_on(2, 2);
  const int c = node_at(sp->mesh(), 0.5, 0.5);
  REQUIRE(c >= 0);
  CHECK(sp->stiffness().matrix().coeff(c, c) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("stiffness annihilates constants and is symmetric") {
  const auto sp = space_on(5, 3);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sp->num_nodes());
  CHECK(sp->stiffness().apply(ones).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(sp->stiffness().is_symmetric());
  const SparseMatrix& k = sp->stiffness().matrix();
  CHECK((SparseMatrix(k.transpose()) - k).norm() < 1e-14);
}

TEST_CASE("element mass of a right triangle with legs 1") {
  const auto sp = space_on(1, 1);
  const Eigen::MatrixXd m = sp->local_mass(0);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) CHECK(m(a, b) == doctest::Approx((a == b ? 2.0 : 1.0) / 24.0).epsilon(1e-14));
  }
}

TEST_CASE("lumped mass: interior diagonal is h^2 and row sums match the consistent mass") {
  const auto sp = space_on(4, 4);
  const int c = node_at(sp->mesh(), 0.5, 0.5);
  CHECK(sp->lumped_diagonal()[c] == doctest::Approx(0.0625).epsilon(1e-14));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sp->num_nodes());
  const Eigen::VectorXd rows = sp->mass().apply(ones);
  for (int i = 0; i < sp->num_nodes(); ++i) CHECK(rows[i] == doctest::Approx(sp->lumped_diagonal()[i]));
  CHECK(sp->mass().quadratic_form(ones) == doctest::Approx(1.0));
}

TEST_CASE("element gradients of an affine function are exact") {
  const auto sp = space_on(3, 3);
  const ScalarField f = interpolate(sp->mesh(), [](const Eigen::VectorXd& x) { return 2.0 * x[0] - 3.0 * x[1] + 1.0; });
  const ElementGradients g = sp->gradients(f);
  for (int e = 0; e < sp->num_elements(); ++e) {
    CHECK(g(0, e) == doctest::Approx(2.0));
    CHECK(g(1, e) == doctest::Approx(-3.0));
  }
}

TEST_CASE("simplex quadrature integrates monomials exactly") {
  const SimplexQuadrature q = simplex_quadrature(2, 4);
  double sum = 0.0;
  for (double w : q.weights) {
    CHECK(w > 0.0);
    sum += w;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  // ∫ x^a y^b over the reference triangle = a! b! / (a+b+2)!, weights are fractions of 1/2
  auto integral = [&](int a, int b) {
    double s = 0.0;
    for (int k = 0; k < q.size(); ++k) {
      s += 0.5 * q.weights[static_cast<std::size_t>(k)] * std::pow(q.barycentric(1, k), a) * std::pow(q.barycentric(2, k), b);
    }
    return s;
  };
  CHECK(integral(4, 0) == doctest::Approx(24.0 / 720.0).epsilon(1e-14));
  CHECK(integral(2, 2) == doctest::Approx(4.0 / 720.0).epsilon(1e-14));
  CHECK(integral(1, 3) == doctest::Approx(6.0 / 720.0).epsilon(1e-14));
  CHECK(integral(1, 1) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("Gauss-Legendre on [0,1]") {
  std::vector<double> x, w;
  gauss_legendre_unit(3, x, w);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * std::pow(x[k], 5);
  CHECK(s == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("integrate_fields of a product of affine fields") {
  const auto sp = space_on(4, 4);
  const ScalarField u = interpolate(sp->mesh(), [](const Eigen::VectorXd& x) { return x[0]; });
  const ScalarField v = interpolate(sp->mesh(), [](const Eigen::VectorXd& x) { return x[1]; });
  CHECK(integrate_fields(*sp, {&u, &v}, [](const double* a) { return a[0] * a[1]; }) == doctest::Approx(0.25));
  CHECK(integrate_fields(*sp, {&u}, [](const double* a) { return a[0] * a[0] * a[0] * a[0]; }) ==
        doctest::Approx(0.2).epsilon(1e-2));
}
