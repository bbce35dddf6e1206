#include <doctest.h>

#include <cmath>
#include <memory>

#include "lcdrop/energy.hpp"

using namespace lcdrop;

namespace {

std::shared_ptr<const P1Space> unit_space(int n) {
  return std::make_shared<P1Space>(std::make_shared<TriMesh>(build_structured_mesh(n, n)));
}

VectorField constant_director(int nodes, double angle) {
  VectorField v(2, nodes);
  v.row(0).setConstant(std::cos(angle));
  v.row(1).setConstant(std::sin(angle));
  return v;
}

}  // namespace

TEST_CASE("default double well") {
  const DoubleWell dw = DoubleWell::nematic_default();
  CHECK(dw.f(0.0) == 0.0);
  CHECK(dw.f(0.75) == doctest::Approx(-0.5625).epsilon(1e-15));
  CHECK(std::abs(dw.df(0.75)) < 1e-12);
  CHECK(std::abs(dw.df(0.25)) < 1e-12);
  CHECK(dw.f(1.0) == doctest::Approx(16.0 - 64.0 / 3.0 + 6.0));
  CHECK(dw.d2fc(0.3) == doctest::Approx(126.0));
  CHECK(dw.implicit_part_is_linear());
  CHECK_NOTHROW(dw.check_convex_split());
}

TEST_CASE("constant fields carry only bulk energy") {
  const auto sp = unit_space(6);
  const int n = sp->num_nodes();
  ModelWeights w;
  w.eps = 0.1;
  const ScalarField s = ScalarField::Constant(n, 0.75);
  const ScalarField phi = ScalarField::Ones(n);
  const EnergyReport r = total_energy(*sp, s, constant_director(n, 0.4), phi, w);
  CHECK(std::abs(r.e_erk) < 1e-14);
  CHECK(r.e_dw == doctest::Approx(-0.5625));
  CHECK(std::abs(r.e_chdw) < 1e-14);
  CHECK(std::abs(r.e_chgd) < 1e-14);
  CHECK(std::abs(r.e_wan) < 1e-14);
  CHECK(std::abs(r.e_was) < 1e-14);
  CHECK(r.total == doctest::Approx(w.w_dw * -0.5625));
}

TEST_CASE("Cahn-Hilliard energies of an affine phase field") {
  const auto sp = unit_space(8);
  const ScalarField phi = interpolate(sp->mesh(), [](const Eigen::VectorXd& x) { return x[0]; });
  CHECK(energy_ch_grad(*sp, phi, 0.2) == doctest::Approx(0.1));
  // ∫ (x²-1)²/(4ε) = (1/5 - 2/3 + 1)/(4ε)
  CHECK(energy_ch_dw(*sp, phi, 0.2) == doctest::Approx((0.2 - 2.0 / 3.0 + 1.0) / 0.8).epsilon(1e-12));
}

TEST_CASE("anchoring energy vanishes when the director follows the normal") {
  const auto sp = unit_space(4);
  const int n = sp->num_nodes();
  const ScalarField s = ScalarField::Constant(n, 0.6);
  const ScalarField phi = interpolate(sp->mesh(), [](const Eigen::VectorXd& x) { return x[0] + 2.0 * x[1]; });
  const ElementGradients g = sp->gradients(phi);
  const double angle = std::atan2(2.0, 1.0);
  CHECK(std::abs(energy_wan(*sp, s, constant_director(n, angle), g, 0.1)) < 1e-14);
  // perpendicular director: ε/2 ∫ s² |∇φ|²
  CHECK(energy_wan(*sp, s, constant_director(n, angle + M_PI / 2), g, 0.1) ==
        doctest::Approx(0.05 * 0.36 * 5.0));
}

TEST_CASE("eform of a rotating director on a uniform s") {
  const auto sp = unit_space(4);
  const int n = sp->num_nodes();
  const ScalarField s = ScalarField::Ones(n);
  VectorField dir(2, n);
  for (int i = 0; i < n; ++i) {
    const double th = 0.3 * sp->mesh().nodes()(0, i);
    dir.col(i) << std::cos(th), std::sin(th);
  }
  const double e = eform(*sp, s, s, dir, dir);
  // only horizontal edges see a change: k = 1 inside, 1/2 on the top and bottom
  // rows; both orientations of each edge are summed; |Δn|² = 4 sin²(0.3/8)
  const double expect = 2.0 * (3 * 4 * 1.0 + 2 * 4 * 0.5) * 4.0 * std::pow(std::sin(0.3 / 8.0), 2);
  CHECK(e == doctest::Approx(expect).epsilon(1e-12));
  CHECK(energy_ericksen(*sp, s, dir, 1.0) == doctest::Approx(0.5 * e));
  CHECK(0.5 * e == doctest::Approx(0.09).epsilon(1e-3));
}

TEST_CASE("weighted total") {
  EnergyReport r;
  r.e_erk = 1;
  r.e_dw = 2;
  r.e_chdw = 3;
  r.e_chgd = 4;
  r.e_wan = 5;
  r.e_was = 6;
  ModelWeights w;
  w.w_erk = 2;
  w.w_dw = 100;
  CHECK(weighted_total(r, w) == doctest::Approx(2 + 200 + 3 + 4 + 5 + 6));
}

TEST_CASE("director field validation") {
  VectorField v(2, 2);
  v << 3, 0,
       4, 0;
  CHECK_THROWS_AS(DirectorField::normalize(v), std::domain_error);
  v(0, 1) = 1e-3;
  const DirectorField d = DirectorField::normalize(v);
  CHECK(d.max_unit_defect() < 1e-15);
  CHECK(d.values()(0, 0) == doctest::Approx(0.6));
  CHECK_THROWS(DirectorField::from_unit(v));
}
