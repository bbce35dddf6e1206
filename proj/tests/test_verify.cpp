#include <doctest.h>

#include "lcdrop/verify.hpp"

using namespace lcdrop;

TEST_CASE("naive eform reference matches a hand value") {
  const TriMesh m = build_structured_mesh(1, 1);
  const ScalarField one = ScalarField::Ones(4);
  VectorField n = VectorField::Zero(2, 4);
  // a single node differs by a unit vector; k_ij = 1/2 along each leg, 0 across the diagonal
  n(0, 0) = 1.0;
  const double e = eform_reference(m, one, one, n, n);
  CHECK(e == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("energy law audit flags an increase") {
  StepReport r;
  r.step = 1;
  r.before.total = 1.0;
  r.after.total = 1.1;
  r.remainder = -0.1;
  CHECK_FALSE(energy_law_audit(1.0, {r}).passed);
  r.after.total = 0.9;
  r.remainder = 0.1;
  CHECK(energy_law_audit(1.0, {r}).passed);
}

TEST_CASE("individual checks pass with a non-default seed") {
  CHECK(fd_derivative_check(EnergyDerivative::wan_phi, 7).passed);
  CHECK(brute_force_form_check(7, 50).passed);
  CHECK(projection_lemma_cform(7, 50).passed);
  CHECK(convex_split_inequality(7, 50).passed);
  CHECK(obtuse_fixture_check().passed);
  CHECK(weak_acuteness_sweep(6).passed);
}

TEST_CASE("report lines are JSON objects") {
  CheckOutcome o;
  o.name = "x";
  o.passed = true;
  o.measured = 0.5;
  o.tolerance = 1.0;
  o.seed = 3;
  const std::string line = to_json_line(o);
  CHECK(line.find("\"name\":\"x\"") != std::string::npos);
  CHECK(line.find("\"passed\":true") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
}
