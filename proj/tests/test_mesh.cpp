#include <doctest.h>

#include <cmath>

#include "lcdrop/assembly.hpp"
#include "lcdrop/mesh.hpp"

using namespace lcdrop;

TEST_CASE("structured mesh counts and boundary") {
  const TriMesh m = build_structured_mesh(3, 2);
  CHECK(m.num_nodes() == 12);
  CHECK(m.num_elements() == 12);
  CHECK(m.boundary_nodes().size() == 10);
  CHECK(m.total_measure() == doctest::Approx(1.0).epsilon(1e-15));
  for (int e = 0; e < m.num_elements(); ++e) CHECK(m.element_measure(e) > 0.0);
}

TEST_CASE("structured mesh respects the rectangle") {
  Rect r;
  r.x0 = -1.0;
  r.y0 = 2.0;
  r.x1 = 1.0;
  r.y1 = 3.0;
  const TriMesh m = build_structured_mesh(4, 4, r);
  CHECK(m.total_measure() == doctest::Approx(2.0));
  CHECK(m.nodes().row(0).minCoeff() == -1.0);
  CHECK(m.nodes().row(1).maxCoeff() == 3.0);
}

TEST_CASE("mesh size of the 64x64 unit square is sqrt(2)/64") {
  CHECK(mesh_size(build_structured_mesh(64, 64)) == doctest::Approx(std::sqrt(2.0) / 64).epsilon(1e-14));
}

TEST_CASE("degenerate and out-of-range elements are rejected") {
  Eigen::MatrixXd nodes(2, 3);
  nodes << 0, 1, 2,
           0, 0, 0;
  Eigen::MatrixXi el(3, 1);
  el << 0, 1, 2;
  CHECK_THROWS_AS(TriMesh(2, nodes, el, {0, 1, 2}), std::invalid_argument);
  el << 0, 1, 5;
  CHECK_THROWS_AS(TriMesh(2, nodes, el, {0, 1, 2}), std::invalid_argument);
}

TEST_CASE("structured meshes are weakly acute") {
  for (int nx : {1, 2, 7, 64}) {
    for (int ny : {1, 3, 64}) {
      const TriMesh m = build_structured_mesh(nx, ny);
      CHECK(audit_weak_acuteness(m, assemble_stiffness(m)).is_weakly_acute);
    }
  }
}

TEST_CASE("an obtuse triangle is flagged with k = -1") {
  // (0,0),(1,0),(-2,1): angle at the origin has cot = -2
  Eigen::MatrixXd nodes(2, 5);
  nodes << 0, 1, 0, 1, -2,
           -1, -1, 0, 0, 1;
  Eigen::MatrixXi el(3, 3);
  el << 0, 0, 2,
        1, 3, 3,
        3, 2, 4;
  const TriMesh m(2, nodes, el, {0, 1, 2, 3, 4});
  const AcutenessReport rep = audit_weak_acuteness(m, assemble_stiffness(m));
  CHECK_FALSE(rep.is_weakly_acute);
  REQUIRE(rep.violating_pairs.size() == 1);
  CHECK(rep.violating_pairs[0].kij == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(rep.min_offdiag_kij == doctest::Approx(-1.0).epsilon(1e-14));
}
