#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "lcdrop/solver.hpp"

using namespace lcdrop;

namespace {

struct Fixture {
  std::shared_ptr<const P1Space> space;
  PhaseState state;
  BoundaryConditions bc;
  ModelWeights weights;
  SchemeConfig scheme;
};

/// Droplet of radius 0.3 in a uniform nematic, director tilted inside.
Fixture droplet_fixture(int cells) {
  Fixture f;
  auto mesh = std::make_shared<TriMesh>(build_structured_mesh(cells, cells));
  f.space = std::make_shared<P1Space>(mesh);
  const int n = mesh->num_nodes();
  f.weights.eps = 0.1;
  f.weights.w_dw = 100.0;
  f.scheme.tau = 0.01;
  f.state.s = ScalarField::Constant(n, 0.6);
  f.state.phi.resize(n);
  VectorField dir(2, n);
  for (int i = 0; i < n; ++i) {
    const double x = mesh->nodes()(0, i) - 0.5, y = mesh->nodes()(1, i) - 0.5;
    f.state.phi[i] = -std::tanh((std::hypot(x, y) - 0.3) / 0.1);
    const double th = 0.8 * std::exp(-10 * (x * x + y * y));
    dir.col(i) << std::cos(th), std::sin(th);
  }
  f.state.n = DirectorField::from_unit(dir);
  f.state.mu = ScalarField::Zero(n);
  f.bc.s_nodes = f.bc.n_nodes = mesh->boundary_nodes();
  f.bc.s_values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(f.bc.s_nodes.size()), 0.6);
  f.bc.n_values = VectorField(2, static_cast<Eigen::Index>(f.bc.n_nodes.size()));
  for (std::size_t k = 0; k < f.bc.n_nodes.size(); ++k) {
    f.bc.n_values.col(static_cast<Eigen::Index>(k)) = f.state.n.values().col(f.bc.n_nodes[k]);
  }
  return f;
}

}  // namespace

TEST_CASE("tangent frames are orthonormal and skip constrained nodes") {
  VectorField v(2, 3);
  v << 1, 0, 0.6,
       0, 1, 0.8;
  BoundaryConditions bc;
  bc.n_nodes = {1};
  bc.n_values = VectorField(2, 1);
  bc.n_values << 0, 1;
  const TangentFrames tf = tangent_space(DirectorField::from_unit(v), bc);
  REQUIRE(tf.nodes == std::vector<int>{0, 2});
  REQUIRE(tf.num_unknowns() == 2);
  CHECK(std::abs(tf.tangents.col(0).dot(v.col(0))) < 1e-15);
  CHECK(std::abs(tf.tangents.col(0).norm() - 1.0) < 1e-15);
  CHECK(std::abs(std::abs(tf.tangents(1, 0)) - 1.0) < 1e-15);
  CHECK(std::abs(tf.tangents.col(1).dot(v.col(2))) < 1e-15);
  CHECK(std::abs(std::abs(tf.tangents(0, 1)) - 0.8) < 1e-15);
  const VectorField e = tf.expand(Eigen::Vector2d(2.0, 0.0), 3);
  CHECK(e.col(1).norm() == 0.0);
  CHECK(e.col(0).norm() == doctest::Approx(2.0));
}

TEST_CASE("pure phase Cahn-Hilliard step needs at most one Newton iteration") {
  Fixture f = droplet_fixture(6);
  f.state.phi.setOnes();
  const ChResult r = ch_step(*f.space, f.state, f.state.s, f.state.n, f.weights, f.scheme);
  CHECK(r.iterations <= 1);
  CHECK((r.phi.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("with every energy weight zero a step leaves the state unchanged") {
  Fixture f = droplet_fixture(6);
  f.weights.w_erk = f.weights.w_dw = f.weights.w_chdw = f.weights.w_chgd = 0.0;
  f.weights.w_wan = f.weights.w_was = 0.0;
  const StepResult r = gradient_flow_step(*f.space, f.state, f.weights, f.scheme, f.bc);
  CHECK((r.state.s - f.state.s).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((r.state.phi - f.state.phi).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((r.state.n.values() - f.state.n.values()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(r.state.step_index == 1);
  CHECK(r.state.time == doctest::Approx(f.scheme.tau));
}

TEST_CASE("a coupled step conserves mass, keeps the boundary data and closes the ledger") {
  Fixture f = droplet_fixture(8);
  const StepResult r = gradient_flow_step(*f.space, f.state, f.weights, f.scheme, f.bc);
  const StepReport& rep = r.report;
  CHECK(std::abs(integral(*f.space, r.state.phi) - integral(*f.space, f.state.phi)) < 1e-12);
  CHECK(rep.after.total <= rep.before.total);
  CHECK(std::abs(rep.ledger_defect()) <= 1e-9 * std::abs(rep.before.total));
  CHECK(rep.remainder >= -1e-12);
  CHECK(rep.max_unit_defect < 1e-14);
  CHECK(rep.max_tangency_defect < 1e-12);
  for (std::size_t k = 0; k < f.bc.s_nodes.size(); ++k) {
    const int i = f.bc.s_nodes[k];
    CHECK(r.state.s[i] == f.bc.s_values[static_cast<Eigen::Index>(k)]);
    CHECK((r.state.n.values().col(i) - f.bc.n_values.col(static_cast<Eigen::Index>(k))).norm() == 0.0);
  }
}

TEST_CASE("the director update is tangent before normalization") {
  Fixture f = droplet_fixture(6);
  const DirectorUpdate u = director_step(*f.space, f.state, f.weights, f.scheme, f.bc);
  double worst = 0.0;
  for (int i = 0; i < f.space->num_nodes(); ++i) {
    worst = std::max(worst, std::abs(u.rate.col(i).dot(f.state.n.values().col(i))));
    CHECK(u.n_tilde.col(i).norm() >= 1.0 - 1e-14);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("CG and direct solves agree on the SPD director system") {
  Fixture f = droplet_fixture(6);
  SchemeConfig cg = f.scheme;
  cg.linear_solver.kind = LinearSolverKind::cg;
  const StepResult a = gradient_flow_step(*f.space, f.state, f.weights, f.scheme, f.bc);
  const StepResult b = gradient_flow_step(*f.space, f.state, f.weights, cg, f.bc);
  CHECK((a.state.n.values() - b.state.n.values()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.state.s - b.state.s).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("energy decreases along a short run") {
  Fixture f = droplet_fixture(8);
  f.scheme.t_final = 0.1;
  double last = 0.0;
  int steps = 0;
  bool monotone = true;
  RunSinks sinks;
  sinks.on_start = [&](const PhaseState&, const EnergyReport& e) { last = e.total; };
  sinks.on_step = [&](const PhaseState&, const StepReport& r) {
    monotone = monotone && r.after.total <= last + 1e-11;
    last = r.after.total;
    ++steps;
    CHECK(std::abs(r.mass_drift) < 1e-12);
  };
  run(*f.space, f.state, f.weights, f.scheme, f.bc, sinks);
  CHECK(steps == 10);
  CHECK(monotone);
}

TEST_CASE("invalid scheme parameters are rejected") {
  SchemeConfig c;
  c.tau = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  ModelWeights w;
  w.w_wan = -1.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}

TEST_CASE("components of the positive phase") {
  const TriMesh m = build_structured_mesh(10, 10);
  ScalarField phi(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) {
    const double x = m.nodes()(0, i), y = m.nodes()(1, i);
    phi[i] = (std::hypot(x - 0.25, y - 0.5) < 0.15 || std::hypot(x - 0.75, y - 0.5) < 0.15) ? 1.0 : -1.0;
  }
  CHECK(count_components(m, phi) == 2);
  phi.setOnes();
  CHECK(count_components(m, phi) == 1);
  phi = -phi;
  CHECK(count_components(m, phi) == 0);
}
