#include "lcdrop/solver.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace lcdrop {

namespace {

using Triplet = Eigen::Triplet<double>;

/// Index of each node among the unconstrained ones, -1 if constrained.
std::vector<int> free_index(int num_nodes, const std::vector<int>& fixed, int& num_free) {
  std::vector<int> idx(static_cast<std::size_t>(num_nodes), 0);
  for (int i : fixed) idx[static_cast<std::size_t>(i)] = -1;
  num_free = 0;
  for (int& v : idx) v = (v < 0) ? -1 : num_free++;
  return idx;
}

SparseMatrix restrict_free(const SparseMatrix& a, const std::vector<int>& idx, int num_free) {
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    const int c = idx[static_cast<std::size_t>(col)];
    if (c < 0) continue;
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const int r = idx[static_cast<std::size_t>(it.row())];
      if (r >= 0) trips.emplace_back(r, c, it.value());
    }
  }
  SparseMatrix out(num_free, num_free);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx, int num_free) {
  Eigen::VectorXd out(num_free);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= 0) out[idx[i]] = v[static_cast<Eigen::Index>(i)];
  }
  return out;
}

Eigen::VectorXd solve_spd(const SparseMatrix& a, const Eigen::VectorXd& b,
                          const LinearSolverConfig& cfg, const char* what) {
  if (b.size() == 0) return b;
  if (cfg.kind == LinearSolverKind::cg) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(cfg.cg_tol);
    cg.setMaxIterations(cfg.cg_max_iter);
    cg.compute(a);
    Eigen::VectorXd x = cg.solve(b);
    if (cg.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << what << ": conjugate gradient did not converge (error " << cg.error() << " after "
          << cg.iterations() << " iterations)";
      throw StepError(msg.str());
    }
    return x;
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw StepError(std::string(what) + ": factorization failed");
  return ldlt.solve(b);
}

Eigen::VectorXd solve_general(const SparseMatrix& a, const Eigen::VectorXd& b, const char* what) {
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw StepError(std::string(what) + ": LU factorization failed: " + lu.lastErrorMessage());
  }
  return lu.solve(b);
}

double vector_mass_norm(const SparseMatrix& m, const VectorField& v) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < v.rows(); ++c) {
    const Eigen::VectorXd comp = v.row(c).transpose();
    total += comp.dot(m * comp);
  }
  return total;
}

std::string join_residuals(const std::vector<double>& r) {
  std::ostringstream out;
  out.precision(3);
  for (std::size_t k = 0; k < r.size(); ++k) out << (k ? ", " : "") << std::scientific << r[k];
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------

void BoundaryConditions::validate(int dim, int num_nodes) const {
  if (s_values.size() != static_cast<Eigen::Index>(s_nodes.size())) {
    throw std::invalid_argument("BoundaryConditions: one s value per s node expected");
  }
  if (n_values.cols() != static_cast<Eigen::Index>(n_nodes.size()) ||
      (!n_nodes.empty() && n_values.rows() != dim)) {
    throw std::invalid_argument("BoundaryConditions: one director per n node expected");
  }
  for (int i : s_nodes) {
    if (i < 0 || i >= num_nodes) throw std::invalid_argument("BoundaryConditions: s node out of range");
  }
  for (int i : n_nodes) {
    if (i < 0 || i >= num_nodes) throw std::invalid_argument("BoundaryConditions: n node out of range");
  }
  for (Eigen::Index k = 0; k < s_values.size(); ++k) {
    if (!(s_values[k] > -0.5 && s_values[k] < 1.0)) {
      throw std::invalid_argument("BoundaryConditions: s value outside (-1/2, 1) at node " +
                                  std::to_string(s_nodes[static_cast<std::size_t>(k)]));
    }
  }
  for (Eigen::Index k = 0; k < n_values.cols(); ++k) {
    if (std::abs(n_values.col(k).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("BoundaryConditions: director not unit at node " +
                                  std::to_string(n_nodes[static_cast<std::size_t>(k)]));
    }
  }
}

void BoundaryConditions::apply(PhaseState& state) const {
  for (std::size_t k = 0; k < s_nodes.size(); ++k) {
    state.s[s_nodes[k]] = s_values[static_cast<Eigen::Index>(k)];
  }
  if (!n_nodes.empty()) {
    VectorField n = state.n.values();
    for (std::size_t k = 0; k < n_nodes.size(); ++k) {
      n.col(n_nodes[k]) = n_values.col(static_cast<Eigen::Index>(k));
    }
    state.n = DirectorField::from_unit(std::move(n));
  }
}

void SchemeConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("SchemeConfig: tau must be > 0");
  if (!(t_final >= 0.0)) throw std::invalid_argument("SchemeConfig: t_final must be >= 0");
  if (!(newton_abs_tol > 0.0) || !(newton_res_tol > 0.0)) {
    throw std::invalid_argument("SchemeConfig: Newton tolerances must be > 0");
  }
  if (newton_max_iter < 1) throw std::invalid_argument("SchemeConfig: newton_max_iter must be >= 1");
  if (linear_solver.kind == LinearSolverKind::cg &&
      (!(linear_solver.cg_tol > 0.0) || linear_solver.cg_max_iter < 1)) {
    throw std::invalid_argument("SchemeConfig: invalid conjugate gradient settings");
  }
}

double Dissipation::sum() const {
  return erk_normalization + wan_normalization + chem_potential + director_rate + s_rate +
         ch_grad_tau2 + ch_dw_tau2 + erk_tau2 + wan_tau2 + was_tau2;
}

double StepReport::ledger_defect() const {
  return before.total - after.total - dissipation.sum() - remainder;
}

double integral(const P1Space& space, const ScalarField& f) {
  space.check_scalar(f, "integral");
  return space.basis_integrals().dot(f);
}

// ---------------------------------------------------------------------------

TangentFrames tangent_space(const DirectorField& n_prev, const BoundaryConditions& bc) {
  const int d = n_prev.dim();
  if (d != 2 && d != 3) throw std::invalid_argument("tangent_space: dimension must be 2 or 3");
  std::vector<char> pinned(static_cast<std::size_t>(n_prev.size()), 0);
  for (int i : bc.n_nodes) pinned[static_cast<std::size_t>(i)] = 1;

  TangentFrames frames;
  frames.dim = d;
  for (int i = 0; i < n_prev.size(); ++i) {
    if (!pinned[static_cast<std::size_t>(i)]) frames.nodes.push_back(i);
  }
  const int m = frames.frame_size();
  frames.tangents.resize(d, static_cast<Eigen::Index>(frames.nodes.size()) * m);
  const VectorField& n = n_prev.values();
  for (std::size_t k = 0; k < frames.nodes.size(); ++k) {
    const Eigen::VectorXd ni = n.col(frames.nodes[k]);
    const Eigen::Index u = static_cast<Eigen::Index>(k) * m;
    if (d == 2) {
      frames.tangents.col(u) << -ni[1], ni[0];
    } else {
      Eigen::Index axis;
      ni.cwiseAbs().minCoeff(&axis);
      Eigen::Vector3d e = Eigen::Vector3d::Unit(axis);
      const Eigen::Vector3d n3 = ni;
      const Eigen::Vector3d t1 = (e - e.dot(n3) * n3).normalized();
      frames.tangents.col(u) = t1;
      frames.tangents.col(u + 1) = n3.cross(t1);
    }
  }
  return frames;
}

DirectorUpdate director_step(const P1Space& space, const PhaseState& state,
                             const ModelWeights& weights, const SchemeConfig& config,
                             const BoundaryConditions& bc) {
  const VectorField& n_prev = state.n.values();
  DirectorUpdate up;
  up.frames = tangent_space(state.n, bc);
  const ElementGradients gphi = space.gradients(state.phi);
  const DirectorSystem sys = residual_director(space, state.s, n_prev, gphi, weights, config.tau,
                                               up.frames, config.mass_lumping_timederiv);
  const Eigen::VectorXd coeffs = solve_spd(sys.matrix, sys.rhs, config.linear_solver, "director step");
  up.rate = up.frames.expand(coeffs, space.num_nodes());
  up.n_tilde = n_prev + config.tau * up.rate;
  // pinned nodes keep their prescribed unit vector bit for bit
  VectorField unit = DirectorField::normalize(up.n_tilde).values();
  for (int i : bc.n_nodes) unit.col(i) = n_prev.col(i);
  up.n_new = DirectorField::from_unit(std::move(unit));
  return up;
}

ScalarField s_step(const P1Space& space, const PhaseState& state, const DirectorField& n_new,
                   const ModelWeights& weights, const SchemeConfig& config,
                   const BoundaryConditions& bc) {
  const OrientationEquation eq(space, state.s, n_new, space.gradients(state.phi), weights,
                               config.tau, config.mass_lumping_timederiv);
  int num_free = 0;
  const std::vector<int> idx = free_index(space.num_nodes(), bc.s_nodes, num_free);

  ScalarField s = state.s;
  for (std::size_t k = 0; k < bc.s_nodes.size(); ++k) {
    s[bc.s_nodes[k]] = bc.s_values[static_cast<Eigen::Index>(k)];
  }
  auto scatter_update = [&](const Eigen::VectorXd& delta) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= 0) s[static_cast<Eigen::Index>(i)] += delta[idx[i]];
    }
  };

  if (eq.is_linear()) {
    // Residual is affine: one step from any admissible s solves it exactly.
    const Eigen::VectorXd r = gather(eq.residual(s), idx, num_free);
    const SparseMatrix a = restrict_free(eq.jacobian(s), idx, num_free);
    scatter_update(-solve_spd(a, r, config.linear_solver, "orientation step"));
    return s;
  }

  std::vector<double> trace;
  for (int it = 0; it <= config.newton_max_iter; ++it) {
    const Eigen::VectorXd r = gather(eq.residual(s), idx, num_free);
    trace.push_back(r.norm());
    if (trace.back() <= config.newton_res_tol) return s;
    if (it == config.newton_max_iter) break;
    const SparseMatrix j = restrict_free(eq.jacobian(s), idx, num_free);
    const Eigen::VectorXd delta = solve_general(j, -r, "orientation Newton");
    scatter_update(delta);
    if (delta.norm() <= config.newton_abs_tol) return s;
  }
  throw StepError("orientation Newton did not converge; residuals: " + join_residuals(trace), trace);
}

ChResult ch_step(const P1Space& space, const PhaseState& state, const ScalarField& s_new,
                 const DirectorField& n_new, const ModelWeights& weights,
                 const SchemeConfig& config) {
  const CahnHilliardEquation eq(space, state.phi, s_new, n_new, weights, config.tau,
                                config.mass_lumping_timederiv);
  const Eigen::Index n = space.num_nodes();
  Eigen::VectorXd x(2 * n);
  x << state.phi, state.mu;

  ChResult out;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd r = eq.residual(x);
    out.residuals.push_back(r.norm());
    if (out.residuals.back() <= config.newton_res_tol) break;
    if (it == config.newton_max_iter) {
      throw StepError("Cahn-Hilliard Newton did not converge in " +
                          std::to_string(config.newton_max_iter) +
                          " iterations; residuals: " + join_residuals(out.residuals),
                      out.residuals);
    }
    const Eigen::VectorXd delta = solve_general(eq.jacobian(x), -r, "Cahn-Hilliard Newton");
    x += delta;
    ++out.iterations;
    if (delta.norm() <= config.newton_abs_tol) break;
  }
  out.phi = x.head(n);
  out.mu = x.tail(n);
  return out;
}

StepResult gradient_flow_step(const P1Space& space, const PhaseState& state,
                              const ModelWeights& weights, const SchemeConfig& config,
                              const BoundaryConditions& bc) {
  const double tau = config.tau;
  const ElementGradients gphi_prev = space.gradients(state.phi);

  DirectorUpdate dir = director_step(space, state, weights, config, bc);
  const ScalarField s_new = s_step(space, state, dir.n_new, weights, config, bc);
  ChResult ch = ch_step(space, state, s_new, dir.n_new, weights, config);

  StepResult res;
  res.state.s = s_new;
  res.state.n = dir.n_new;
  res.state.phi = std::move(ch.phi);
  res.state.mu = std::move(ch.mu);
  res.state.step_index = state.step_index + 1;
  res.state.time = state.time + tau;

  StepReport& rep = res.report;
  rep.step = res.state.step_index;
  rep.time = res.state.time;
  rep.before = total_energy(space, state.s, state.n, state.phi, weights);
  rep.after = total_energy(space, res.state.s, res.state.n, res.state.phi, weights);
  rep.newton_iters = ch.iterations;
  rep.newton_residuals = std::move(ch.residuals);
  rep.mass_drift = integral(space, res.state.phi - state.phi);
  rep.min_s = s_new.minCoeff();
  rep.max_s = s_new.maxCoeff();
  rep.max_unit_defect = res.state.n.max_unit_defect();
  for (int i : dir.frames.nodes) {
    rep.max_tangency_defect = std::max(
        rep.max_tangency_defect,
        std::abs((dir.n_tilde.col(i) - state.n.values().col(i)).dot(state.n.values().col(i))));
  }

  // Energy-law budget.
  const double eps = weights.eps;
  const SparseMatrix& mt = time_mass(space, config.mass_lumping_timederiv);
  const SparseMatrix& k = space.stiffness().matrix();
  const ScalarField& sp = state.s;
  const ScalarField ds = s_new - sp;
  const ScalarField dphi = res.state.phi - state.phi;
  const VectorField dn = dir.n_tilde - state.n.values();
  const VectorField& nn = dir.n_new.values();
  Dissipation& dis = rep.dissipation;

  dis.erk_normalization = 0.5 * weights.w_erk *
                          (eform(space, sp, sp, dir.n_tilde, dir.n_tilde) - eform(space, sp, sp, nn, nn));
  dis.wan_normalization =
      0.5 * weights.w_wan * eps *
      (cform(space, dir.n_tilde, gphi_prev, dir.n_tilde, gphi_prev, sp, sp) -
       cform(space, nn, gphi_prev, nn, gphi_prev, sp, sp));
  dis.chem_potential = tau * eps * res.state.mu.dot(k * res.state.mu);
  dis.director_rate = weights.rho * vector_mass_norm(mt, dn) / tau;
  dis.s_rate = ds.dot(mt * ds) / tau;
  dis.ch_grad_tau2 = 0.5 * weights.w_chgd * eps * dphi.dot(k * dphi);
  dis.ch_dw_tau2 = weights.w_chdw / eps *
                   integrate_fields(space, {&res.state.phi, &state.phi}, [](const double* v) {
                     const double a = v[0];
                     const double b = v[1];
                     return 0.25 * (a * a - b * b) * (a * a - b * b) + 0.5 * a * a * (a - b) * (a - b) +
                            0.5 * (a - b) * (a - b);
                   });
  dis.erk_tau2 = 0.5 * weights.w_erk *
                 (2.0 * weights.kappa * ds.dot(k * ds) + eform(space, ds, ds, nn, nn) +
                  eform(space, sp, sp, dn, dn));
  const ElementGradients gdphi = space.gradients(dphi);
  dis.wan_tau2 = 0.5 * weights.w_wan * eps *
                 (cform(space, nn, gdphi, nn, gdphi, s_new, s_new) +
                  cform(space, dn, gphi_prev, dn, gphi_prev, sp, sp));
  dis.was_tau2 = 0.5 * weights.w_was * eps *
                 (dphi.dot(profile_weighted_stiffness(space, s_new, weights.s_star) * dphi) +
                  ds.dot(gradient_weighted_mass(space, gphi_prev) * ds));

  const DoubleWell& dw = weights.double_well;
  rep.remainder = weights.w_dw * integrate_fields(space, {&s_new, &sp}, [&](const double* v) {
                    const double a = v[0];
                    const double b = v[1];
                    return (dw.dfc(a) - dw.dfe(b)) * (a - b) - (dw.f(a) - dw.f(b));
                  });
  return res;
}

PhaseState run(const P1Space& space, const PhaseState& initial, const ModelWeights& weights,
               const SchemeConfig& config, const BoundaryConditions& bc, const RunSinks& sinks) {
  weights.validate();
  config.validate();
  bc.validate(space.dim(), space.num_nodes());

  PhaseState state = initial;
  if (sinks.on_start) {
    sinks.on_start(state, total_energy(space, state.s, state.n, state.phi, weights));
  }
  const double mass0 = integral(space, initial.phi);
  const long steps = std::max(0L, std::lround((config.t_final - initial.time) / config.tau));
  for (long m = 0; m < steps; ++m) {
    StepResult next;
    try {
      next = gradient_flow_step(space, state, weights, config, bc);
    } catch (const std::exception& e) {
      throw RunAborted("step " + std::to_string(state.step_index + 1) + " failed: " + e.what(),
                       state);
    }
    next.report.mass_drift = integral(space, next.state.phi) - mass0;
    state = std::move(next.state);
    if (sinks.on_step) sinks.on_step(state, next.report);
  }
  return state;
}

int count_components(const TriMesh& mesh, const ScalarField& phi, double level) {
  const int n = mesh.num_nodes();
  if (phi.size() != n) throw std::invalid_argument("count_components: field size mismatch");
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  const auto& el = mesh.elements();
  for (Eigen::Index e = 0; e < el.cols(); ++e) {
    for (Eigen::Index a = 0; a < el.rows(); ++a) {
      for (Eigen::Index b = a + 1; b < el.rows(); ++b) {
        const int i = el(a, e);
        const int j = el(b, e);
        if (phi[i] > level && phi[j] > level) parent[static_cast<std::size_t>(find(i))] = find(j);
      }
    }
  }
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (phi[i] > level && find(i) == i) ++count;
  }
  return count;
}

}  // namespace lcdrop
