#include "lcdrop/verify.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lcdrop/operators.hpp"
#include "lcdrop/scenario.hpp"

namespace lcdrop {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
  Eigen::VectorXd vector(Eigen::Index n, double a, double b) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }
  Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c, double a, double b) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) m.col(j) = vector(r, a, b);
    return m;
  }
  VectorField unit_field(int dim, int n) {
    VectorField v(dim, n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd x;
      do {
        x = vector(dim, -1.0, 1.0);
      } while (x.norm() < 1e-3);
      v.col(i) = x.normalized();
    }
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

std::shared_ptr<const P1Space> unit_square_space(int cells) {
  return std::make_shared<P1Space>(std::make_shared<TriMesh>(build_structured_mesh(cells, cells)));
}

CheckOutcome outcome(std::string name, bool passed, double measured, double tol, std::uint64_t seed,
                     std::string witness = {}) {
  CheckOutcome o;
  o.name = std::move(name);
  o.passed = passed;
  o.measured = measured;
  o.tolerance = tol;
  o.seed = seed;
  o.witness = std::move(witness);
  return o;
}

/// Gradients of the barycentric coordinates of triangle (p0, p1, p2) and
/// its area, written out explicitly.
struct NaiveTriangle {
  double area;
  double grad[3][2];
};

NaiveTriangle naive_triangle(const TriMesh& mesh, int e) {
  double x[3], y[3];
  for (int a = 0; a < 3; ++a) {
    const int i = mesh.elements()(a, e);
    x[a] = mesh.nodes()(0, i);
    y[a] = mesh.nodes()(1, i);
  }
  NaiveTriangle t;
  const double twice = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
  t.area = 0.5 * twice;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    t.grad[a][0] = (y[b] - y[c]) / twice;
    t.grad[a][1] = (x[c] - x[b]) / twice;
  }
  return t;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << std::scientific << v;
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<EnergyDerivative>& all_energy_derivatives() {
  static const std::vector<EnergyDerivative> all = {
      EnergyDerivative::erk_n, EnergyDerivative::erk_s,   EnergyDerivative::dw_s,
      EnergyDerivative::ch_phi, EnergyDerivative::wan_n,  EnergyDerivative::wan_s,
      EnergyDerivative::wan_phi, EnergyDerivative::was_s, EnergyDerivative::was_phi};
  return all;
}

std::string derivative_name(EnergyDerivative which) {
  switch (which) {
    case EnergyDerivative::erk_n: return "d_n E_erk";
    case EnergyDerivative::erk_s: return "d_s E_erk";
    case EnergyDerivative::dw_s: return "d_s E_dw";
    case EnergyDerivative::ch_phi: return "d_phi E_ch";
    case EnergyDerivative::wan_n: return "d_n E_wan";
    case EnergyDerivative::wan_s: return "d_s E_wan";
    case EnergyDerivative::wan_phi: return "d_phi E_wan";
    case EnergyDerivative::was_s: return "d_s E_was";
    case EnergyDerivative::was_phi: return "d_phi E_was";
  }
  return "?";
}

double fd_relative_error(const P1Space& space, EnergyDerivative which, const FdFields& base,
                         const FdFields& dir, const ModelWeights& w, double h) {
  using D = EnergyDerivative;
  auto energy = [&](const FdFields& f) {
    switch (which) {
      case D::erk_n:
      case D::erk_s:
        return energy_ericksen(space, f.s, f.n, w.kappa);
      case D::dw_s:
        return energy_dw(space, f.s, w.double_well);
      case D::ch_phi:
        return energy_ch_dw(space, f.phi, w.eps) + energy_ch_grad(space, f.phi, w.eps);
      case D::wan_n:
      case D::wan_s:
      case D::wan_phi:
        return energy_wan(space, f.s, f.n, space.gradients(f.phi), w.eps);
      case D::was_s:
      case D::was_phi:
        return energy_was(space, f.s, space.gradients(f.phi), w.eps, w.s_star);
    }
    return 0.0;
  };
  auto shifted = [&](double t) {
    FdFields f = base;
    switch (which) {
      case D::erk_n:
      case D::wan_n:
        f.n += t * dir.n;
        break;
      case D::erk_s:
      case D::dw_s:
      case D::wan_s:
      case D::was_s:
        f.s += t * dir.s;
        break;
      case D::ch_phi:
      case D::wan_phi:
      case D::was_phi:
        f.phi += t * dir.phi;
        break;
    }
    return f;
  };

  const ElementGradients gphi = space.gradients(base.phi);
  double analytic = 0.0;
  switch (which) {
    case D::erk_n:
      analytic = grad_ericksen_n(space, base.s, base.n).cwiseProduct(dir.n).sum();
      break;
    case D::erk_s:
      analytic = grad_ericksen_s(space, base.s, base.n, w.kappa).dot(dir.s);
      break;
    case D::dw_s:
      analytic = grad_dw_s(space, base.s, w.double_well).dot(dir.s);
      break;
    case D::ch_phi:
      analytic = (grad_ch_dw_phi(space, base.phi, w.eps) + grad_ch_grad_phi(space, base.phi, w.eps))
                     .dot(dir.phi);
      break;
    case D::wan_n:
      analytic = grad_wan_n(space, base.s, base.n, gphi, w.eps).cwiseProduct(dir.n).sum();
      break;
    case D::wan_s:
      analytic = grad_wan_s(space, base.s, base.n, gphi, w.eps).dot(dir.s);
      break;
    case D::wan_phi:
      analytic = grad_wan_phi(space, base.s, base.n, base.phi, w.eps).dot(dir.phi);
      break;
    case D::was_s:
      analytic = grad_was_s(space, base.s, gphi, w.eps, w.s_star).dot(dir.s);
      break;
    case D::was_phi:
      analytic = grad_was_phi(space, base.s, base.phi, w.eps, w.s_star).dot(dir.phi);
      break;
  }
  const double fd = (energy(shifted(h)) - energy(shifted(-h))) / (2.0 * h);
  return std::abs(fd - analytic) / std::max(std::abs(analytic), std::numeric_limits<double>::min());
}

CheckOutcome fd_derivative_check(EnergyDerivative which, std::uint64_t seed, int trials, double h,
                                 double tol) {
  const auto space = unit_square_space(4);
  const TriMesh& mesh = space->mesh();
  const int n = space->num_nodes();
  Rng rng(seed + static_cast<std::uint64_t>(which));
  ModelWeights w;
  w.eps = 0.2;

  double worst = 0.0;
  int worst_trial = -1;
  for (int t = 0; t < trials; ++t) {
    FdFields base{rng.vector(n, 0.05, 0.95), rng.unit_field(2, n), rng.vector(n, -1.0, 1.0)};
    FdFields dir{rng.vector(n, -1.0, 1.0), VectorField::Zero(2, n), rng.vector(n, -1.0, 1.0)};
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d tangent(-base.n(1, i), base.n(0, i));
      dir.n.col(i) = rng.uniform(-1.0, 1.0) * tangent;
      if (mesh.is_boundary(i)) {
        dir.s[i] = 0.0;
        dir.n.col(i).setZero();
      }
    }
    const double err = fd_relative_error(*space, which, base, dir, w, h);
    if (!(err <= worst)) {
      worst = err;
      worst_trial = t;
    }
  }
  return outcome("fd_derivative: " + derivative_name(which), worst <= tol, worst, tol, seed,
                 "worst trial " + std::to_string(worst_trial) + " of " + std::to_string(trials));
}

// ---------------------------------------------------------------------------

double eform_reference(const TriMesh& mesh, const ScalarField& s, const ScalarField& z,
                       const VectorField& n, const VectorField& w) {
  const int nn = mesh.num_nodes();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nn, nn);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const NaiveTriangle t = naive_triangle(mesh, e);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const int i = mesh.elements()(a, e);
        const int j = mesh.elements()(b, e);
        k(i, j) -= t.area * (t.grad[a][0] * t.grad[b][0] + t.grad[a][1] * t.grad[b][1]);
      }
    }
  }
  double total = 0.0;
  for (int i = 0; i < nn; ++i) {
    for (int j = 0; j < nn; ++j) {
      if (i == j) continue;
      const double avg = 0.5 * (s[i] * z[i] + s[j] * z[j]);
      const double dx = (n(0, i) - n(0, j)) * (w(0, i) - w(0, j));
      const double dy = (n(1, i) - n(1, j)) * (w(1, i) - w(1, j));
      total += k(i, j) * avg * (dx + dy);
    }
  }
  return total;
}

double cform_reference(const TriMesh& mesh, const VectorField& v, const ScalarField& phi,
                       const VectorField& w, const ScalarField& psi, const ScalarField& s,
                       const ScalarField& z) {
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const NaiveTriangle t = naive_triangle(mesh, e);
    double gp[2] = {0.0, 0.0};
    double gq[2] = {0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
      const int i = mesh.elements()(a, e);
      for (int c = 0; c < 2; ++c) {
        gp[c] += phi[i] * t.grad[a][c];
        gq[c] += psi[i] * t.grad[a][c];
      }
    }
    for (int a = 0; a < 3; ++a) {
      const int i = mesh.elements()(a, e);
      const double vw = v(0, i) * w(0, i) + v(1, i) * w(1, i);
      const double vg = v(0, i) * gp[0] + v(1, i) * gp[1];
      const double wg = w(0, i) * gq[0] + w(1, i) * gq[1];
      const double gg = gp[0] * gq[0] + gp[1] * gq[1];
      total += t.area / 3.0 * s[i] * z[i] * (gg * vw - vg * wg);
    }
  }
  return total;
}

CheckOutcome brute_force_form_check(std::uint64_t seed, int trials, double tol) {
  const auto space = unit_square_space(2);
  const TriMesh& mesh = space->mesh();
  const int n = space->num_nodes();
  Rng rng(seed ^ 0x51u);
  double worst_e = 0.0;
  double worst_c = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ScalarField s = rng.vector(n, -1, 1), z = rng.vector(n, -1, 1);
    const ScalarField phi = rng.vector(n, -1, 1), psi = rng.vector(n, -1, 1);
    const VectorField v = rng.matrix(2, n, -1, 1), w = rng.matrix(2, n, -1, 1);

    const double ref_e = eform_reference(mesh, s, z, v, w);
    const double opt_e = eform(*space, s, z, v, w);
    const double scale_e = eform_reference(mesh, s.cwiseAbs(), z.cwiseAbs(), v, v) +
                           eform_reference(mesh, s.cwiseAbs(), z.cwiseAbs(), w, w);
    worst_e = std::max(worst_e, std::abs(opt_e - ref_e) / std::max(scale_e, 1e-300));

    const double ref_c = cform_reference(mesh, v, phi, w, psi, s, z);
    const double opt_c = cform(*space, v, space->gradients(phi), w, space->gradients(psi), s, z);
    const double scale_c = std::max(std::abs(ref_c), 1e-3);
    worst_c = std::max(worst_c, std::abs(opt_c - ref_c) / scale_c);
  }
  const double worst = std::max(worst_e, worst_c);
  return outcome("brute_force_forms", worst <= tol, worst, tol, seed,
                 "eform " + fmt(worst_e) + ", cform " + fmt(worst_c));
}

CheckOutcome cform_interpolant_check(std::uint64_t seed, int trials, double tol) {
  const auto space = unit_square_space(2);
  const int n = space->num_nodes();
  const SimplexQuadrature rule = simplex_quadrature(2, 4);
  Rng rng(seed ^ 0x1bu);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ScalarField s = rng.vector(n, -1, 1), z = rng.vector(n, -1, 1);
    const ScalarField phi = rng.vector(n, -1, 1), psi = rng.vector(n, -1, 1);
    const VectorField v = rng.matrix(2, n, -1, 1), w = rng.matrix(2, n, -1, 1);
    const ElementGradients gp = space->gradients(phi), gq = space->gradients(psi);

    double interp = 0.0;
    double scale = 0.0;
    for (int e = 0; e < space->num_elements(); ++e) {
      const Eigen::Vector2d a = gp.col(e), b = gq.col(e);
      const Eigen::Matrix2d tensor = a.dot(b) * Eigen::Matrix2d::Identity() - a * b.transpose();
      double q[3];
      for (int k = 0; k < 3; ++k) {
        const int i = space->vertex(k, e);
        q[k] = s[i] * z[i] * v.col(i).dot(tensor * w.col(i));
        scale += space->measure(e) / 3.0 * std::abs(q[k]);
      }
      for (int p = 0; p < rule.size(); ++p) {
        double val = 0.0;
        for (int k = 0; k < 3; ++k) val += rule.barycentric(k, p) * q[k];
        interp += space->measure(e) * rule.weights[static_cast<std::size_t>(p)] * val;
      }
    }
    const double direct = cform(*space, v, gp, w, gq, s, z);
    worst = std::max(worst, std::abs(direct - interp) / std::max(scale, 1e-300));
  }
  return outcome("cform_interpolant_equivalence", worst <= tol, worst, tol, seed);
}

// ---------------------------------------------------------------------------

namespace {

VectorField random_long_field(Rng& rng, int n) {
  VectorField v = rng.unit_field(2, n);
  for (int i = 0; i < n; ++i) v.col(i) *= rng.uniform(1.0, 3.0);
  return v;
}

VectorField normalized(const VectorField& v) {
  VectorField out = v;
  for (Eigen::Index i = 0; i < v.cols(); ++i) out.col(i) /= v.col(i).norm();
  return out;
}

}  // namespace

CheckOutcome projection_lemma_eform(std::uint64_t seed, int trials, double tol) {
  const auto space = unit_square_space(4);
  const int n = space->num_nodes();
  Rng rng(seed ^ 0xe1u);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const ScalarField s = rng.vector(n, -0.5, 1.0);
    const VectorField v = random_long_field(rng, n);
    const VectorField u = normalized(v);
    worst = std::min(worst, eform(*space, s, s, v, v) - eform(*space, s, s, u, u));
  }
  return outcome("projection_lemma_eform", worst >= tol, worst, tol, seed);
}

CheckOutcome projection_lemma_cform(std::uint64_t seed, int trials, double tol) {
  const auto space = unit_square_space(4);
  const int n = space->num_nodes();
  Rng rng(seed ^ 0xc1u);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const ScalarField s = rng.vector(n, -0.5, 1.0);
    const ElementGradients g = space->gradients(rng.vector(n, -1.0, 1.0));
    const VectorField v = random_long_field(rng, n);
    const VectorField u = normalized(v);
    worst = std::min(worst, cform(*space, v, g, v, g, s, s) - cform(*space, u, g, u, g, s, s));
  }
  return outcome("projection_lemma_cform", worst >= tol, worst, tol, seed);
}

CheckOutcome lumped_mass_monotone(std::uint64_t seed, int trials, double tol) {
  const auto space = unit_square_space(4);
  const int n = space->num_nodes();
  const Eigen::VectorXd& m = space->lumped_diagonal();
  Rng rng(seed ^ 0x3au);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const VectorField v = random_long_field(rng, n);
    const VectorField u = normalized(v);
    double long_form = 0.0, unit_form = 0.0;
    for (int i = 0; i < n; ++i) {
      const Eigen::Matrix2d b = rng.matrix(2, 2, -1.0, 1.0);
      const Eigen::Matrix2d h = b * b.transpose();
      long_form += m[i] * v.col(i).dot(h * v.col(i));
      unit_form += m[i] * u.col(i).dot(h * u.col(i));
    }
    worst = std::min(worst, long_form - unit_form);
  }
  return outcome("lumped_mass_monotone", worst >= tol, worst, tol, seed);
}

CheckOutcome convex_split_inequality(std::uint64_t seed, int trials, double tol) {
  const auto space = unit_square_space(4);
  const int n = space->num_nodes();
  const DoubleWell dw = DoubleWell::nematic_default();
  Rng rng(seed ^ 0x5cu);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const ScalarField s0 = rng.vector(n, -0.49, 0.99);
    const ScalarField s1 = rng.vector(n, -0.49, 0.99);
    const double lhs = energy_dw(*space, s1, dw) - energy_dw(*space, s0, dw);
    const double rhs = integrate_fields(*space, {&s1, &s0}, [&](const double* v) {
      return (dw.dfc(v[0]) - dw.dfe(v[1])) * (v[0] - v[1]);
    });
    worst = std::min(worst, rhs - lhs);
  }
  return outcome("convex_split_inequality", worst >= tol, worst, tol, seed);
}

CheckOutcome double_well_stationarity(double tol) {
  const DoubleWell dw = DoubleWell::nematic_default();
  const double slope = std::abs(dw.df(0.75));
  const double at_zero = std::abs(dw.f(0.0));
  const double at_min = std::abs(dw.f(0.75) + 0.5625);
  const double worst = std::max({slope, at_zero, at_min});
  return outcome("double_well_stationarity", worst <= tol, worst, tol, 0,
                 "|f'(0.75)| = " + fmt(slope) + ", |f(0.75) + 0.5625| = " + fmt(at_min));
}

// ---------------------------------------------------------------------------

CheckOutcome energy_law_audit(double e0, const std::vector<StepReport>& reports, double rel_tol) {
  double cumulative = 0.0;
  double worst = 0.0;
  std::string witness;
  auto note = [&](double value, const std::string& what) {
    if (value > worst) {
      worst = value;
      witness = what;
    }
  };
  for (const StepReport& r : reports) {
    const double scale = std::max(1.0, std::abs(r.before.total));
    cumulative += r.dissipation.sum();
    note((r.after.total + cumulative - e0) / std::max(1.0, std::abs(e0)),
         "cumulative inequality at step " + std::to_string(r.step));
    note(std::abs(r.ledger_defect()) / scale, "ledger closure at step " + std::to_string(r.step));
    note(-r.remainder / scale, "negative splitting remainder at step " + std::to_string(r.step));
    const double drop = std::min(r.dissipation.erk_normalization, r.dissipation.wan_normalization);
    note(-drop / scale, "negative normalization drop at step " + std::to_string(r.step));
  }
  return outcome("energy_law_audit", worst <= rel_tol, worst, rel_tol, 0, witness);
}

CheckOutcome energy_law_audit_run(std::uint64_t seed) {
  ScenarioConfig cfg = preset("droplet_corner");
  cfg.mesh.nx = cfg.mesh.ny = 16;
  cfg.scheme.t_final = 0.2;
  const Scenario sc = build_scenario(cfg);
  double e0 = 0.0;
  std::vector<StepReport> reports;
  RunSinks sinks;
  sinks.on_start = [&](const PhaseState&, const EnergyReport& e) { e0 = e.total; };
  sinks.on_step = [&](const PhaseState&, const StepReport& r) { reports.push_back(r); };
  try {
    run(*sc.space, sc.initial, sc.weights, sc.scheme, sc.bc, sinks);
  } catch (const std::exception& e) {
    return outcome("energy_law_audit", false, std::numeric_limits<double>::infinity(), 1e-9, seed,
                   e.what());
  }
  CheckOutcome o = energy_law_audit(e0, reports);
  o.seed = seed;
  o.witness += " (" + std::to_string(reports.size()) + " steps, droplet_corner 16x16)";
  return o;
}

// ---------------------------------------------------------------------------

namespace {

struct SmoothTriple {
  double eps;

  double s(double x, double) const { return 0.5 + 0.2 * x; }
  Eigen::Vector2d grad_s(double, double) const { return {0.2, 0.0}; }
  double theta(double x, double y) const { return 0.5 * std::sin(M_PI * x) * std::sin(M_PI * y); }
  Eigen::Vector2d grad_theta(double x, double y) const {
    return {0.5 * M_PI * std::cos(M_PI * x) * std::sin(M_PI * y),
            0.5 * M_PI * std::sin(M_PI * x) * std::cos(M_PI * y)};
  }
  Eigen::Vector2d n(double x, double y) const { return {std::cos(theta(x, y)), std::sin(theta(x, y))}; }
  double arg(double x, double y) const {
    return (x - 0.5 + 0.1 * std::sin(2.0 * M_PI * y)) / (std::sqrt(2.0) * eps);
  }
  double phi(double x, double y) const { return std::tanh(arg(x, y)); }
  Eigen::Vector2d grad_phi(double x, double y) const {
    const double c = 1.0 / std::cosh(arg(x, y));
    const double scale = c * c / (std::sqrt(2.0) * eps);
    return {scale, scale * 0.2 * M_PI * std::cos(2.0 * M_PI * y)};
  }
};

struct ContinuousEnergy {
  EnergyReport report;
  double tensor_form = 0.0;  // ε/2 ∫ ∇φ·[I + s²(I - n⊗n)]∇φ
  double direct_form = 0.0;  // ε/2 ∫ |∇φ|² + s²(|n|²|∇φ|² - (n·∇φ)²)
};

ContinuousEnergy continuous_energy(const SmoothTriple& tr, const ModelWeights& w, int cells = 128,
                                   int points = 8) {
  std::vector<double> gx, gw;
  gauss_legendre_unit(points, gx, gw);
  const DoubleWell& dw = w.double_well;
  const double hc = 1.0 / cells;
  ContinuousEnergy out;
  EnergyReport& r = out.report;
  for (int ci = 0; ci < cells; ++ci) {
    for (int cj = 0; cj < cells; ++cj) {
      for (int p = 0; p < points; ++p) {
        for (int q = 0; q < points; ++q) {
          const double x = (ci + gx[static_cast<std::size_t>(p)]) * hc;
          const double y = (cj + gx[static_cast<std::size_t>(q)]) * hc;
          const double wt = gw[static_cast<std::size_t>(p)] * gw[static_cast<std::size_t>(q)] * hc * hc;
          const double s = tr.s(x, y);
          const double ph = tr.phi(x, y);
          const Eigen::Vector2d gs = tr.grad_s(x, y), gt = tr.grad_theta(x, y), gp = tr.grad_phi(x, y);
          const Eigen::Vector2d nn = tr.n(x, y);
          const double gp2 = gp.squaredNorm();
          const double aniso = s * s * (nn.squaredNorm() * gp2 - nn.dot(gp) * nn.dot(gp));
          r.e_erk += wt * (w.kappa * gs.squaredNorm() + s * s * gt.squaredNorm());
          r.e_dw += wt * dw.f(s);
          r.e_chdw += wt * (ph * ph - 1.0) * (ph * ph - 1.0) / (4.0 * w.eps);
          r.e_chgd += wt * 0.5 * w.eps * gp2;
          r.e_wan += wt * 0.5 * w.eps * aniso;
          r.e_was += wt * 0.5 * w.eps * gp2 * (s - w.s_star) * (s - w.s_star);
          const Eigen::Matrix2d tensor =
              Eigen::Matrix2d::Identity() + s * s * (Eigen::Matrix2d::Identity() - nn * nn.transpose());
          out.tensor_form += wt * 0.5 * w.eps * gp.dot(tensor * gp);
          out.direct_form += wt * 0.5 * w.eps * (gp2 + aniso);
        }
      }
    }
  }
  r.total = weighted_total(r, w);
  return out;
}

/// ε/2 Σ_T g^T [|T| I + Σ_v |T|/(d+1) s_v² (|n_v|² I - n_v n_v^T)] g
double discrete_tensor_form(const P1Space& space, const ScalarField& s, const VectorField& n,
                            const ScalarField& phi, double eps) {
  const ElementGradients g = space.gradients(phi);
  const int nv = space.dim() + 1;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(space.dim(), space.dim());
  double total = 0.0;
  for (int e = 0; e < space.num_elements(); ++e) {
    Eigen::MatrixXd t = space.measure(e) * id;
    for (int a = 0; a < nv; ++a) {
      const int i = space.vertex(a, e);
      const Eigen::VectorXd ni = n.col(i);
      t += space.measure(e) / nv * s[i] * s[i] * (ni.squaredNorm() * id - ni * ni.transpose());
    }
    total += g.col(e).dot(t * g.col(e));
  }
  return 0.5 * eps * total;
}

}  // namespace

RefinementStudy refinement_study(const std::vector<int>& cells, double eps) {
  const SmoothTriple tr{eps};
  ModelWeights w;
  w.eps = eps;
  const ContinuousEnergy cont = continuous_energy(tr, w);

  RefinementStudy study;
  study.anisotropic_gap =
      std::abs(cont.tensor_form - cont.direct_form) / std::abs(cont.direct_form);
  study.min_order = std::numeric_limits<double>::infinity();
  for (int c : cells) {
    const auto space = unit_square_space(c);
    const TriMesh& mesh = space->mesh();
    const ScalarField s = interpolate(mesh, [&](const Eigen::VectorXd& x) { return tr.s(x[0], x[1]); });
    const ScalarField phi = interpolate(mesh, [&](const Eigen::VectorXd& x) { return tr.phi(x[0], x[1]); });
    const VectorField n = interpolate_vector(mesh, [&](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(tr.n(x[0], x[1]));
    });
    const EnergyReport disc = total_energy(*space, s, n, phi, w);

    RefinementRow row;
    row.n = c;
    row.h = mesh_size(mesh);
    row.discrete = disc.total;
    row.continuous = cont.report.total;
    row.error = std::abs(disc.total - cont.report.total);
    if (!study.rows.empty()) {
      const RefinementRow& prev = study.rows.back();
      row.order = std::log(prev.error / row.error) / std::log(prev.h / row.h);
      study.min_order = std::min(study.min_order, row.order);
    }
    study.rows.push_back(row);

    const double direct = disc.e_chgd + disc.e_wan;
    const double tensor = discrete_tensor_form(*space, s, n, phi, eps);
    study.anisotropic_gap = std::max(study.anisotropic_gap, std::abs(direct - tensor) / std::abs(direct));
  }
  return study;
}

CheckOutcome refinement_energy_consistency(double min_order) {
  const RefinementStudy st = refinement_study();
  std::ostringstream table;
  for (const auto& r : st.rows) {
    table << "h=" << fmt(r.h) << " err=" << fmt(r.error) << " order=" << r.order << "; ";
  }
  return outcome("refinement_energy_consistency", st.min_order >= min_order, st.min_order, min_order,
                 0, table.str());
}

CheckOutcome anisotropic_tension_identity(double tol) {
  const RefinementStudy st = refinement_study();
  return outcome("anisotropic_tension_identity", st.anisotropic_gap <= tol, st.anisotropic_gap, tol, 0);
}

// ---------------------------------------------------------------------------

CheckOutcome weak_acuteness_sweep(int max_cells) {
  double worst = std::numeric_limits<double>::infinity();
  std::string witness;
  bool all = true;
  for (int nx = 1; nx <= max_cells; ++nx) {
    for (int ny = 1; ny <= max_cells; ++ny) {
      const TriMesh mesh = build_structured_mesh(nx, ny);
      const AcutenessReport rep = audit_weak_acuteness(mesh, assemble_stiffness(mesh));
      if (rep.min_offdiag_kij < worst) worst = rep.min_offdiag_kij;
      if (!rep.is_weakly_acute && all) {
        all = false;
        witness = "first failure at nx=" + std::to_string(nx) + ", ny=" + std::to_string(ny);
      }
    }
  }
  return outcome("weak_acuteness_sweep", all, worst, kAcutenessTolerance, 0, witness);
}

TriMesh obtuse_fixture_mesh() {
  Eigen::MatrixXd nodes(2, 5);
  nodes << 0, 1, 0, 1, -2,
           -1, -1, 0, 0, 1;
  Eigen::MatrixXi elements(3, 3);
  elements << 0, 0, 2,
              1, 3, 3,
              3, 2, 4;
  return TriMesh(2, nodes, elements, {0, 1, 2, 3, 4});
}

CheckOutcome obtuse_fixture_check() {
  const TriMesh mesh = obtuse_fixture_mesh();
  const AcutenessReport rep = audit_weak_acuteness(mesh, assemble_stiffness(mesh));
  bool found = false;
  for (const auto& p : rep.violating_pairs) {
    if (std::min(p.i, p.j) == 3 && std::max(p.i, p.j) == 4 && std::abs(p.kij + 1.0) <= 1e-12) found = true;
  }
  const bool passed = !rep.is_weakly_acute && found && rep.violating_pairs.size() == 1;
  return outcome("obtuse_fixture_flagged", passed, rep.min_offdiag_kij, kAcutenessTolerance, 0,
                 "violating pairs: " + std::to_string(rep.violating_pairs.size()));
}

// ---------------------------------------------------------------------------

std::vector<CheckOutcome> run_verification_suite(std::uint64_t seed, std::ostream* progress) {
  std::vector<CheckOutcome> out;
  auto add = [&](CheckOutcome o) {
    if (progress) {
      *progress << (o.passed ? "PASS " : "FAIL ") << o.name << "  measured=" << o.measured
                << "  tol=" << o.tolerance << (o.witness.empty() ? "" : "  [" + o.witness + "]") << '\n';
    }
    out.push_back(std::move(o));
  };
  for (EnergyDerivative d : all_energy_derivatives()) add(fd_derivative_check(d, seed));
  add(brute_force_form_check(seed));
  add(cform_interpolant_check(seed));
  add(projection_lemma_eform(seed));
  add(projection_lemma_cform(seed));
  add(lumped_mass_monotone(seed));
  add(convex_split_inequality(seed));
  add(double_well_stationarity());
  add(anisotropic_tension_identity());
  add(refinement_energy_consistency());
  add(energy_law_audit_run(seed));
  add(weak_acuteness_sweep());
  add(obtuse_fixture_check());
  return out;
}

std::string to_json_line(const CheckOutcome& o) {
  nlohmann::json j;
  j["name"] = o.name;
  j["passed"] = o.passed;
  j["measured"] = std::isfinite(o.measured) ? nlohmann::json(o.measured) : nlohmann::json(nullptr);
  j["tolerance"] = o.tolerance;
  j["seed"] = o.seed;
  if (!o.witness.empty()) j["witness"] = o.witness;
  return j.dump();
}

void write_report(const std::string& path, const std::vector<CheckOutcome>& outcomes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "'");
  for (const auto& o : outcomes) out << to_json_line(o) << '\n';
}

}  // namespace lcdrop
