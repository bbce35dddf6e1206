#include "lcdrop/energy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lcdrop/operators.hpp"

namespace lcdrop {

void ModelWeights::validate() const {
  const double ws[] = {w_erk, w_dw, w_chdw, w_chgd, w_wan, w_was};
  for (double w : ws) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("ModelWeights: weights must be >= 0");
  }
  if (!(kappa > 0.0)) throw std::invalid_argument("ModelWeights: kappa must be > 0");
  if (!(rho > 0.0)) throw std::invalid_argument("ModelWeights: rho must be > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("ModelWeights: eps must be > 0");
  if (!(s_star > -0.5 && s_star < 1.0)) {
    throw std::invalid_argument("ModelWeights: s_star must lie in (-1/2, 1)");
  }
  double_well.check_convex_split();
}

DirectorField DirectorField::from_unit(VectorField values, double tol) {
  for (Eigen::Index i = 0; i < values.cols(); ++i) {
    const double len = values.col(i).norm();
    if (std::abs(len - 1.0) > tol) {
      throw std::invalid_argument("DirectorField: node " + std::to_string(i) +
                                  " is not unit length (|n| = " + std::to_string(len) + ")");
    }
  }
  return DirectorField(std::move(values));
}

DirectorField DirectorField::normalize(const VectorField& raw, double min_norm) {
  VectorField out = raw;
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    const double len = raw.col(i).norm();
    if (!(len >= min_norm)) {
      std::ostringstream msg;
      msg << "degenerate director normalization at node " << i << " (|n| = " << len << ")";
      throw std::domain_error(msg.str());
    }
    out.col(i) /= len;
  }
  return DirectorField(std::move(out));
}

double DirectorField::max_unit_defect() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < values_.cols(); ++i) {
    worst = std::max(worst, std::abs(values_.col(i).norm() - 1.0));
  }
  return worst;
}

double eform(const P1Space& space, const ScalarField& s, const ScalarField& z, const VectorField& n,
             const VectorField& w) {
  space.check_scalar(s, "eform");
  space.check_scalar(z, "eform");
  space.check_vector(n, "eform");
  space.check_vector(w, "eform");
  double total = 0.0;
  for (const Edge& e : space.edges()) {
    const double avg = 0.5 * (s[e.i] * z[e.i] + s[e.j] * z[e.j]);
    // Each unordered pair appears twice in the ordered double sum.
    total += 2.0 * e.kij * avg * (n.col(e.i) - n.col(e.j)).dot(w.col(e.i) - w.col(e.j));
  }
  return total;
}

double cform(const P1Space& space, const VectorField& v, const ElementGradients& gphi,
             const VectorField& w, const ElementGradients& gpsi, const ScalarField& s,
             const ScalarField& z) {
  space.check_vector(v, "cform");
  space.check_vector(w, "cform");
  space.check_gradients(gphi, "cform");
  space.check_gradients(gpsi, "cform");
  space.check_scalar(s, "cform");
  space.check_scalar(z, "cform");
  const int nv = space.dim() + 1;
  double total = 0.0;
  for (int e = 0; e < space.num_elements(); ++e) {
    const auto gp = gphi.col(e);
    const auto gq = gpsi.col(e);
    const double gg = gp.dot(gq);
    double local = 0.0;
    for (int a = 0; a < nv; ++a) {
      const int i = space.vertex(a, e);
      const auto vi = v.col(i);
      const auto wi = w.col(i);
      local += s[i] * z[i] * (gg * vi.dot(wi) - vi.dot(gp) * wi.dot(gq));
    }
    total += space.measure(e) / nv * local;
  }
  return total;
}

double energy_ericksen(const P1Space& space, const ScalarField& s, const VectorField& n,
                       double kappa) {
  space.check_scalar(s, "energy_ericksen");
  return kappa * space.stiffness().quadratic_form(s) + 0.5 * eform(space, s, s, n, n);
}

double energy_dw(const P1Space& space, const ScalarField& s, const DoubleWell& dw,
                 const WarningSink& warn) {
  space.check_scalar(s, "energy_dw");
  if (warn && s.size() > 0) {
    const double lo = s.minCoeff();
    const double hi = s.maxCoeff();
    if (!(lo > -0.5) || !(hi < 1.0)) {
      std::ostringstream msg;
      msg << "orientation outside (-1/2, 1): min " << lo << ", max " << hi;
      warn(msg.str());
    }
  }
  return integrate_nodal(space, s, [&](double v) { return dw.f(v); });
}

double energy_ch_dw(const P1Space& space, const ScalarField& phi, double eps) {
  space.check_scalar(phi, "energy_ch_dw");
  return integrate_nodal(space, phi, [](double p) { return (p * p - 1.0) * (p * p - 1.0); }) /
         (4.0 * eps);
}

double energy_ch_grad(const P1Space& space, const ScalarField& phi, double eps) {
  space.check_scalar(phi, "energy_ch_grad");
  return 0.5 * eps * space.stiffness().quadratic_form(phi);
}

double energy_wan(const P1Space& space, const ScalarField& s, const VectorField& n,
                  const ElementGradients& gphi, double eps) {
  return 0.5 * eps * cform(space, n, gphi, n, gphi, s, s);
}

double energy_was(const P1Space& space, const ScalarField& s, const ElementGradients& gphi,
                  double eps, double s_star) {
  space.check_scalar(s, "energy_was");
  space.check_gradients(gphi, "energy_was");
  const int nv = space.dim() + 1;
  double total = 0.0;
  Eigen::VectorXd local(nv);
  for (int e = 0; e < space.num_elements(); ++e) {
    for (int a = 0; a < nv; ++a) local[a] = s[space.vertex(a, e)] - s_star;
    total += gphi.col(e).squaredNorm() * local.dot(space.local_mass(e) * local);
  }
  return 0.5 * eps * total;
}

double weighted_total(const EnergyReport& r, const ModelWeights& w) {
  return w.w_erk * r.e_erk + w.w_dw * r.e_dw + w.w_chdw * r.e_chdw + w.w_chgd * r.e_chgd +
         w.w_wan * r.e_wan + w.w_was * r.e_was;
}

EnergyReport total_energy(const P1Space& space, const ScalarField& s, const VectorField& n,
                          const ScalarField& phi, const ModelWeights& weights) {
  const ElementGradients gphi = space.gradients(phi);
  EnergyReport r;
  r.e_erk = energy_ericksen(space, s, n, weights.kappa);
  r.e_dw = energy_dw(space, s, weights.double_well);
  r.e_chdw = energy_ch_dw(space, phi, weights.eps);
  r.e_chgd = energy_ch_grad(space, phi, weights.eps);
  r.e_wan = energy_wan(space, s, n, gphi, weights.eps);
  r.e_was = energy_was(space, s, gphi, weights.eps, weights.s_star);
  r.total = weighted_total(r, weights);
  return r;
}

VectorField grad_ericksen_n(const P1Space& space, const ScalarField& s, const VectorField& n) {
  space.check_vector(n, "grad_ericksen_n");
  const SparseMatrix lap = edge_laplacian(space, ericksen_edge_weights(space, s, s));
  return 2.0 * (lap * n.transpose()).transpose();
}

ScalarField grad_ericksen_s(const P1Space& space, const ScalarField& s, const VectorField& n,
                            double kappa) {
  space.check_scalar(s, "grad_ericksen_s");
  return 2.0 * kappa * space.stiffness().apply(s) +
         ericksen_s_diagonal(space, n).cwiseProduct(s);
}

ScalarField grad_dw_s(const P1Space& space, const ScalarField& s, const DoubleWell& dw) {
  space.check_scalar(s, "grad_dw_s");
  return load_nodal(space, s, [&](double v) { return dw.df(v); });
}

ScalarField grad_ch_dw_phi(const P1Space& space, const ScalarField& phi, double eps) {
  space.check_scalar(phi, "grad_ch_dw_phi");
  return load_nodal(space, phi, [](double p) { return p * p * p - p; }) / eps;
}

ScalarField grad_ch_grad_phi(const P1Space& space, const ScalarField& phi, double eps) {
  space.check_scalar(phi, "grad_ch_grad_phi");
  return eps * space.stiffness().apply(phi);
}

VectorField grad_wan_n(const P1Space& space, const ScalarField& s, const VectorField& n,
                       const ElementGradients& gphi, double eps) {
  space.check_scalar(s, "grad_wan_n");
  space.check_vector(n, "grad_wan_n");
  const int d = space.dim();
  const Eigen::MatrixXd tensors = anchoring_node_tensors(space, gphi);
  VectorField g(d, space.num_nodes());
  for (int i = 0; i < space.num_nodes(); ++i) {
    const Eigen::Map<const Eigen::MatrixXd> h(tensors.col(i).data(), d, d);
    g.col(i) = eps * s[i] * s[i] * (h * n.col(i));
  }
  return g;
}

ScalarField grad_wan_s(const P1Space& space, const ScalarField& s, const VectorField& n,
                       const ElementGradients& gphi, double eps) {
  space.check_scalar(s, "grad_wan_s");
  return eps * anchoring_s_diagonal(space, n, gphi).cwiseProduct(s);
}

ScalarField grad_wan_phi(const P1Space& space, const ScalarField& s, const VectorField& n,
                         const ScalarField& phi, double eps) {
  space.check_scalar(phi, "grad_wan_phi");
  return eps * (anchoring_stiffness(space, s, n) * phi);
}

ScalarField grad_was_s(const P1Space& space, const ScalarField& s, const ElementGradients& gphi,
                       double eps, double s_star) {
  space.check_scalar(s, "grad_was_s");
  const ScalarField shifted = s - ScalarField::Constant(s.size(), s_star);
  return eps * (gradient_weighted_mass(space, gphi) * shifted);
}

ScalarField grad_was_phi(const P1Space& space, const ScalarField& s, const ScalarField& phi,
                         double eps, double s_star) {
  space.check_scalar(phi, "grad_was_phi");
  return eps * (profile_weighted_stiffness(space, s, s_star) * phi);
}

}  // namespace lcdrop
