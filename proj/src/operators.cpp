#include "lcdrop/operators.hpp"

#include <stdexcept>

namespace lcdrop {

namespace {

using Triplet = Eigen::Triplet<double>;

#ifdef LCDROP_MUTATE_IMPLICIT_EXPANSIVE
constexpr bool kImplicitExpansive = true;
#else
constexpr bool kImplicitExpansive = false;
#endif

void append_block(std::vector<Triplet>& trips, const SparseMatrix& block, Eigen::Index row0,
                  Eigen::Index col0, double scale = 1.0) {
  for (Eigen::Index col = 0; col < block.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(block, col); it; ++it) {
      trips.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
    }
  }
}

SparseMatrix diagonal_matrix(const Eigen::VectorXd& d) {
  SparseMatrix m(d.size(), d.size());
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) trips.emplace_back(i, i, d[i]);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

/// Assembles Σ_T scale_T * G_T^T B_T G_T for per-element dim x dim tensors B_T.
template <class TensorFn>
SparseMatrix gradient_form(const P1Space& space, TensorFn&& tensor) {
  const int nv = space.dim() + 1;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(space.num_elements() * nv * nv));
  for (int e = 0; e < space.num_elements(); ++e) {
    const Eigen::MatrixXd& g = space.basis_gradients(e);
    const Eigen::MatrixXd local = g.transpose() * tensor(e) * g;
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) trips.emplace_back(space.vertex(a, e), space.vertex(b, e), local(a, b));
    }
  }
  SparseMatrix out(space.num_nodes(), space.num_nodes());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

Eigen::VectorXd ericksen_edge_weights(const P1Space& space, const ScalarField& s,
                                      const ScalarField& z) {
  space.check_scalar(s, "ericksen_edge_weights");
  space.check_scalar(z, "ericksen_edge_weights");
  const auto& edges = space.edges();
  Eigen::VectorXd w(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    w[static_cast<Eigen::Index>(k)] = e.kij * 0.5 * (s[e.i] * z[e.i] + s[e.j] * z[e.j]);
  }
  return w;
}

SparseMatrix edge_laplacian(const P1Space& space, const Eigen::VectorXd& edge_weights) {
  const auto& edges = space.edges();
  if (edge_weights.size() != static_cast<Eigen::Index>(edges.size())) {
    throw std::invalid_argument("edge_laplacian: one weight per edge expected");
  }
  std::vector<Triplet> trips;
  trips.reserve(4 * edges.size() + static_cast<std::size_t>(space.num_nodes()));
  for (int i = 0; i < space.num_nodes(); ++i) trips.emplace_back(i, i, 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    const double w = edge_weights[static_cast<Eigen::Index>(k)];
    trips.emplace_back(e.i, e.i, w);
    trips.emplace_back(e.j, e.j, w);
    trips.emplace_back(e.i, e.j, -w);
    trips.emplace_back(e.j, e.i, -w);
  }
  SparseMatrix out(space.num_nodes(), space.num_nodes());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Eigen::VectorXd ericksen_s_diagonal(const P1Space& space, const VectorField& n) {
  space.check_vector(n, "ericksen_s_diagonal");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(space.num_nodes());
  for (const Edge& e : space.edges()) {
    const double v = e.kij * (n.col(e.i) - n.col(e.j)).squaredNorm();
    d[e.i] += v;
    d[e.j] += v;
  }
  return d;
}

Eigen::MatrixXd anchoring_node_tensors(const P1Space& space, const ElementGradients& gphi) {
  space.check_gradients(gphi, "anchoring_node_tensors");
  const int d = space.dim();
  const int nv = d + 1;
  Eigen::MatrixXd tensors = Eigen::MatrixXd::Zero(d * d, space.num_nodes());
  for (int e = 0; e < space.num_elements(); ++e) {
    const Eigen::VectorXd g = gphi.col(e);
    Eigen::MatrixXd a = g.squaredNorm() * Eigen::MatrixXd::Identity(d, d) - g * g.transpose();
    a *= space.measure(e) / nv;
    const Eigen::Map<const Eigen::VectorXd> flat(a.data(), d * d);
    for (int k = 0; k < nv; ++k) tensors.col(space.vertex(k, e)) += flat;
  }
  return tensors;
}

Eigen::VectorXd anchoring_s_diagonal(const P1Space& space, const VectorField& n,
                                     const ElementGradients& gphi) {
  space.check_vector(n, "anchoring_s_diagonal");
  const int d = space.dim();
  const Eigen::MatrixXd tensors = anchoring_node_tensors(space, gphi);
  Eigen::VectorXd h(space.num_nodes());
  for (int i = 0; i < space.num_nodes(); ++i) {
    const Eigen::Map<const Eigen::MatrixXd> t(tensors.col(i).data(), d, d);
    h[i] = n.col(i).dot(t * n.col(i));
  }
  return h;
}

SparseMatrix anchoring_stiffness(const P1Space& space, const ScalarField& s, const VectorField& n) {
  space.check_scalar(s, "anchoring_stiffness");
  space.check_vector(n, "anchoring_stiffness");
  const int d = space.dim();
  const int nv = d + 1;
  return gradient_form(space, [&](int e) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
    for (int a = 0; a < nv; ++a) {
      const int i = space.vertex(a, e);
      const Eigen::VectorXd ni = n.col(i);
      b += s[i] * s[i] * (ni.squaredNorm() * Eigen::MatrixXd::Identity(d, d) - ni * ni.transpose());
    }
    return Eigen::MatrixXd(b * (space.measure(e) / nv));
  });
}

SparseMatrix gradient_weighted_mass(const P1Space& space, const ElementGradients& gphi) {
  space.check_gradients(gphi, "gradient_weighted_mass");
  const int nv = space.dim() + 1;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(space.num_elements() * nv * nv));
  for (int e = 0; e < space.num_elements(); ++e) {
    const Eigen::MatrixXd local = gphi.col(e).squaredNorm() * space.local_mass(e);
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) trips.emplace_back(space.vertex(a, e), space.vertex(b, e), local(a, b));
    }
  }
  SparseMatrix out(space.num_nodes(), space.num_nodes());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SparseMatrix profile_weighted_stiffness(const P1Space& space, const ScalarField& s, double s_star) {
  space.check_scalar(s, "profile_weighted_stiffness");
  const int d = space.dim();
  const int nv = d + 1;
  return gradient_form(space, [&](int e) {
    Eigen::VectorXd local(nv);
    for (int a = 0; a < nv; ++a) local[a] = s[space.vertex(a, e)] - s_star;
    const double weight = local.dot(space.local_mass(e) * local);
    return Eigen::MatrixXd(weight * Eigen::MatrixXd::Identity(d, d));
  });
}

const SparseMatrix& time_mass(const P1Space& space, bool lumped) {
  return lumped ? space.lumped_mass().matrix() : space.mass().matrix();
}

VectorField TangentFrames::expand(const Eigen::VectorXd& coeffs, int num_nodes) const {
  if (coeffs.size() != num_unknowns()) {
    throw std::invalid_argument("TangentFrames::expand: coefficient count mismatch");
  }
  VectorField out = VectorField::Zero(dim, num_nodes);
  const int m = frame_size();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    for (int c = 0; c < m; ++c) {
      const Eigen::Index u = static_cast<Eigen::Index>(k) * m + c;
      out.col(nodes[k]) += coeffs[u] * tangents.col(u);
    }
  }
  return out;
}

DirectorSystem residual_director(const P1Space& space, const ScalarField& s_prev,
                                 const VectorField& n_prev, const ElementGradients& gphi_prev,
                                 const ModelWeights& weights, double tau,
                                 const TangentFrames& frames, bool lumped_time_mass) {
  space.check_scalar(s_prev, "residual_director");
  space.check_vector(n_prev, "residual_director");
  if (frames.dim != space.dim()) throw std::invalid_argument("residual_director: frame dimension");
  const int d = space.dim();
  const int m = frames.frame_size();
  const int nn = space.num_nodes();

  const SparseMatrix lap = edge_laplacian(space, ericksen_edge_weights(space, s_prev, s_prev));
  const SparseMatrix nodal =
      weights.rho * time_mass(space, lumped_time_mass) + (2.0 * tau * weights.w_erk) * lap;
  const Eigen::MatrixXd tensors = anchoring_node_tensors(space, gphi_prev);
  const double anchor = weights.w_wan * weights.eps;

  std::vector<int> slot(static_cast<std::size_t>(nn), -1);
  for (std::size_t k = 0; k < frames.nodes.size(); ++k) slot[static_cast<std::size_t>(frames.nodes[k])] = static_cast<int>(k);

  std::vector<Triplet> trips;
  for (Eigen::Index col = 0; col < nodal.outerSize(); ++col) {
    const int kj = slot[static_cast<std::size_t>(col)];
    if (kj < 0) continue;
    for (SparseMatrix::InnerIterator it(nodal, col); it; ++it) {
      const int ki = slot[static_cast<std::size_t>(it.row())];
      if (ki < 0) continue;
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          const double tt = frames.tangents.col(ki * m + a).dot(frames.tangents.col(kj * m + b));
          trips.emplace_back(ki * m + a, kj * m + b, it.value() * tt);
        }
      }
    }
  }

  // Elastic force 2 (L n)_i and lumped anchoring force.
  const Eigen::MatrixXd elastic = 2.0 * weights.w_erk * (lap * n_prev.transpose()).transpose();
  DirectorSystem sys;
  sys.rhs.resize(frames.num_unknowns());
  for (std::size_t k = 0; k < frames.nodes.size(); ++k) {
    const int i = frames.nodes[k];
    const Eigen::Map<const Eigen::MatrixXd> h(tensors.col(i).data(), d, d);
    const Eigen::MatrixXd hs = anchor * s_prev[i] * s_prev[i] * h;
    const Eigen::VectorXd force = elastic.col(i) + hs * n_prev.col(i);
    for (int a = 0; a < m; ++a) {
      const Eigen::Index u = static_cast<Eigen::Index>(k) * m + a;
      const auto ta = frames.tangents.col(u);
      sys.rhs[u] = -ta.dot(force);
      for (int b = 0; b < m; ++b) {
        const auto tb = frames.tangents.col(static_cast<Eigen::Index>(k) * m + b);
        trips.emplace_back(u, static_cast<Eigen::Index>(k) * m + b, tau * ta.dot(hs * tb));
      }
    }
  }
  sys.matrix.resize(frames.num_unknowns(), frames.num_unknowns());
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

OrientationEquation::OrientationEquation(const P1Space& space, const ScalarField& s_prev,
                                         const VectorField& n_new,
                                         const ElementGradients& gphi_prev,
                                         const ModelWeights& weights, double tau,
                                         bool lumped_time_mass)
    : space_(space), weights_(weights) {
  space.check_scalar(s_prev, "OrientationEquation");
  space.check_vector(n_new, "OrientationEquation");
  const SparseMatrix& mt = time_mass(space, lumped_time_mass);
  const Eigen::VectorXd h = anchoring_s_diagonal(space, n_new, gphi_prev);
  const SparseMatrix w = gradient_weighted_mass(space, gphi_prev);
  const double half_anchor = 0.5 * weights.w_wan * weights.eps;

  linear_part_ = mt / tau +
                 weights.w_erk * (2.0 * weights.kappa * space.stiffness().matrix() +
                                  diagonal_matrix(ericksen_s_diagonal(space, n_new))) +
                 (weights.w_was * weights.eps) * w + half_anchor * diagonal_matrix(h);

  rhs_ = mt * s_prev / tau +
         (weights.w_was * weights.eps * weights.s_star) * (w * Eigen::VectorXd::Ones(s_prev.size())) -
         half_anchor * h.cwiseProduct(s_prev);
  if (!kImplicitExpansive) {
    const DoubleWell& dw = weights.double_well;
    rhs_ += weights.w_dw * load_nodal(space, s_prev, [&](double v) { return dw.dfe(v); });
  }
}

Eigen::VectorXd OrientationEquation::residual(const ScalarField& s) const {
  const DoubleWell& dw = weights_.double_well;
  Eigen::VectorXd r = linear_part_ * s - rhs_ +
                      weights_.w_dw * load_nodal(space_, s, [&](double v) { return dw.dfc(v); });
  if (kImplicitExpansive) {
    r -= weights_.w_dw * load_nodal(space_, s, [&](double v) { return dw.dfe(v); });
  }
  return r;
}

SparseMatrix OrientationEquation::jacobian(const ScalarField& s) const {
  const DoubleWell& dw = weights_.double_well;
  SparseMatrix j = linear_part_ +
                   weights_.w_dw * weighted_mass_nodal(space_, s, [&](double v) { return dw.d2fc(v); });
  if (kImplicitExpansive) {
    j -= weights_.w_dw * weighted_mass_nodal(space_, s, [&](double v) { return dw.d2fe(v); });
  }
  return j;
}

bool OrientationEquation::is_linear() const {
  return !kImplicitExpansive && weights_.double_well.implicit_part_is_linear();
}

CahnHilliardEquation::CahnHilliardEquation(const P1Space& space, const ScalarField& phi_prev,
                                           const ScalarField& s_new, const VectorField& n_new,
                                           const ModelWeights& weights, double tau,
                                           bool lumped_time_mass)
    : space_(space),
      weights_(weights),
      tau_(tau),
      time_mass_(time_mass(space, lumped_time_mass)),
      phi_prev_(phi_prev) {
  space.check_scalar(phi_prev, "CahnHilliardEquation");
  explicit_load_ = space.mass().matrix() * phi_prev;
  const double eps = weights.eps;
  phi_operator_ = (weights.w_chgd * eps) * space.stiffness().matrix() +
                  (weights.w_wan * eps) * anchoring_stiffness(space, s_new, n_new) +
                  (weights.w_was * eps) * profile_weighted_stiffness(space, s_new, weights.s_star);
}

Eigen::VectorXd CahnHilliardEquation::residual(const Eigen::VectorXd& x) const {
  const Eigen::Index n = num_nodes();
  if (x.size() != 2 * n) throw std::invalid_argument("CahnHilliardEquation: state size");
  const Eigen::VectorXd phi = x.head(n);
  const Eigen::VectorXd mu = x.tail(n);
  const double eps = weights_.eps;
  Eigen::VectorXd r(2 * n);
  r.head(n) = time_mass_ * (phi - phi_prev_) / tau_ + eps * (space_.stiffness().matrix() * mu);
  r.tail(n) = (weights_.w_chdw / eps) *
                  (load_nodal(space_, phi, [](double p) { return p * p * p; }) - explicit_load_) +
              phi_operator_ * phi - time_mass_ * mu;
  return r;
}

SparseMatrix CahnHilliardEquation::jacobian(const Eigen::VectorXd& x) const {
  const Eigen::Index n = num_nodes();
  const Eigen::VectorXd phi = x.head(n);
  const double eps = weights_.eps;
  const SparseMatrix cubic = weighted_mass_nodal(space_, phi, [](double p) { return 3.0 * p * p; });
  const SparseMatrix lower_left = (weights_.w_chdw / eps) * cubic + phi_operator_;

  std::vector<Triplet> trips;
  append_block(trips, time_mass_, 0, 0, 1.0 / tau_);
  append_block(trips, space_.stiffness().matrix(), 0, n, eps);
  append_block(trips, lower_left, n, 0);
  append_block(trips, time_mass_, n, n, -1.0);
  SparseMatrix j(2 * n, 2 * n);
  j.setFromTriplets(trips.begin(), trips.end());
  return j;
}

}  // namespace lcdrop
