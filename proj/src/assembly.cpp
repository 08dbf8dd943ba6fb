#include "nlshape/assembly.hpp"

#include "nlshape/parallel.hpp"

namespace nlshape {

namespace {

Vec2 nodal_vec(const VectorField& V, int i) { return {V[2 * i], V[2 * i + 1]}; }

}  // namespace

Assembler::Assembler(const Mesh& mesh, const Problem& problem, const Mesh* horizon_ref)
    : mesh_(&mesh), horizon_ref_(horizon_ref), problem_(problem), dofs_(DofMap::from_mesh(mesh)) {
  problem_.kernel.validate();
  // a carried horizon can reach pairs that are farther apart on the deformed mesh
  double reach = problem_.kernel.delta;
  if (horizon_ref) {
    double shift = 0;
    for (int i = 0; i < mesh.num_nodes(); ++i)
      shift = std::max(shift, (mesh.vertices[i] - horizon_ref->vertices[i]).norm());
    reach += 2.0 * shift;
  }
  cand_ = find_pair_candidates(mesh, reach);
}

SparseMatrix Assembler::stiffness_full() const {
  const int n = mesh_->num_nodes();
  const int nb = pair_block_count();
  std::vector<Triplets> trip(nb);
  std::vector<SparseMatrix> part(nb, SparseMatrix(n, n));
  auto flush = [&](int b) {
    SparseMatrix S(n, n);
    S.setFromTriplets(trip[b].begin(), trip[b].end());
    part[b] += S;
    trip[b].clear();
  };
  pairs(nullptr, [&](int b, const PairBlock& p) {
    double loc[PairBlock::kMaxNodes][PairBlock::kMaxNodes] = {};
    for (std::size_t q = 0; q < p.npts; ++q) {
      if (p.rho[q] == 0.0) continue;
      const double gxy = p.cxy * p.rho[q] * p.w[q], gyx = p.cyx * p.rho[q] * p.w[q];
      double a[PairBlock::kMaxNodes], c[PairBlock::kMaxNodes];
      for (int k = 0; k < p.nloc; ++k) {
        a[k] = p.phi_x(q, k) - p.phi_y(q, k);
        c[k] = p.phi_x(q, k) * gxy - p.phi_y(q, k) * gyx;
      }
      for (int i = 0; i < p.nloc; ++i)
        for (int j = 0; j < p.nloc; ++j) loc[i][j] += a[i] * c[j];
    }
    for (int i = 0; i < p.nloc; ++i)
      for (int j = 0; j < p.nloc; ++j)
        if (loc[i][j] != 0.0) trip[b].emplace_back(p.node[i], p.node[j], loc[i][j]);
    if (trip[b].size() > (1u << 22)) flush(b);
  });
  SparseMatrix K(n, n);
  for (int b = 0; b < nb; ++b) {
    flush(b);
    K += part[b];
  }
  return K;
}

SparseMatrix Assembler::stiffness() const { return dofs_.restrict_matrix(stiffness_full()); }

Eigen::VectorXd Assembler::load() const {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(mesh_->num_nodes());
  for_omega_points([&](int t, const Element&, const Bary& b, const Vec2& x, double w) {
    const double f = problem_.forcing.eval(mesh_->region[t], x).value;
    for (int k = 0; k < 3; ++k) F[mesh_->triangles[t][k]] += w * f * b[k];
  });
  return F;
}

Eigen::VectorXd Assembler::tracking_load(const Eigen::VectorXd& u, const DataField& ubar) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh_->num_nodes());
  for_omega_points([&](int t, const Element&, const Bary& b, const Vec2& x, double w) {
    const auto& T = mesh_->triangles[t];
    const double err = b[0] * u[T[0]] + b[1] * u[T[1]] + b[2] * u[T[2]] - ubar.eval(t, b, x).value;
    for (int k = 0; k < 3; ++k) r[T[k]] -= w * err * b[k];
  });
  return r;
}

double Assembler::tracking(const Eigen::VectorXd& u, const DataField& ubar) const {
  double s = 0;
  for_omega_points([&](int t, const Element&, const Bary& b, const Vec2& x, double w) {
    const auto& T = mesh_->triangles[t];
    const double err = b[0] * u[T[0]] + b[1] * u[T[1]] + b[2] * u[T[2]] - ubar.eval(t, b, x).value;
    s += w * err * err;
  });
  return s;
}

ShapeResiduals Assembler::shape_residuals(const VectorField& V, const Eigen::VectorXd& u,
                                          const Eigen::VectorXd& v, const DataField& ubar) const {
  ShapeResiduals r;
  for_omega_points([&](int t, const Element& e, const Bary& b, const Vec2& x, double w) {
    const auto& T = mesh_->triangles[t];
    Vec2 Vx = Vec2::Zero();
    double div = 0, uh = 0, vh = 0;
    for (int k = 0; k < 3; ++k) {
      const Vec2 Vk = nodal_vec(V, T[k]);
      Vx += b[k] * Vk;
      div += e.grad[k].dot(Vk);
      uh += b[k] * u[T[k]];
      vh += b[k] * v[T[k]];
    }
    const FieldValue ub = ubar.eval(t, b, x);
    const FieldValue f = problem_.forcing.eval(mesh_->region[t], x);
    const double err = uh - ub.value;
    r.frakJ += w * (-err * ub.grad.dot(Vx) + 0.5 * err * err * div);
    r.frakF += w * (vh * f.grad.dot(Vx) + f.value * vh * div);
  });
  const int nb = pair_block_count();
  std::vector<double> acc(nb, 0.0);
  const double e = problem_.kernel.exponent();
  pairs(nullptr, [&](int blk, const PairBlock& p) {
    double divx = 0, divy = 0;
    for (int k = 0; k < p.nloc; ++k) {
      const Vec2 Vk = nodal_vec(V, p.node[k]);
      divx += p.gradx[k].dot(Vk);
      divy += p.grady[k].dot(Vk);
    }
    double s = 0;
    for (std::size_t q = 0; q < p.npts; ++q) {
      if (p.rho[q] == 0.0) continue;
      Vec2 dV = Vec2::Zero();
      for (int k = 0; k < p.nloc; ++k) dV += (p.phi_x(q, k) - p.phi_y(q, k)) * nodal_vec(V, p.node[k]);
      const Vec2 d = p.x[q] - p.y[q];
      const double mult = (e != 0.0 ? -e * d.dot(dV) / d.squaredNorm() : 0.0) + divx + divy;
      const double base = (p.at_x(v, q) - p.at_y(v, q)) *
                          (p.at_x(u, q) * p.cxy - p.at_y(u, q) * p.cyx) * p.rho[q];
      s += p.w[q] * base * mult;
    }
    acc[blk] += s;
  });
  for (double a : acc) r.frakA += a;
  return r;
}

ShapeVectors Assembler::shape_vectors(const VectorField& V, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                      const DataField& ubar) const {
  const int n = mesh_->num_nodes();
  ShapeVectors s;
  s.A_u_test = s.A_trial_v = s.F_test = s.dJ_test = Eigen::VectorXd::Zero(n);
  for_omega_points([&](int t, const Element& e, const Bary& b, const Vec2& x, double w) {
    const auto& T = mesh_->triangles[t];
    Vec2 Vx = Vec2::Zero();
    double div = 0, uh = 0;
    for (int k = 0; k < 3; ++k) {
      const Vec2 Vk = nodal_vec(V, T[k]);
      Vx += b[k] * Vk;
      div += e.grad[k].dot(Vk);
      uh += b[k] * u[T[k]];
    }
    const FieldValue ub = ubar.eval(t, b, x);
    const FieldValue f = problem_.forcing.eval(mesh_->region[t], x);
    const double err = uh - ub.value;
    for (int k = 0; k < 3; ++k) {
      s.F_test[T[k]] += w * b[k] * (f.grad.dot(Vx) + f.value * div);
      s.dJ_test[T[k]] += w * b[k] * (-ub.grad.dot(Vx) + err * div);
    }
  });
  const int nb = pair_block_count();
  std::vector<Eigen::VectorXd> au(nb, Eigen::VectorXd::Zero(n)), av(nb, Eigen::VectorXd::Zero(n));
  const double e = problem_.kernel.exponent();
  pairs(nullptr, [&](int blk, const PairBlock& p) {
    double divx = 0, divy = 0;
    for (int k = 0; k < p.nloc; ++k) {
      const Vec2 Vk = nodal_vec(V, p.node[k]);
      divx += p.gradx[k].dot(Vk);
      divy += p.grady[k].dot(Vk);
    }
    double lu[PairBlock::kMaxNodes] = {}, lv[PairBlock::kMaxNodes] = {};
    for (std::size_t q = 0; q < p.npts; ++q) {
      if (p.rho[q] == 0.0) continue;
      Vec2 dV = Vec2::Zero();
      for (int k = 0; k < p.nloc; ++k) dV += (p.phi_x(q, k) - p.phi_y(q, k)) * nodal_vec(V, p.node[k]);
      const Vec2 d = p.x[q] - p.y[q];
      const double mult =
          p.w[q] * p.rho[q] * ((e != 0.0 ? -e * d.dot(dV) / d.squaredNorm() : 0.0) + divx + divy);
      const double ucomb = p.at_x(u, q) * p.cxy - p.at_y(u, q) * p.cyx;
      const double vdiff = p.at_x(v, q) - p.at_y(v, q);
      for (int k = 0; k < p.nloc; ++k) {
        lu[k] += mult * (p.phi_x(q, k) - p.phi_y(q, k)) * ucomb;
        lv[k] += mult * vdiff * (p.phi_x(q, k) * p.cxy - p.phi_y(q, k) * p.cyx);
      }
    }
    for (int k = 0; k < p.nloc; ++k) {
      au[blk][p.node[k]] += lu[k];
      av[blk][p.node[k]] += lv[k];
    }
  });
  for (int b = 0; b < nb; ++b) {
    s.A_u_test += au[b];
    s.A_trial_v += av[b];
  }
  return s;
}

Eigen::VectorXd Assembler::gradient_forms(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                          const DataField& ubar) const {
  const int n = mesh_->num_nodes();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * n);
  for_omega_points([&](int t, const Element& e, const Bary& b, const Vec2& x, double w) {
    const auto& T = mesh_->triangles[t];
    const double uh = b[0] * u[T[0]] + b[1] * u[T[1]] + b[2] * u[T[2]];
    const double vh = b[0] * v[T[0]] + b[1] * v[T[1]] + b[2] * v[T[2]];
    const FieldValue ub = ubar.eval(t, b, x);
    const FieldValue f = problem_.forcing.eval(mesh_->region[t], x);
    const double err = uh - ub.value;
    for (int k = 0; k < 3; ++k)
      for (int c = 0; c < 2; ++c) {
        const double J = -err * ub.grad[c] * b[k] + 0.5 * err * err * e.grad[k][c];
        const double F = vh * f.grad[c] * b[k] + f.value * vh * e.grad[k][c];
        g[2 * T[k] + c] += w * (J - F);
      }
  });
  const int nb = pair_block_count();
  std::vector<Eigen::VectorXd> acc(nb, Eigen::VectorXd::Zero(2 * n));
  const double ex = problem_.kernel.exponent();
  pairs(nullptr, [&](int blk, const PairBlock& p) {
    double loc[PairBlock::kMaxNodes][2] = {};
    for (std::size_t q = 0; q < p.npts; ++q) {
      if (p.rho[q] == 0.0) continue;
      const double base = p.w[q] * p.rho[q] * (p.at_x(v, q) - p.at_y(v, q)) *
                          (p.at_x(u, q) * p.cxy - p.at_y(u, q) * p.cyx);
      if (base == 0.0) continue;
      const Vec2 d = p.x[q] - p.y[q];
      const Vec2 beta = ex != 0.0 ? Vec2(-ex * d / d.squaredNorm()) : Vec2::Zero();
      for (int k = 0; k < p.nloc; ++k) {
        const double dphi = p.phi_x(q, k) - p.phi_y(q, k);
        for (int c = 0; c < 2; ++c) loc[k][c] += base * (beta[c] * dphi + p.gradx[k][c] + p.grady[k][c]);
      }
    }
    for (int k = 0; k < p.nloc; ++k)
      for (int c = 0; c < 2; ++c) acc[blk][2 * p.node[k] + c] += loc[k][c];
  });
  for (int b = 0; b < nb; ++b) g += acc[b];
  return g;
}

}  // namespace nlshape
