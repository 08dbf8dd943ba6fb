#include <unordered_map>

#include "nlshape/assembly.hpp"

namespace nlshape {

namespace {

Vec2 nodal_vec(const VectorField& V, int i) { return {V[2 * i], V[2 * i + 1]}; }

// Elementwise Jacobian of a P1 vector field: sum_k V_k grad_k^T.
template <class Grads, class Nodes>
Mat2 jacobian(const VectorField& V, const Grads& grads, const Nodes& nodes, int n) {
  Mat2 D = Mat2::Zero();
  for (int k = 0; k < n; ++k) D += nodal_vec(V, nodes[k]) * grads[k].transpose();
  return D;
}

}  // namespace

SecondOrderScalars Assembler::second_order(const VectorField& V, const VectorField& W, const Eigen::VectorXd& u,
                                           const Eigen::VectorXd& v, const Eigen::VectorXd& psi,
                                           const Eigen::VectorXd& phi, const DataField& ubar) const {
  SecondOrderScalars r;
  for_omega_points([&](int t, const Element& e, const Bary& b, const Vec2& x, double w) {
    const auto& T = mesh_->triangles[t];
    const Mat2 DV = jacobian(V, e.grad, T, 3), DW = jacobian(W, e.grad, T, 3);
    Vec2 Vx = Vec2::Zero(), Wx = Vec2::Zero();
    double uh = 0, vh = 0, ph = 0, fh = 0;
    for (int k = 0; k < 3; ++k) {
      Vx += b[k] * nodal_vec(V, T[k]);
      Wx += b[k] * nodal_vec(W, T[k]);
      uh += b[k] * u[T[k]];
      vh += b[k] * v[T[k]];
      ph += b[k] * psi[T[k]];
      fh += b[k] * phi[T[k]];
    }
    const double divV = DV.trace(), divW = DW.trace(), tr = (DV * DW).trace();
    const FieldValue ub = ubar.eval(t, b, x);
    const FieldValue f = problem_.forcing.eval(mesh_->region[t], x);
    const double err = uh - ub.value;
    const double gV = ub.grad.dot(Vx), gW = ub.grad.dot(Wx);
    const double jh = gV * gW - err * Vx.dot(ub.hess * Wx) - err * gV * divW - err * gW * divV +
                      0.5 * err * err * (divV * divW - tr);
    const double fpp = vh * (Vx.dot(f.hess * Wx) + f.grad.dot(Vx) * divW + f.grad.dot(Wx) * divV +
                             f.value * (divV * divW - tr));
    const double fW_psi = ph * f.grad.dot(Wx) + f.value * ph * divW;
    const double dJ_W_phi = -fh * gW + err * fh * divW;
    r.jpp += w * (jh - fpp - fW_psi + dJ_W_phi);
    const Vec2 Z = DV * Wx;
    r.dvw += w * (-err * ub.grad.dot(Z) + 0.5 * err * err * tr - (vh * f.grad.dot(Z) + f.value * vh * tr));
  });

  const int nb = pair_block_count();
  std::vector<double> accj(nb, 0.0), accd(nb, 0.0);
  const double e = problem_.kernel.exponent();
  const double c1 = -e, c2 = 2.0 * e + e * e;
  pairs(nullptr, [&](int blk, const PairBlock& p) {
    const Mat2 DVx = jacobian(V, p.gradx, p.node, p.nloc), DVy = jacobian(V, p.grady, p.node, p.nloc);
    const Mat2 DWx = jacobian(W, p.gradx, p.node, p.nloc), DWy = jacobian(W, p.grady, p.node, p.nloc);
    const double dV = DVx.trace() + DVy.trace(), dW = DWx.trace() + DWy.trace();
    const double trs = (DVx * DWx).trace() + (DVy * DWy).trace();
    double sj = 0, sd = 0;
    for (std::size_t q = 0; q < p.npts; ++q) {
      if (p.rho[q] == 0.0) continue;
      Vec2 Vx = Vec2::Zero(), Vy = Vec2::Zero(), Wx = Vec2::Zero(), Wy = Vec2::Zero();
      for (int k = 0; k < p.nloc; ++k) {
        Vx += p.phi_x(q, k) * nodal_vec(V, p.node[k]);
        Vy += p.phi_y(q, k) * nodal_vec(V, p.node[k]);
        Wx += p.phi_x(q, k) * nodal_vec(W, p.node[k]);
        Wy += p.phi_y(q, k) * nodal_vec(W, p.node[k]);
      }
      const Vec2 d = p.x[q] - p.y[q];
      const double r2 = d.squaredNorm();
      const Vec2 DV_ = Vx - Vy, DW_ = Wx - Wy;
      const Vec2 dZ = DVx * Wx - DVy * Wy;
      double bV = 0, bW = 0, bZ = 0, h = 0;
      if (e != 0.0) {
        bV = -e * d.dot(DV_) / r2;
        bW = -e * d.dot(DW_) / r2;
        bZ = -e * d.dot(dZ) / r2;
        h = c1 * DV_.dot(DW_) / r2 + c2 * d.dot(DV_) * d.dot(DW_) / (r2 * r2);
      }
      const double kVW = h + bV * dW + bW * dV + dV * dW - trs;
      const double sW = bW + dW;
      const double uc = p.at_x(u, q) * p.cxy - p.at_y(u, q) * p.cyx;
      const double vd = p.at_x(v, q) - p.at_y(v, q);
      const double base_uv = vd * uc;
      const double base_upsi = (p.at_x(psi, q) - p.at_y(psi, q)) * uc;
      const double base_phiv = vd * (p.at_x(phi, q) * p.cxy - p.at_y(phi, q) * p.cyx);
      const double wr = p.w[q] * p.rho[q];
      sj += wr * (base_uv * kVW + (base_upsi + base_phiv) * sW);
      sd += wr * base_uv * (bZ + trs);
    }
    accj[blk] += sj;
    accd[blk] += sd;
  });
  for (int b = 0; b < nb; ++b) {
    r.jpp += accj[b];
    r.dvw += accd[b];
  }
  return r;
}

HessianBlocks Assembler::hessian_blocks(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const DataField& ubar,
                                        const std::vector<int>& interface_nodes) const {
  const int nf = dofs_.num_free();
  const int m = 2 * static_cast<int>(interface_nodes.size());
  std::vector<int> iface(mesh_->num_nodes(), -1);
  for (std::size_t a = 0; a < interface_nodes.size(); ++a) {
    if (dofs_.free_index[interface_nodes[a]] < 0)
      throw InputError("interface node " + std::to_string(interface_nodes[a]) + " is constrained");
    iface[interface_nodes[a]] = static_cast<int>(a);
  }
  std::vector<char> touches(mesh_->num_triangles(), 0);
  for (int t = 0; t < mesh_->num_triangles(); ++t)
    for (int k = 0; k < 3; ++k)
      if (iface[mesh_->triangles[t][k]] >= 0) touches[t] = 1;

  HessianBlocks H;
  H.B = Eigen::MatrixXd::Zero(m, m);
  H.Q = Eigen::MatrixXd::Zero(nf, m);
  H.P = Eigen::MatrixXd::Zero(nf, m);

  for_omega_points([&](int t, const Element& e, const Bary& b, const Vec2& x, double w) {
    if (!touches[t]) return;
    const auto& T = mesh_->triangles[t];
    const double uh = b[0] * u[T[0]] + b[1] * u[T[1]] + b[2] * u[T[2]];
    const double vh = b[0] * v[T[0]] + b[1] * v[T[1]] + b[2] * v[T[2]];
    const FieldValue ub = ubar.eval(t, b, x);
    const FieldValue f = problem_.forcing.eval(mesh_->region[t], x);
    const double err = uh - ub.value;
    for (int k = 0; k < 3; ++k) {
      const int a = iface[T[k]];
      if (a < 0) continue;
      for (int c = 0; c < 2; ++c) {
        const int j = 2 * a + c;
        const double gk = e.grad[k][c];
        for (int l = 0; l < 3; ++l) {
          const int fl = dofs_.free_index[T[l]];
          if (fl < 0) continue;
          H.Q(fl, j) -= w * b[l] * (f.grad[c] * b[k] + f.value * gk);
          H.P(fl, j) += w * b[l] * (-ub.grad[c] * b[k] + err * gk);
        }
        for (int k2 = 0; k2 < 3; ++k2) {
          const int a2 = iface[T[k2]];
          if (a2 < 0) continue;
          for (int c2 = 0; c2 < 2; ++c2) {
            const double gk2 = e.grad[k2][c2];
            const double tr = e.grad[k][c2] * e.grad[k2][c];
            const double divdiv = gk * gk2 - tr;
            const double jh = ub.grad[c] * b[k] * ub.grad[c2] * b[k2] - err * ub.hess(c, c2) * b[k] * b[k2] -
                              err * ub.grad[c] * b[k] * gk2 - err * ub.grad[c2] * b[k2] * gk +
                              0.5 * err * err * divdiv;
            const double fpp = vh * (f.hess(c, c2) * b[k] * b[k2] + f.grad[c] * b[k] * gk2 +
                                     f.grad[c2] * b[k2] * gk + f.value * divdiv);
            H.B(j, 2 * a2 + c2) += w * (jh - fpp);
          }
        }
      }
    }
  });

  const int nb = pair_block_count();
  std::vector<HessianBlocks> part(nb);
  for (auto& pb : part) {
    pb.B = Eigen::MatrixXd::Zero(m, m);
    pb.Q = Eigen::MatrixXd::Zero(nf, m);
    pb.P = Eigen::MatrixXd::Zero(nf, m);
  }
  const double e = problem_.kernel.exponent();
  const double c1 = -e, c2 = 2.0 * e + e * e;
  constexpr int N = PairBlock::kMaxNodes;
  pairs(
      [&](int T, int Tp) { return touches[T] || touches[Tp]; },
      [&](int blk, const PairBlock& p) {
        int ia[N], fl[N], nI = 0;
        int Ik[N];  // local indices of interface nodes
        for (int k = 0; k < p.nloc; ++k) {
          ia[k] = iface[p.node[k]];
          fl[k] = dofs_.free_index[p.node[k]];
          if (ia[k] >= 0) Ik[nI++] = k;
        }
        if (nI == 0) return;
        double Ql[N][2 * N] = {}, Pl[N][2 * N] = {}, Bl[2 * N][2 * N] = {};
        for (std::size_t q = 0; q < p.npts; ++q) {
          if (p.rho[q] == 0.0) continue;
          const double wr = p.w[q] * p.rho[q];
          const Vec2 d = p.x[q] - p.y[q];
          const double r2 = d.squaredNorm();
          const Vec2 beta = e != 0.0 ? Vec2(-e * d / r2) : Vec2::Zero();
          const double uc = p.at_x(u, q) * p.cxy - p.at_y(u, q) * p.cyx;
          const double vd = p.at_x(v, q) - p.at_y(v, q);
          const double base = wr * vd * uc;
          double dphi[N], svals[2 * N], dv[2 * N];
          for (int k = 0; k < p.nloc; ++k) dphi[k] = p.phi_x(q, k) - p.phi_y(q, k);
          for (int s = 0; s < nI; ++s) {
            const int k = Ik[s];
            for (int c = 0; c < 2; ++c) {
              dv[2 * s + c] = p.gradx[k][c] + p.grady[k][c];
              svals[2 * s + c] = beta[c] * dphi[k] + dv[2 * s + c];
            }
          }
          for (int l = 0; l < p.nloc; ++l) {
            if (fl[l] < 0) continue;
            const double qa = wr * dphi[l] * uc;
            const double pa = wr * vd * (p.phi_x(q, l) * p.cxy - p.phi_y(q, l) * p.cyx);
            for (int s = 0; s < 2 * nI; ++s) {
              Ql[l][s] += qa * svals[s];
              Pl[l][s] += pa * svals[s];
            }
          }
          if (base == 0.0) continue;
          for (int s = 0; s < nI; ++s) {
            const int k = Ik[s];
            for (int c = 0; c < 2; ++c) {
              const int J1 = 2 * s + c;
              const double bV = beta[c] * dphi[k];
              for (int s2 = 0; s2 < nI; ++s2) {
                const int k2 = Ik[s2];
                for (int cc = 0; cc < 2; ++cc) {
                  const int J2 = 2 * s2 + cc;
                  const double bW = beta[cc] * dphi[k2];
                  double h = 0;
                  if (e != 0.0)
                    h = (c == cc ? c1 * dphi[k] * dphi[k2] / r2 : 0.0) +
                        c2 * d[c] * d[cc] * dphi[k] * dphi[k2] / (r2 * r2);
                  const double trs = p.gradx[k][cc] * p.gradx[k2][c] + p.grady[k][cc] * p.grady[k2][c];
                  Bl[J1][J2] += base * (h + bV * dv[J2] + bW * dv[J1] + dv[J1] * dv[J2] - trs);
                }
              }
            }
          }
        }
        HessianBlocks& out = part[blk];
        for (int s = 0; s < nI; ++s)
          for (int c = 0; c < 2; ++c) {
            const int j = 2 * ia[Ik[s]] + c;
            for (int l = 0; l < p.nloc; ++l) {
              if (fl[l] < 0) continue;
              out.Q(fl[l], j) += Ql[l][2 * s + c];
              out.P(fl[l], j) += Pl[l][2 * s + c];
            }
            for (int s2 = 0; s2 < nI; ++s2)
              for (int cc = 0; cc < 2; ++cc) out.B(j, 2 * ia[Ik[s2]] + cc) += Bl[2 * s + c][2 * s2 + cc];
          }
      });
  for (const auto& pb : part) {
    H.B += pb.B;
    H.Q += pb.Q;
    H.P += pb.P;
  }
  return H;
}

}  // namespace nlshape
