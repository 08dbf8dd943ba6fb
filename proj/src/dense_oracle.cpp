#include "nlshape/dense_oracle.hpp"

#include <utility>

namespace nlshape {

namespace {

Vec2 nodal_vec(const VectorField& V, int i) { return {V[2 * i], V[2 * i + 1]}; }

struct Local {
  Vec2 V, W;
  Mat2 DV, DW;
};

Local fields_at(const Mesh& m, int t, const Bary& b, const VectorField& V, const VectorField& W) {
  const Element e = make_element(m, t);
  Local l{Vec2::Zero(), Vec2::Zero(), Mat2::Zero(), Mat2::Zero()};
  for (int k = 0; k < 3; ++k) {
    const int n = m.triangles[t][k];
    l.V += b[k] * nodal_vec(V, n);
    l.W += b[k] * nodal_vec(W, n);
    l.DV += nodal_vec(V, n) * e.grad[k].transpose();
    l.DW += nodal_vec(W, n) * e.grad[k].transpose();
  }
  return l;
}

double interp(const Mesh& m, int t, const Bary& b, const Eigen::VectorXd& f) {
  const auto& T = m.triangles[t];
  return b[0] * f[T[0]] + b[1] * f[T[1]] + b[2] * f[T[2]];
}

}  // namespace

DenseOracle::DenseOracle(const Mesh& mesh, const Problem& problem, const QuadratureOptions& quad)
    : mesh_(&mesh), problem_(problem), quad_(quad) {}

std::vector<DenseOracle::Point> DenseOracle::single_points(int t) const {
  const TriangleRule r = triangle_rule(quad_.single_degree);
  const Element e = make_element(*mesh_, t);
  std::vector<Point> pts;
  for (std::size_t q = 0; q < r.size(); ++q) pts.push_back({t, bary_of(r.points[q]), e.map(r.points[q]), r.weights[q] * e.det});
  return pts;
}

template <class Fn>
void DenseOracle::pair_points(int s, int t, Fn&& fn) const {
  // Points are generated for the ordering (min, max) and swapped for the
  // reverse one, so both orderings see the same point set.
  const bool flip = s > t;
  const int a = flip ? t : s, b = flip ? s : t;
  const auto &S = mesh_->triangles[a], &T = mesh_->triangles[b];
  int shared = 0, si[3], ti[3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (S[i] == T[j]) {
        si[shared] = i;
        ti[shared] = j;
        ++shared;
      }
  std::array<int, 3> ps{0, 1, 2}, pt{0, 1, 2};
  PairRule rule;
  if (problem_.kernel.singular() && shared > 0) {
    if (shared == 3) {
      rule = duffy_pair_rule(Touch::Identical, quad_.duffy_order);
    } else if (shared == 2) {
      ps = {si[0], si[1], 3 - si[0] - si[1]};
      pt = {ti[0], ti[1], 3 - ti[0] - ti[1]};
      rule = duffy_pair_rule(Touch::Edge, quad_.duffy_order);
    } else {
      ps = {si[0], (si[0] + 1) % 3, (si[0] + 2) % 3};
      pt = {ti[0], (ti[0] + 1) % 3, (ti[0] + 2) % 3};
      rule = duffy_pair_rule(Touch::Vertex, quad_.duffy_order);
    }
  } else {
    const TriangleRule tr = triangle_rule(quad_.pair_degree);
    rule = tensor_pair_rule(tr, tr);
  }
  const double ja = 2.0 * mesh_->signed_area(a), jb = 2.0 * mesh_->signed_area(b);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Bary rx = bary_of(rule.x[q]), ry = bary_of(rule.y[q]);
    Bary bx{}, by{};
    for (int k = 0; k < 3; ++k) {
      bx[ps[k]] = rx[k];
      by[pt[k]] = ry[k];
    }
    Point X{a, bx, Vec2::Zero(), 0}, Y{b, by, Vec2::Zero(), 0};
    for (int k = 0; k < 3; ++k) {
      X.x += bx[k] * mesh_->vertices[S[k]];
      Y.x += by[k] * mesh_->vertices[T[k]];
    }
    if (flip) std::swap(X, Y);
    fn(X, Y, rule.weights[q] * ja * jb);
  }
}

Eigen::MatrixXd DenseOracle::stiffness_full() const {
  const int n = mesh_->num_nodes();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < mesh_->num_triangles(); ++s)
    for (int t = 0; t < mesh_->num_triangles(); ++t) {
      if (!mesh_->in_omega(s) && !mesh_->in_omega(t)) continue;
      pair_points(s, t, [&](const Point& X, const Point& Y, double w) {
        PointPairContext c;
        c.x = X.x;
        c.y = Y.x;
        c.region_x = mesh_->region[s];
        c.region_y = mesh_->region[t];
        const double gxy = kernel_eval(problem_.kernel, c), gyx = kernel_eval(problem_.kernel, c.swapped());
        for (int i = 0; i < n; ++i) {
          Eigen::VectorXd ei = Eigen::VectorXd::Unit(n, i);
          const double vi = interp(*mesh_, s, X.b, ei) - interp(*mesh_, t, Y.b, ei);
          if (vi == 0.0) continue;
          for (int j = 0; j < n; ++j) {
            Eigen::VectorXd ej = Eigen::VectorXd::Unit(n, j);
            K(i, j) += 0.5 * w * vi * (interp(*mesh_, s, X.b, ej) * gxy - interp(*mesh_, t, Y.b, ej) * gyx);
          }
        }
      });
    }
  return K;
}

Eigen::VectorXd DenseOracle::load() const {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(mesh_->num_nodes());
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    if (!mesh_->in_omega(t)) continue;
    for (const auto& p : single_points(t)) {
      const double f = problem_.forcing.eval(mesh_->region[t], p.x).value;
      for (int k = 0; k < 3; ++k) F[mesh_->triangles[t][k]] += p.w * f * p.b[k];
    }
  }
  return F;
}

Eigen::VectorXd DenseOracle::tracking_load(const Eigen::VectorXd& u, const DataField& ubar) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh_->num_nodes());
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    if (!mesh_->in_omega(t)) continue;
    for (const auto& p : single_points(t)) {
      const double err = interp(*mesh_, t, p.b, u) - ubar.eval(t, p.b, p.x).value;
      for (int k = 0; k < 3; ++k) r[mesh_->triangles[t][k]] -= p.w * err * p.b[k];
    }
  }
  return r;
}

double DenseOracle::tracking(const Eigen::VectorXd& u, const DataField& ubar) const {
  double s = 0;
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    if (!mesh_->in_omega(t)) continue;
    for (const auto& p : single_points(t)) {
      const double err = interp(*mesh_, t, p.b, u) - ubar.eval(t, p.b, p.x).value;
      s += p.w * err * err;
    }
  }
  return s;
}

ShapeResiduals DenseOracle::shape_residuals(const VectorField& V, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                            const DataField& ubar) const {
  ShapeResiduals r;
  const VectorField Z0 = VectorField::Zero(V.size());
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    if (!mesh_->in_omega(t)) continue;
    for (const auto& p : single_points(t)) {
      const Local l = fields_at(*mesh_, t, p.b, V, Z0);
      const FieldValue ub = ubar.eval(t, p.b, p.x);
      const FieldValue f = problem_.forcing.eval(mesh_->region[t], p.x);
      const double err = interp(*mesh_, t, p.b, u) - ub.value, vh = interp(*mesh_, t, p.b, v);
      r.frakJ += p.w * (-err * ub.grad.dot(l.V) + 0.5 * err * err * l.DV.trace());
      r.frakF += p.w * (vh * f.grad.dot(l.V) + f.value * vh * l.DV.trace());
    }
  }
  for (int s = 0; s < mesh_->num_triangles(); ++s)
    for (int t = 0; t < mesh_->num_triangles(); ++t) {
      if (!mesh_->in_omega(s) && !mesh_->in_omega(t)) continue;
      pair_points(s, t, [&](const Point& X, const Point& Y, double w) {
        const Local lx = fields_at(*mesh_, s, X.b, V, Z0), ly = fields_at(*mesh_, t, Y.b, V, Z0);
        PointPairContext c;
        c.x = X.x;
        c.y = Y.x;
        c.region_x = mesh_->region[s];
        c.region_y = mesh_->region[t];
        c.V_x = lx.V;
        c.V_y = ly.V;
        c.divV_x = lx.DV.trace();
        c.divV_y = ly.DV.trace();
        const PsiTerms ps = psi_terms(problem_.kernel, c);
        const double vx = interp(*mesh_, s, X.b, v), vy = interp(*mesh_, t, Y.b, v);
        const double ux = interp(*mesh_, s, X.b, u), uy = interp(*mesh_, t, Y.b, u);
        r.frakA += 0.5 * w * (vx - vy) * (ux * (ps.psi1_xy + ps.psi2_xy) - uy * (ps.psi1_yx + ps.psi2_yx));
      });
    }
  return r;
}

SecondOrderScalars DenseOracle::second_order(const VectorField& V, const VectorField& W, const Eigen::VectorXd& u,
                                             const Eigen::VectorXd& v, const Eigen::VectorXd& psi,
                                             const Eigen::VectorXd& phi, const DataField& ubar) const {
  SecondOrderScalars r;
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    if (!mesh_->in_omega(t)) continue;
    for (const auto& p : single_points(t)) {
      const Local l = fields_at(*mesh_, t, p.b, V, W);
      const FieldValue ub = ubar.eval(t, p.b, p.x);
      const FieldValue f = problem_.forcing.eval(mesh_->region[t], p.x);
      const double err = interp(*mesh_, t, p.b, u) - ub.value, vh = interp(*mesh_, t, p.b, v);
      const double ph = interp(*mesh_, t, p.b, psi), fh = interp(*mesh_, t, p.b, phi);
      const double dV = l.DV.trace(), dW = l.DW.trace(), tr = (l.DV * l.DW).trace();
      // tracking: second mixed derivative of 1/2 (u - ubar o F)^2 det DF
      const double track = ub.grad.dot(l.V) * ub.grad.dot(l.W) - err * l.V.dot(ub.hess * l.W) -
                           err * ub.grad.dot(l.V) * dW - err * ub.grad.dot(l.W) * dV + 0.5 * err * err * (dV * dW - tr);
      const double force = vh * (l.V.dot(f.hess * l.W) + f.grad.dot(l.V) * dW + f.grad.dot(l.W) * dV +
                                 f.value * (dV * dW - tr));
      r.jpp += p.w * (track - force - (ph * f.grad.dot(l.W) + f.value * ph * dW) +
                      (-fh * ub.grad.dot(l.W) + err * fh * dW));
      const Vec2 Z = l.DV * l.W;
      r.dvw += p.w * (-err * ub.grad.dot(Z) + 0.5 * err * err * tr - vh * f.grad.dot(Z) - f.value * vh * tr);
    }
  }
  for (int s = 0; s < mesh_->num_triangles(); ++s)
    for (int t = 0; t < mesh_->num_triangles(); ++t) {
      if (!mesh_->in_omega(s) && !mesh_->in_omega(t)) continue;
      pair_points(s, t, [&](const Point& X, const Point& Y, double w) {
        const Local lx = fields_at(*mesh_, s, X.b, V, W), ly = fields_at(*mesh_, t, Y.b, V, W);
        PointPairContext c;
        c.x = X.x;
        c.y = Y.x;
        c.region_x = mesh_->region[s];
        c.region_y = mesh_->region[t];
        c.V_x = lx.V;
        c.V_y = ly.V;
        c.W_x = lx.W;
        c.W_y = ly.W;
        c.divV_x = lx.DV.trace();
        c.divV_y = ly.DV.trace();
        c.divW_x = lx.DW.trace();
        c.divW_y = ly.DW.trace();
        c.DV_x = lx.DV;
        c.DV_y = ly.DV;
        c.DW_x = lx.DW;
        c.DW_y = ly.DW;
        c.divDVW_x = (lx.DV * lx.DW).trace();
        c.divDVW_y = (ly.DV * ly.DW).trace();
        const PsiTerms pV = psi_terms(problem_.kernel, c);
        const TTerms tt = t_terms(problem_.kernel, c);
        PointPairContext cw = c;  // Psi for W
        cw.V_x = c.W_x;
        cw.V_y = c.W_y;
        cw.divV_x = c.divW_x;
        cw.divV_y = c.divW_y;
        const PsiTerms pW = psi_terms(problem_.kernel, cw);
        const double dW = c.divW_x + c.divW_y;
        const double kxy = tt.t11_xy + tt.t12_xy + (pV.psi1_xy + pV.psi2_xy) * dW;
        const double kyx = tt.t11_yx + tt.t12_yx + (pV.psi1_yx + pV.psi2_yx) * dW;
        const double sWxy = pW.psi1_xy + pW.psi2_xy, sWyx = pW.psi1_yx + pW.psi2_yx;
        const double zxy = tt.t21_xy + tt.t22_xy, zyx = tt.t21_yx + tt.t22_yx;
        auto at = [&](const Eigen::VectorXd& f, bool atx) {
          return atx ? interp(*mesh_, s, X.b, f) : interp(*mesh_, t, Y.b, f);
        };
        const double vd = at(v, true) - at(v, false);
        const double ux = at(u, true), uy = at(u, false);
        r.jpp += 0.5 * w *
                 (vd * (ux * kxy - uy * kyx) + (at(psi, true) - at(psi, false)) * (ux * sWxy - uy * sWyx) +
                  vd * (at(phi, true) * sWxy - at(phi, false) * sWyx));
        r.dvw += 0.5 * w * vd * (ux * zxy - uy * zyx);
      });
    }
  return r;
}

Eigen::MatrixXd DenseOracle::regularizer_full() const {
  const int n = mesh_->num_nodes();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    const Element e = make_element(*mesh_, t);
    for (const auto& p : single_points(t)) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const int a = mesh_->triangles[t][i], b = mesh_->triangles[t][j];
          const double val = p.w * (p.b[i] * p.b[j] + e.grad[i].dot(e.grad[j]));
          R(2 * a, 2 * b) += val;
          R(2 * a + 1, 2 * b + 1) += val;
        }
    }
  }
  return R;
}

}  // namespace nlshape
