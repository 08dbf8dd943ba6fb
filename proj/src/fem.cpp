#include "nlshape/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlshape {

Element make_element(const Mesh& mesh, int t) {
  Element e;
  const auto& T = mesh.triangles[t];
  for (int k = 0; k < 3; ++k) e.p[k] = mesh.vertices[T[k]];
  e.J.col(0) = e.p[1] - e.p[0];
  e.J.col(1) = e.p[2] - e.p[0];
  e.det = e.J.determinant();
  if (!(e.det > 0)) throw NumericError("degenerate or inverted triangle " + std::to_string(t));
  const Mat2 Jinv_t = e.J.inverse().transpose();
  e.grad[1] = Jinv_t.col(0);
  e.grad[2] = Jinv_t.col(1);
  e.grad[0] = -e.grad[1] - e.grad[2];
  return e;
}

AnalyticField quadratic_field(const std::array<double, 6>& c) {
  return AnalyticField([c](const Vec2& p) {
    const double x = p.x(), y = p.y();
    FieldValue f;
    f.value = c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
    f.grad = {c[1] + 2 * c[3] * x + c[4] * y, c[2] + c[4] * x + 2 * c[5] * y};
    f.hess << 2 * c[3], c[4], c[4], 2 * c[5];
    return f;
  });
}

Eigen::MatrixX2d recover_gradient(const Mesh& mesh, const Eigen::VectorXd& values) {
  const int n = mesh.num_nodes();
  Eigen::MatrixX2d g = Eigen::MatrixX2d::Zero(n, 2);
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Element e = make_element(mesh, t);
    Vec2 gt = Vec2::Zero();
    for (int k = 0; k < 3; ++k) gt += values[mesh.triangles[t][k]] * e.grad[k];
    const double a = 0.5 * e.det;
    for (int k = 0; k < 3; ++k) {
      const int i = mesh.triangles[t][k];
      g.row(i) += a * gt.transpose();
      wsum[i] += a;
    }
  }
  for (int i = 0; i < n; ++i)
    if (wsum[i] > 0) g.row(i) /= wsum[i];
  return g;
}

NodalField::NodalField(const Mesh& mesh, Eigen::VectorXd values)
    : tris_(mesh.triangles), values_(std::move(values)) {
  if (values_.size() != mesh.num_nodes()) throw InputError("nodal field size does not match mesh");
  grad_ = recover_gradient(mesh, values_);
  const Eigen::MatrixX2d hx = recover_gradient(mesh, grad_.col(0));
  const Eigen::MatrixX2d hy = recover_gradient(mesh, grad_.col(1));
  hess_.resize(mesh.num_nodes(), 4);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const double off = 0.5 * (hx(i, 1) + hy(i, 0));
    hess_.row(i) << hx(i, 0), off, off, hy(i, 1);
  }
}

FieldValue NodalField::eval(int tri, const Bary& b, const Vec2&) const {
  FieldValue f;
  for (int k = 0; k < 3; ++k) {
    const int i = tris_[tri][k];
    f.value += b[k] * values_[i];
    f.grad += b[k] * grad_.row(i).transpose();
    f.hess(0, 0) += b[k] * hess_(i, 0);
    f.hess(0, 1) += b[k] * hess_(i, 1);
    f.hess(1, 0) += b[k] * hess_(i, 2);
    f.hess(1, 1) += b[k] * hess_(i, 3);
  }
  return f;
}

Forcing piecewise_forcing(double f1, double f2) {
  return Forcing{[f1, f2](Region r, const Vec2&) {
    FieldValue f;
    f.value = r == Region::Omega1 ? f1 : (r == Region::Omega2 ? f2 : 0.0);
    return f;
  }};
}

// ---- dof map ----

DofMap DofMap::from_mesh(const Mesh& mesh) {
  DofMap d;
  d.free_index.assign(mesh.num_nodes(), -1);
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (!mesh.constrained[i]) {
      d.free_index[i] = static_cast<int>(d.free_nodes.size());
      d.free_nodes.push_back(i);
    }
  return d;
}

Eigen::VectorXd DofMap::restrict_scalar(const Eigen::VectorXd& nodal) const {
  Eigen::VectorXd r(num_free());
  for (int k = 0; k < num_free(); ++k) r[k] = nodal[free_nodes[k]];
  return r;
}

Eigen::VectorXd DofMap::extend_scalar(const Eigen::VectorXd& free) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_index.size()));
  for (int k = 0; k < num_free(); ++k) r[free_nodes[k]] = free[k];
  return r;
}

Eigen::VectorXd DofMap::restrict_vector(const VectorField& nodal) const {
  Eigen::VectorXd r(2 * num_free());
  for (int k = 0; k < num_free(); ++k) {
    r[2 * k] = nodal[2 * free_nodes[k]];
    r[2 * k + 1] = nodal[2 * free_nodes[k] + 1];
  }
  return r;
}

VectorField DofMap::extend_vector(const Eigen::VectorXd& free) const {
  VectorField r = VectorField::Zero(2 * static_cast<Eigen::Index>(free_index.size()));
  for (int k = 0; k < num_free(); ++k) {
    r[2 * free_nodes[k]] = free[2 * k];
    r[2 * free_nodes[k] + 1] = free[2 * k + 1];
  }
  return r;
}

SparseMatrix DofMap::restrict_matrix(const SparseMatrix& full) const {
  Triplets trip;
  trip.reserve(full.nonZeros());
  for (int c = 0; c < full.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(full, c); it; ++it) {
      const int i = free_index[it.row()], j = free_index[it.col()];
      if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
    }
  SparseMatrix r(num_free(), num_free());
  r.setFromTriplets(trip.begin(), trip.end());
  return r;
}

// ---- point location ----

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  Vec2 lo = mesh.vertices.front(), hi = lo;
  for (const auto& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const int target = std::max(1, static_cast<int>(std::sqrt(mesh.num_triangles() / 2.0)));
  cell_ = span / target * (1 + 1e-9) + 1e-300;
  lo_ = lo;
  nx_ = static_cast<int>((hi.x() - lo.x()) / cell_) + 1;
  ny_ = static_cast<int>((hi.y() - lo.y()) / cell_) + 1;
  cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    Vec2 a = mesh.vertices[mesh.triangles[t][0]], b = a;
    for (int k = 1; k < 3; ++k) {
      a = a.cwiseMin(mesh.vertices[mesh.triangles[t][k]]);
      b = b.cwiseMax(mesh.vertices[mesh.triangles[t][k]]);
    }
    const int i0 = std::max(0, static_cast<int>((a.x() - lo.x()) / cell_) - 1);
    const int i1 = std::min(nx_ - 1, static_cast<int>((b.x() - lo.x()) / cell_) + 1);
    const int j0 = std::max(0, static_cast<int>((a.y() - lo.y()) / cell_) - 1);
    const int j1 = std::min(ny_ - 1, static_cast<int>((b.y() - lo.y()) / cell_) + 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
  }
}

namespace {

Vec2 closest_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double s = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return a + s * d;
}

}  // namespace

std::optional<std::pair<int, Bary>> PointLocator::locate(const Vec2& x, double tol) const {
  const int i = static_cast<int>(std::floor((x.x() - lo_.x()) / cell_));
  const int j = static_cast<int>(std::floor((x.y() - lo_.y()) / cell_));
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) {
    if (i < -1 || j < -1 || i > nx_ || j > ny_) return std::nullopt;
  }
  const int ci = std::clamp(i, 0, nx_ - 1), cj = std::clamp(j, 0, ny_ - 1);
  double best = std::numeric_limits<double>::infinity();
  std::optional<std::pair<int, Bary>> result;
  for (int t : cells_[static_cast<std::size_t>(cj) * nx_ + ci]) {
    const auto& T = mesh_->triangles[t];
    const Vec2 &a = mesh_->vertices[T[0]], &b = mesh_->vertices[T[1]], &c = mesh_->vertices[T[2]];
    Mat2 J;
    J.col(0) = b - a;
    J.col(1) = c - a;
    const Vec2 r = J.inverse() * (x - a);
    Bary bc{1.0 - r.x() - r.y(), r.x(), r.y()};
    if (std::min({bc[0], bc[1], bc[2]}) >= -1e-14) return std::make_pair(t, bc);
    Vec2 q = closest_on_segment(x, a, b);
    for (const Vec2& cand : {closest_on_segment(x, b, c), closest_on_segment(x, c, a)})
      if ((cand - x).squaredNorm() < (q - x).squaredNorm()) q = cand;
    const double dist = (q - x).norm();
    if (dist <= tol && dist < best) {
      best = dist;
      const Vec2 rq = J.inverse() * (q - a);
      Bary bq{std::max(0.0, 1.0 - rq.x() - rq.y()), std::max(0.0, rq.x()), std::max(0.0, rq.y())};
      const double s = bq[0] + bq[1] + bq[2];
      for (double& v : bq) v /= s;
      result = std::make_pair(t, bq);
    }
  }
  return result;
}

Eigen::VectorXd interpolate_nodal(const TargetData& data, const Mesh& onto) {
  const PointLocator loc(data.mesh);
  Eigen::VectorXd out(onto.num_nodes());
  for (int i = 0; i < onto.num_nodes(); ++i) {
    const auto hit = loc.locate(onto.vertices[i]);
    if (!hit) {
      throw InputError("data interpolation: node " + std::to_string(i) + " at (" +
                       std::to_string(onto.vertices[i].x()) + ", " + std::to_string(onto.vertices[i].y()) +
                       ") lies outside the data mesh");
    }
    const auto& T = data.mesh.triangles[hit->first];
    out[i] = hit->second[0] * data.values[T[0]] + hit->second[1] * data.values[T[1]] +
             hit->second[2] * data.values[T[2]];
  }
  return out;
}

// ---- mass and stiffness ----

SparseMatrix assemble_mass(const Mesh& mesh) {
  Triplets trip;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!mesh.in_omega(t)) continue;
    const double a = mesh.signed_area(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(mesh.triangles[t][i], mesh.triangles[t][j], a / 12.0 * (i == j ? 2.0 : 1.0));
  }
  SparseMatrix M(mesh.num_nodes(), mesh.num_nodes());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

SparseMatrix assemble_vector_mass(const Mesh& mesh, const DofMap& dofs) {
  Triplets trip;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.signed_area(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int fi = dofs.free_index[mesh.triangles[t][i]], fj = dofs.free_index[mesh.triangles[t][j]];
        if (fi < 0 || fj < 0) continue;
        const double m = a / 12.0 * (i == j ? 2.0 : 1.0);
        for (int c = 0; c < 2; ++c) trip.emplace_back(2 * fi + c, 2 * fj + c, m);
      }
  }
  SparseMatrix M(2 * dofs.num_free(), 2 * dofs.num_free());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

SparseMatrix assemble_vector_stiffness(const Mesh& mesh, const DofMap& dofs) {
  Triplets trip;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Element e = make_element(mesh, t);
    const double a = 0.5 * e.det;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int fi = dofs.free_index[mesh.triangles[t][i]], fj = dofs.free_index[mesh.triangles[t][j]];
        if (fi < 0 || fj < 0) continue;
        const double k = a * e.grad[i].dot(e.grad[j]);
        for (int c = 0; c < 2; ++c) trip.emplace_back(2 * fi + c, 2 * fj + c, k);
      }
  }
  SparseMatrix K(2 * dofs.num_free(), 2 * dofs.num_free());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

}  // namespace nlshape
