#include "nlshape/pairs.hpp"

#include <algorithm>
#include <cmath>

#include "nlshape/parallel.hpp"

namespace nlshape {

namespace {

double point_segment_dist2(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double s = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (a + s * d - p).squaredNorm();
}

double triangle_dist(const Mesh& m, int s, int t) {
  const auto &S = m.triangles[s], &T = m.triangles[t];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (S[i] == T[j]) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      best = std::min(best, point_segment_dist2(m.vertices[S[i]], m.vertices[T[j]], m.vertices[T[(j + 1) % 3]]));
      best = std::min(best, point_segment_dist2(m.vertices[T[i]], m.vertices[S[j]], m.vertices[S[(j + 1) % 3]]));
    }
  return std::sqrt(best);
}

struct Rules {
  PairRule tensor;
  PairRule duffy[4];  // indexed by Touch
};

Rules make_rules(const KernelSpec& spec, const QuadratureOptions& q) {
  Rules r;
  const TriangleRule tri = triangle_rule(q.pair_degree);
  r.tensor = tensor_pair_rule(tri, tri);
  if (spec.singular())
    for (Touch t : {Touch::Vertex, Touch::Edge, Touch::Identical})
      r.duffy[static_cast<int>(t)] = duffy_pair_rule(t, q.duffy_order);
  return r;
}

// Local vertex orders putting the shared vertices first, in matching order.
Touch classify(const std::array<int, 3>& S, const std::array<int, 3>& T, bool same,
               std::array<int, 3>& ps, std::array<int, 3>& pt) {
  ps = {0, 1, 2};
  pt = {0, 1, 2};
  if (same) return Touch::Identical;
  int si[3], ti[3], n = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (S[i] == T[j]) {
        si[n] = i;
        ti[n] = j;
        ++n;
      }
  if (n == 0) return Touch::None;
  if (n == 1) {
    ps = {si[0], (si[0] + 1) % 3, (si[0] + 2) % 3};
    pt = {ti[0], (ti[0] + 1) % 3, (ti[0] + 2) % 3};
    return Touch::Vertex;
  }
  ps = {si[0], si[1], 3 - si[0] - si[1]};
  pt = {ti[0], ti[1], 3 - ti[0] - ti[1]};
  return Touch::Edge;
}

}  // namespace

std::size_t PairCandidates::num_pairs() const {
  std::size_t n = 0;
  for (const auto& p : partners) n += p.size();
  return n;
}

PairCandidates find_pair_candidates(const Mesh& mesh, double delta) {
  const int nt = mesh.num_triangles();
  PairCandidates c;
  c.partners.resize(nt);
  double maxdiam = 0;
  Vec2 lo = mesh.vertices.front(), hi = lo;
  for (int t = 0; t < nt; ++t) maxdiam = std::max(maxdiam, mesh.diameter(t));
  for (const auto& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double cell = delta + 2.0 * maxdiam;
  const int nx = std::max(1, static_cast<int>((hi.x() - lo.x()) / cell) + 1);
  const int ny = std::max(1, static_cast<int>((hi.y() - lo.y()) / cell) + 1);
  std::vector<std::vector<int>> grid(static_cast<std::size_t>(nx) * ny);
  std::vector<std::pair<int, int>> where(nt);
  for (int t = 0; t < nt; ++t) {
    const Vec2 g = mesh.centroid(t);
    const int i = std::min(nx - 1, static_cast<int>((g.x() - lo.x()) / cell));
    const int j = std::min(ny - 1, static_cast<int>((g.y() - lo.y()) / cell));
    where[t] = {i, j};
    grid[static_cast<std::size_t>(j) * nx + i].push_back(t);
  }
  parallel_blocks(nt, [&](int, std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) {
      auto& out = c.partners[t];
      const auto [i, j] = where[t];
      for (int jj = std::max(0, j - 1); jj <= std::min(ny - 1, j + 1); ++jj)
        for (int ii = std::max(0, i - 1); ii <= std::min(nx - 1, i + 1); ++ii)
          for (int s : grid[static_cast<std::size_t>(jj) * nx + ii]) {
            if (s < static_cast<int>(t)) continue;
            if (!mesh.in_omega(t) && !mesh.in_omega(s)) continue;
            if (triangle_dist(mesh, static_cast<int>(t), s) < delta) out.push_back(s);
          }
      std::sort(out.begin(), out.end());
    }
  });
  return c;
}

double PairBlock::at_x(const Eigen::VectorXd& f, std::size_t q) const {
  double s = 0;
  for (int k = 0; k < nloc; ++k) s += phix[q * kMaxNodes + k] * f[node[k]];
  return s;
}

double PairBlock::at_y(const Eigen::VectorXd& f, std::size_t q) const {
  double s = 0;
  for (int k = 0; k < nloc; ++k) s += phiy[q * kMaxNodes + k] * f[node[k]];
  return s;
}

int pair_block_count() { return num_threads(); }

void for_each_pair(const Mesh& mesh, const KernelSpec& spec, const QuadratureOptions& quad,
                   const PairCandidates& cand, const std::function<bool(int, int)>& want,
                   const std::function<void(int, const PairBlock&)>& visit, const Mesh* horizon_ref) {
  const Rules rules = make_rules(spec, quad);
  KernelSpec unbounded = spec;
  unbounded.delta = std::numeric_limits<double>::infinity();
  const double delta2 = spec.delta * spec.delta;
  const int nt = mesh.num_triangles();
  std::vector<double> dets(nt);
  std::vector<std::array<Vec2, 3>> grads(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& T = mesh.triangles[t];
    Mat2 J;
    J.col(0) = mesh.vertices[T[1]] - mesh.vertices[T[0]];
    J.col(1) = mesh.vertices[T[2]] - mesh.vertices[T[0]];
    dets[t] = J.determinant();
    if (!(dets[t] > 0)) throw NumericError("degenerate or inverted triangle " + std::to_string(t));
    const Mat2 G = J.inverse().transpose();
    grads[t] = {Vec2(-G.col(0) - G.col(1)), Vec2(G.col(0)), Vec2(G.col(1))};
  }

  parallel_blocks(nt, [&](int block, std::size_t b, std::size_t e) {
    PairBlock pb;
    std::vector<double> dx, dy, inside;
    for (std::size_t ts = b; ts < e; ++ts) {
      const int T = static_cast<int>(ts);
      for (int Tp : cand.partners[T]) {
        if (want && !want(T, Tp)) continue;
        const auto &S = mesh.triangles[T], &U = mesh.triangles[Tp];
        std::array<int, 3> ps, pt;
        const Touch touch = classify(S, U, T == Tp, ps, pt);
        const bool duffy = spec.singular() && touch != Touch::None;
        const PairRule& rule = duffy ? rules.duffy[static_cast<int>(touch)] : rules.tensor;
        if (!duffy) ps = pt = {0, 1, 2};
        pb.T = T;
        pb.Tp = Tp;
        pb.touch = touch;
        pb.rx = mesh.region[T];
        pb.ry = mesh.region[Tp];
        pb.cxy = spec.sigma(pb.rx, pb.ry) * spec.normalizer;
        pb.cyx = spec.sigma(pb.ry, pb.rx) * spec.normalizer;
        // local node list: vertices of T, then the new vertices of T'
        int xk[3], yk[3];
        pb.nloc = 0;
        for (int k = 0; k < 3; ++k) {
          pb.node[pb.nloc] = S[k];
          pb.gradx[pb.nloc] = grads[T][k];
          pb.grady[pb.nloc] = Vec2::Zero();
          xk[k] = pb.nloc++;
        }
        for (int k = 0; k < 3; ++k) {
          int found = -1;
          for (int l = 0; l < 3; ++l)
            if (S[l] == U[k]) found = xk[l];
          if (found < 0) {
            pb.node[pb.nloc] = U[k];
            pb.gradx[pb.nloc] = Vec2::Zero();
            found = pb.nloc++;
          }
          pb.grady[found] = grads[Tp][k];
          yk[k] = found;
        }
        const std::size_t n = rule.size();
        pb.npts = n;
        pb.x.resize(n);
        pb.y.resize(n);
        pb.w.resize(n);
        pb.rho.resize(n);
        pb.phix.assign(n * PairBlock::kMaxNodes, 0.0);
        pb.phiy.assign(n * PairBlock::kMaxNodes, 0.0);
        dx.resize(n);
        dy.resize(n);
        inside.resize(n);
        const double scale = dets[T] * dets[Tp] * (T == Tp ? 0.5 : 1.0);
        for (std::size_t q = 0; q < n; ++q) {
          const Bary bx = bary_of(rule.x[q]), by = bary_of(rule.y[q]);
          Vec2 px = Vec2::Zero(), py = Vec2::Zero();
          for (int k = 0; k < 3; ++k) {
            px += bx[k] * mesh.vertices[S[ps[k]]];
            py += by[k] * mesh.vertices[U[pt[k]]];
            pb.phix[q * PairBlock::kMaxNodes + xk[ps[k]]] = bx[k];
            pb.phiy[q * PairBlock::kMaxNodes + yk[pt[k]]] = by[k];
          }
          pb.x[q] = px;
          pb.y[q] = py;
          pb.w[q] = rule.weights[q] * scale;
          dx[q] = px.x() - py.x();
          dy[q] = px.y() - py.y();
          if (horizon_ref) {
            Vec2 rx = Vec2::Zero(), ry = Vec2::Zero();
            for (int k = 0; k < 3; ++k) {
              rx += bx[k] * horizon_ref->vertices[S[ps[k]]];
              ry += by[k] * horizon_ref->vertices[U[pt[k]]];
            }
            inside[q] = (rx - ry).squaredNorm() < delta2 ? 1.0 : 0.0;
          }
        }
        if (horizon_ref) {
          radial_factor(unbounded, n, dx.data(), dy.data(), pb.rho.data());
          for (std::size_t q = 0; q < n; ++q) pb.rho[q] *= inside[q];
        } else {
          radial_factor(spec, n, dx.data(), dy.data(), pb.rho.data());
        }
        visit(block, pb);
      }
    }
  });
}

}  // namespace nlshape
