#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "nlshape/mesh.hpp"

namespace nlshape {

LevelSet circle_level_set(Vec2 center, double radius) {
  LevelSet ls;
  ls.phi = [=](const Vec2& p) { return (p - center).norm() - radius; };
  ls.grad = [=](const Vec2& p) {
    const Vec2 d = p - center;
    const double n = d.norm();
    return n > 0 ? Vec2(d / n) : Vec2(1.0, 0.0);
  };
  ls.name = "circle";
  return ls;
}

LevelSet square_level_set(Vec2 center, double half_width) {
  LevelSet ls;
  ls.phi = [=](const Vec2& p) {
    return std::max(std::abs(p.x() - center.x()), std::abs(p.y() - center.y())) - half_width;
  };
  ls.grad = [=](const Vec2& p) {
    const Vec2 d = p - center;
    if (std::abs(d.x()) >= std::abs(d.y())) return Vec2(d.x() >= 0 ? 1.0 : -1.0, 0.0);
    return Vec2(0.0, d.y() >= 0 ? 1.0 : -1.0);
  };
  ls.name = "square";
  return ls;
}

LevelSet ellipse_level_set(Vec2 center, double ax, double ay) {
  LevelSet ls;
  ls.phi = [=](const Vec2& p) {
    const double X = (p.x() - center.x()) / ax, Y = (p.y() - center.y()) / ay;
    return std::sqrt(X * X + Y * Y) - 1.0;
  };
  ls.grad = [=](const Vec2& p) {
    const double X = (p.x() - center.x()) / ax, Y = (p.y() - center.y()) / ay;
    const double r = std::sqrt(X * X + Y * Y);
    if (r == 0) return Vec2(1.0, 0.0);
    return Vec2(X / (r * ax), Y / (r * ay));
  };
  ls.name = "ellipse";
  return ls;
}

namespace {

int checked_cells(double length, int per_unit, const char* what) {
  const double c = length * per_unit;
  const int n = static_cast<int>(std::lround(c));
  if (std::abs(c - n) > 1e-9 || n < 0)
    throw InputError(std::string(what) + " is not a multiple of the mesh width");
  return n;
}

double min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  auto ang = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Vec2 u = q - p, v = r - p;
    return std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
  };
  return std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
}

}  // namespace

Mesh generate_box_mesh(const BoxMeshSpec& spec, const LevelSet& ls) {
  if (spec.cells_per_unit < 1) throw InputError("cells_per_unit must be positive");
  const int n = spec.cells_per_unit;
  const double h = 1.0 / n;
  const int m = checked_cells(spec.upper - spec.lower, n, "domain width");
  const int nc = checked_cells(spec.collar, n, "collar width");
  if (m < 2) throw InputError("domain needs at least two cells per side");
  const int N = m + 2 * nc;  // cells per side
  auto nid = [&](int i, int j) { return j * (N + 1) + i; };

  Mesh mesh;
  std::vector<double> phi;
  std::vector<char> zero;
  mesh.vertices.resize((N + 1) * (N + 1));
  phi.resize(mesh.vertices.size());
  zero.assign(mesh.vertices.size(), 0);
  const double zero_tol = 1e-12;
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i) {
      const Vec2 p(spec.lower + static_cast<double>(i - nc) / n, spec.lower + static_cast<double>(j - nc) / n);
      const int id = nid(i, j);
      mesh.vertices[id] = p;
      const bool interior = i > nc && i < nc + m && j > nc && j < nc + m;
      double f = ls.phi(p);
      if (!interior) {
        if (f <= 0) throw InputError("interface must lie strictly inside the domain");
        phi[id] = f;
        continue;
      }
      if (std::abs(f) <= zero_tol) {
        phi[id] = 0;
        zero[id] = 1;
        continue;
      }
      const double g = ls.grad(p).norm();
      if (g > 0 && std::abs(f) / g < spec.snap_fraction * h) {
        Vec2 q = p;
        for (int it = 0; it < 60 && std::abs(ls.phi(q)) > 1e-15; ++it) {
          const Vec2 gq = ls.grad(q);
          q -= ls.phi(q) * gq / gq.squaredNorm();
        }
        if ((q - p).norm() <= 0.5 * h && std::abs(ls.phi(q)) <= 1e-12) {
          mesh.vertices[id] = q;
          phi[id] = 0;
          zero[id] = 1;
          continue;
        }
      }
      phi[id] = f;
    }
  auto sgn = [&](int v) { return zero[v] ? 0 : (phi[v] < 0 ? -1 : 1); };

  std::unordered_map<std::uint64_t, int> roots;
  auto root = [&](int a, int b) {
    const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
    auto it = roots.find(key);
    if (it != roots.end()) return it->second;
    Vec2 lo = mesh.vertices[a], hi = mesh.vertices[b];
    if (phi[a] > 0) std::swap(lo, hi);  // phi(lo) < 0 < phi(hi)
    for (int it2 = 0; it2 < 200 && (hi - lo).norm() > 1e-16; ++it2) {
      const Vec2 mid = 0.5 * (lo + hi);
      (ls.phi(mid) < 0 ? lo : hi) = mid;
    }
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(0.5 * (lo + hi));
    phi.push_back(0.0);
    zero.push_back(1);
    roots.emplace(key, id);
    return id;
  };

  auto label_of = [&](int s) { return s < 0 ? Region::Omega1 : Region::Omega2; };
  auto emit = [&](int a, int b, int c, Region r) {
    mesh.triangles.push_back({a, b, c});
    mesh.region.push_back(r);
  };

  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const int p00 = nid(i, j), p10 = nid(i + 1, j), p11 = nid(i + 1, j + 1), p01 = nid(i, j + 1);
      std::array<std::array<int, 3>, 2> tris;
      if ((i + j) % 2 == 0)
        tris = {{{p00, p10, p11}, {p00, p11, p01}}};
      else
        tris = {{{p00, p10, p01}, {p10, p11, p01}}};
      const bool in_omega = i >= nc && i < nc + m && j >= nc && j < nc + m;
      for (auto T : tris) {
        if (!in_omega) {
          emit(T[0], T[1], T[2], Region::Interaction);
          continue;
        }
        int npos = 0, nneg = 0;
        for (int v : T) {
          npos += sgn(v) > 0;
          nneg += sgn(v) < 0;
        }
        if (npos == 0 || nneg == 0) {
          Region r;
          if (npos + nneg == 0)
            r = label_of(ls.phi((mesh.vertices[T[0]] + mesh.vertices[T[1]] + mesh.vertices[T[2]]) / 3.0) < 0 ? -1 : 1);
          else
            r = label_of(npos > 0 ? 1 : -1);
          emit(T[0], T[1], T[2], r);
          continue;
        }
        if (npos + nneg == 2) {
          // one vertex on Gamma: cut through it
          int k = 0;
          while (sgn(T[k]) != 0) ++k;
          const int z = T[k], p = T[(k + 1) % 3], q = T[(k + 2) % 3];
          const int r = root(p, q);
          emit(z, p, r, label_of(sgn(p)));
          emit(z, r, q, label_of(sgn(q)));
          continue;
        }
        // lone vertex l with the other two on the opposite side
        int k = 0;
        const int lone_sign = npos == 1 ? 1 : -1;
        while (sgn(T[k]) != lone_sign) ++k;
        const int l = T[k], p = T[(k + 1) % 3], q = T[(k + 2) % 3];
        const int r1 = root(l, p), r2 = root(l, q);
        emit(l, r1, r2, label_of(lone_sign));
        const auto& V = mesh.vertices;
        const double qa = std::min(min_angle(V[r1], V[p], V[q]), min_angle(V[r1], V[q], V[r2]));
        const double qb = std::min(min_angle(V[r1], V[p], V[r2]), min_angle(V[p], V[q], V[r2]));
        if (qa >= qb) {
          emit(r1, p, q, label_of(-lone_sign));
          emit(r1, q, r2, label_of(-lone_sign));
        } else {
          emit(r1, p, r2, label_of(-lone_sign));
          emit(p, q, r2, label_of(-lone_sign));
        }
      }
    }
  finalize_mesh(mesh);
  return mesh;
}

Mesh generate_polar_mesh(int n_theta, double r1, double r2, double r3, int rings_per_layer) {
  if (n_theta < 3 || rings_per_layer < 1 || !(0 < r1 && r1 < r2 && r2 < r3))
    throw InputError("invalid polar mesh parameters");
  Mesh mesh;
  mesh.vertices.push_back(Vec2::Zero());
  std::vector<double> radii;
  const double layer[4] = {0.0, r1, r2, r3};
  for (int L = 0; L < 3; ++L)
    for (int k = 1; k <= rings_per_layer; ++k)
      radii.push_back(layer[L] + (layer[L + 1] - layer[L]) * k / rings_per_layer);
  const int nr = static_cast<int>(radii.size());
  for (int k = 0; k < nr; ++k)
    for (int j = 0; j < n_theta; ++j) {
      // odd rings are rotated half a step for better angles
      const double th = 2.0 * std::numbers::pi * (j + 0.5 * (k % 2)) / n_theta;
      mesh.vertices.emplace_back(radii[k] * std::cos(th), radii[k] * std::sin(th));
    }
  auto id = [&](int ring, int j) { return 1 + ring * n_theta + ((j % n_theta) + n_theta) % n_theta; };
  auto region_of_ring = [&](int outer_ring) {
    const int L = outer_ring / rings_per_layer;
    return L == 0 ? Region::Omega1 : (L == 1 ? Region::Omega2 : Region::Interaction);
  };
  for (int j = 0; j < n_theta; ++j) {
    mesh.triangles.push_back({0, id(0, j), id(0, j + 1)});
    mesh.region.push_back(Region::Omega1);
  }
  for (int k = 1; k < nr; ++k) {
    const Region r = region_of_ring(k);
    for (int j = 0; j < n_theta; ++j) {
      // ring k is shifted by +half step relative to ring k-1 when k is odd
      if (k % 2 == 1) {
        mesh.triangles.push_back({id(k - 1, j), id(k, j), id(k - 1, j + 1)});
        mesh.triangles.push_back({id(k - 1, j + 1), id(k, j), id(k, j + 1)});
      } else {
        mesh.triangles.push_back({id(k - 1, j), id(k, j + 1), id(k - 1, j + 1)});
        mesh.triangles.push_back({id(k - 1, j), id(k, j), id(k, j + 1)});
      }
      mesh.region.push_back(r);
      mesh.region.push_back(r);
    }
  }
  finalize_mesh(mesh);
  return mesh;
}

}  // namespace nlshape
