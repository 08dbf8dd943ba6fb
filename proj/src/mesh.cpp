#include "nlshape/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace nlshape {

const char* region_name(Region r) {
  switch (r) {
    case Region::Omega1: return "Omega1";
    case Region::Omega2: return "Omega2";
    case Region::Interaction: return "Interaction";
  }
  return "?";
}

double Mesh::signed_area(int t) const {
  const auto& T = triangles[t];
  const Vec2 e1 = vertices[T[1]] - vertices[T[0]];
  const Vec2 e2 = vertices[T[2]] - vertices[T[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Vec2 Mesh::centroid(int t) const {
  const auto& T = triangles[t];
  return (vertices[T[0]] + vertices[T[1]] + vertices[T[2]]) / 3.0;
}

double Mesh::diameter(int t) const {
  const auto& T = triangles[t];
  return std::max({(vertices[T[0]] - vertices[T[1]]).norm(), (vertices[T[1]] - vertices[T[2]]).norm(),
                   (vertices[T[2]] - vertices[T[0]]).norm()});
}

namespace {

using EdgeKey = std::uint64_t;
EdgeKey edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, double* param) {
  const Vec2 d = b - a;
  const double s = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  *param = s;
  return (a + s * d - p).norm();
}

}  // namespace

void finalize_mesh(Mesh& mesh) {
  const int nv = mesh.num_nodes(), nt = mesh.num_triangles();
  if (nt == 0) throw InputError("mesh has no triangles");
  if (static_cast<int>(mesh.region.size()) != nt) throw InputError("label count differs from triangle count");
  int n1 = 0, n2 = 0;
  for (int t = 0; t < nt; ++t) {
    auto& T = mesh.triangles[t];
    for (int k = 0; k < 3; ++k)
      if (T[k] < 0 || T[k] >= nv) throw InputError("triangle " + std::to_string(t) + " has an out-of-range vertex");
    if (T[0] == T[1] || T[1] == T[2] || T[0] == T[2])
      throw InputError("triangle " + std::to_string(t) + " repeats a vertex");
    const double a = mesh.signed_area(t);
    if (a == 0.0) throw InputError("triangle " + std::to_string(t) + " is degenerate");
    if (a < 0.0) std::swap(T[1], T[2]);
    n1 += mesh.region[t] == Region::Omega1;
    n2 += mesh.region[t] == Region::Omega2;
  }
  if (n1 == 0) throw InputError("Omega1 empty");
  if (n2 == 0) throw InputError("Omega2 empty");

  std::unordered_map<EdgeKey, int> count;
  count.reserve(3 * nt);
  for (const auto& T : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++count[edge_key(T[k], T[(k + 1) % 3])];
  std::vector<std::pair<int, int>> boundary;
  for (const auto& [key, c] : count) {
    if (c > 2) throw InputError("non-conforming mesh: edge shared by more than two triangles");
    if (c == 1) boundary.emplace_back(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu));
  }
  // A hanging node shows up as a vertex lying inside a boundary edge.
  std::vector<char> used(nv, 0);
  for (const auto& T : mesh.triangles)
    for (int v : T) used[v] = 1;
  for (const auto& [a, b] : boundary) {
    const Vec2 &pa = mesh.vertices[a], &pb = mesh.vertices[b];
    const double len = (pb - pa).norm();
    for (int v = 0; v < nv; ++v) {
      if (!used[v] || v == a || v == b) continue;
      double s;
      if (point_segment_distance(mesh.vertices[v], pa, pb, &s) < 1e-12 * len && s > 0 && s < 1)
        throw InputError("non-conforming mesh: hanging node " + std::to_string(v));
    }
  }

  mesh.constrained.assign(nv, 0);
  for (int t = 0; t < nt; ++t)
    if (mesh.region[t] == Region::Interaction)
      for (int v : mesh.triangles[t]) mesh.constrained[v] = 1;
}

InterfaceEdges extract_interface(const Mesh& mesh) {
  struct Side {
    int tri = -1;
    int a = -1, b = -1;  // oriented as in that triangle
  };
  std::unordered_map<EdgeKey, std::pair<Side, Side>> sides;  // (Omega1 side, Omega2 side)
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Region r = mesh.region[t];
    if (r == Region::Interaction) continue;
    const auto& T = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = T[k], b = T[(k + 1) % 3];
      auto& s = sides[edge_key(a, b)];
      (r == Region::Omega1 ? s.first : s.second) = Side{t, a, b};
    }
  }
  InterfaceEdges out;
  for (const auto& [key, s] : sides) {
    if (s.first.tri < 0 || s.second.tri < 0) continue;
    InterfaceEdge e;
    e.a = s.first.a;
    e.b = s.first.b;
    e.tri1 = s.first.tri;
    e.tri2 = s.second.tri;
    const Vec2 d = mesh.vertices[e.b] - mesh.vertices[e.a];
    e.length = d.norm();
    // Omega1 is on the left of a->b (counter-clockwise triangle), so the
    // right-hand normal points into Omega2.
    e.normal = Vec2(d.y(), -d.x()) / e.length;
    out.edges.push_back(e);
  }
  std::sort(out.edges.begin(), out.edges.end(), [](const InterfaceEdge& x, const InterfaceEdge& y) {
    return std::minmax(x.a, x.b) < std::minmax(y.a, y.b);
  });
  for (const auto& e : out.edges) {
    out.nodes.push_back(e.a);
    out.nodes.push_back(e.b);
  }
  std::sort(out.nodes.begin(), out.nodes.end());
  out.nodes.erase(std::unique(out.nodes.begin(), out.nodes.end()), out.nodes.end());
  return out;
}

Mesh displaced_mesh(const Mesh& mesh, const VectorField& V, double t) {
  if (V.size() != 2 * mesh.num_nodes()) throw InputError("vector field size does not match mesh");
  Mesh out = mesh;
  for (int i = 0; i < mesh.num_nodes(); ++i) out.vertices[i] += t * Vec2(V[2 * i], V[2 * i + 1]);
  return out;
}

bool has_inverted(const Mesh& mesh) {
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (!(mesh.signed_area(t) > 0.0)) return true;
  return false;
}

Mesh deform_mesh(const Mesh& mesh, const VectorField& V, double t) {
  if (V.size() != 2 * mesh.num_nodes()) throw InputError("vector field size does not match mesh");
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (mesh.constrained[i] && (V[2 * i] != 0.0 || V[2 * i + 1] != 0.0))
      throw InputError("vector field is nonzero on constrained node " + std::to_string(i));
  Mesh out = displaced_mesh(mesh, V, t);
  for (int k = 0; k < out.num_triangles(); ++k)
    if (!(out.signed_area(k) > 0.0))
      throw NumericError("deformation inverts triangle " + std::to_string(k));
  return out;
}

MeshQuality mesh_quality(const Mesh& mesh) {
  MeshQuality q{180.0, std::numeric_limits<double>::infinity()};
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    q.min_signed_area = std::min(q.min_signed_area, mesh.signed_area(t));
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = mesh.vertices[T[(k + 1) % 3]] - mesh.vertices[T[k]];
      const Vec2 v = mesh.vertices[T[(k + 2) % 3]] - mesh.vertices[T[k]];
      const double c = std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
      q.min_angle_deg = std::min(q.min_angle_deg, std::acos(c) * 180.0 / std::numbers::pi);
    }
  }
  return q;
}

}  // namespace nlshape
