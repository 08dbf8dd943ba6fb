#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "nlshape/mesh.hpp"

using namespace nlshape;

TEST_SUITE("mesh") {

TEST_CASE("two triangles both in Omega1 are rejected") {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.region = {Region::Omega1, Region::Omega1};
  CHECK_THROWS_WITH_AS(finalize_mesh(m), "Omega2 empty", InputError);
}

TEST_CASE("diamond mesh has four interface edges with outward normals") {
  const Mesh m = testutil::diamond_mesh();
  const InterfaceEdges g = extract_interface(m);
  REQUIRE(g.edges.size() == 4);
  CHECK(g.nodes == std::vector<int>{1, 3, 5, 7});
  const Vec2 c(1, 1);
  for (const auto& e : g.edges) {
    const Vec2 mid = 0.5 * (m.vertices[e.a] + m.vertices[e.b]);
    CHECK(e.normal.dot(mid - c) > 0);
    CHECK(e.normal.norm() == doctest::Approx(1.0));
    CHECK(e.length == doctest::Approx(std::sqrt(2.0)));
    CHECK(m.region[e.tri1] == Region::Omega1);
    CHECK(m.region[e.tri2] == Region::Omega2);
  }
}

TEST_CASE("clockwise triangles are reoriented") {
  Mesh m = testutil::diamond_mesh();
  std::swap(m.triangles[2][1], m.triangles[2][2]);
  std::swap(m.triangles[6][0], m.triangles[6][1]);
  finalize_mesh(m);
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0);
}

TEST_CASE("edge between Omega1 and the interaction domain is not interface") {
  const Mesh m = testutil::tiny8();
  const InterfaceEdges g = extract_interface(m);
  // Gamma is the horizontal segment 3-4-5; 1-3 and 1-5 border I-triangles only
  CHECK(g.edges.size() == 2);
  CHECK(g.nodes == std::vector<int>{3, 4, 5});
  for (const auto& e : g.edges) CHECK(e.normal.y() == doctest::Approx(1.0));
  CHECK(m.constrained[0]);
  CHECK_FALSE(m.constrained[4]);
}

TEST_CASE("interface normals flip when labels are swapped") {
  Mesh m = testutil::diamond_mesh();
  const InterfaceEdges g = extract_interface(m);
  for (auto& r : m.region) r = r == Region::Omega1 ? Region::Omega2 : Region::Omega1;
  finalize_mesh(m);
  const InterfaceEdges h = extract_interface(m);
  REQUIRE(h.edges.size() == g.edges.size());
  for (const auto& e : g.edges) {
    const auto it = std::find_if(h.edges.begin(), h.edges.end(), [&](const InterfaceEdge& f) {
      return std::min(f.a, f.b) == std::min(e.a, e.b) && std::max(f.a, f.b) == std::max(e.a, e.b);
    });
    REQUIRE(it != h.edges.end());
    CHECK((it->normal + e.normal).norm() < 1e-14);
  }
}

TEST_CASE("interface is invariant under triangle renumbering") {
  Mesh m = testutil::diamond_mesh();
  const InterfaceEdges g = extract_interface(m);
  Mesh r = m;
  std::vector<int> perm(m.num_triangles());
  for (int i = 0; i < m.num_triangles(); ++i) perm[i] = (i * 3 + 5) % m.num_triangles();
  for (int i = 0; i < m.num_triangles(); ++i) {
    r.triangles[perm[i]] = m.triangles[i];
    r.region[perm[i]] = m.region[i];
  }
  finalize_mesh(r);
  const InterfaceEdges h = extract_interface(r);
  CHECK(h.nodes == g.nodes);
  double lg = 0, lh = 0;
  for (const auto& e : g.edges) lg += e.length;
  for (const auto& e : h.edges) lh += e.length;
  CHECK(lg == doctest::Approx(lh));
}

TEST_CASE("polar disk mesh: closed interface polyline") {
  const Mesh m = generate_polar_mesh(64, 0.25, 0.4, 0.5);
  const InterfaceEdges g = extract_interface(m);
  CHECK(g.edges.size() == 64);
  CHECK(g.nodes.size() == 64);
}

TEST_CASE("deformation round trip and t = 0") {
  const Mesh m = testutil::tiny8();
  VectorField V = VectorField::Zero(2 * m.num_nodes());
  V[8] = 0.1;
  V[9] = -0.05;
  const Mesh same = deform_mesh(m, V, 0.0);
  for (int i = 0; i < m.num_nodes(); ++i) CHECK((same.vertices[i] - m.vertices[i]).norm() == 0.0);
  const Mesh back = deform_mesh(deform_mesh(m, V, 0.7), V, -0.7);
  for (int i = 0; i < m.num_nodes(); ++i) CHECK((back.vertices[i] - m.vertices[i]).norm() < 1e-14);
  CHECK(back.triangles == m.triangles);
  CHECK(back.region == m.region);
}

TEST_CASE("field on a constrained node is rejected") {
  const Mesh m = testutil::tiny8();
  VectorField V = VectorField::Ones(2 * m.num_nodes());
  CHECK_THROWS_AS(deform_mesh(m, V, 0.1), InputError);
}

TEST_CASE("hat field on the center node inverts at the critical step") {
  const Mesh m = testutil::tiny8();
  VectorField V = VectorField::Zero(2 * m.num_nodes());
  V[8] = 1.0;  // node 4 at (0.5, 0.5) moves in +x; node 5 sits at x = 1
  CHECK_NOTHROW(deform_mesh(m, V, 0.49));
  CHECK_THROWS_AS(deform_mesh(m, V, 0.51), NumericError);
  const MeshQuality q = mesh_quality(displaced_mesh(m, V, 0.4999));
  CHECK(q.min_signed_area > 0);
  CHECK(q.min_signed_area < 1e-4);
}

TEST_CASE("mesh quality of right isosceles and equilateral meshes") {
  CHECK(mesh_quality(testutil::tiny8()).min_angle_deg == doctest::Approx(45.0));
  Mesh eq;
  const double h = std::sqrt(3.0) / 2.0;
  eq.vertices = {{0, 0}, {1, 0}, {0.5, h}, {1.5, h}};
  eq.triangles = {{0, 1, 2}, {1, 3, 2}};
  eq.region = {Region::Omega1, Region::Omega2};
  finalize_mesh(eq);
  const MeshQuality q = mesh_quality(eq);
  CHECK(q.min_angle_deg == doctest::Approx(60.0));
  CHECK(q.min_signed_area == doctest::Approx(h / 2.0));
}

TEST_CASE("gmsh file with named physical groups") {
  RegionMap map{{"inner", Region::Omega1}, {"outer", Region::Omega2}, {"collar", Region::Interaction}};
  const Mesh g = load_mesh(testutil::source_path("data/tiny8.msh"), MeshFormat::Gmsh, map);
  const Mesh n = testutil::tiny8();
  REQUIRE(g.num_triangles() == n.num_triangles());
  CHECK(g.region == n.region);
  CHECK(extract_interface(g).nodes == extract_interface(n).nodes);
  CHECK_THROWS_AS(load_mesh(testutil::source_path("data/tiny8.msh"), MeshFormat::Gmsh), InputError);
}

TEST_CASE("native round trip") {
  const Mesh m = testutil::tiny8();
  const Mesh r = parse_native(to_native(m));
  CHECK(r.triangles == m.triangles);
  CHECK(r.region == m.region);
  for (int i = 0; i < m.num_nodes(); ++i) CHECK(r.vertices[i] == m.vertices[i]);
}

TEST_CASE("generated box mesh conforms to a circle") {
  BoxMeshSpec spec;
  spec.cells_per_unit = 20;
  const Mesh m = generate_box_mesh(spec, circle_level_set({0.5, 0.5}, 0.25));
  const InterfaceEdges g = extract_interface(m);
  REQUIRE(!g.edges.empty());
  for (int n : g.nodes) CHECK(std::abs((m.vertices[n] - Vec2(0.5, 0.5)).norm() - 0.25) < 1e-9);
  CHECK(mesh_quality(m).min_signed_area > 0);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const Vec2 c = m.centroid(t);
    const bool outside = c.x() < 0 || c.x() > 1 || c.y() < 0 || c.y() > 1;
    CHECK((m.region[t] == Region::Interaction) == outside);
  }
}

}  // TEST_SUITE
