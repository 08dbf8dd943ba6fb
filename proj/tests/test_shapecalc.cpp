#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "nlshape/shapecalc.hpp"
#include "nlshape/verify.hpp"

using namespace nlshape;

namespace {

template <class F>
VectorField nodal(const Mesh& m, F&& f) {
  VectorField V(2 * m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) V.segment<2>(2 * i) = f(m.vertices[i]);
  return V;
}

VectorField random_field(const Mesh& m, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  VectorField V(2 * m.num_nodes());
  for (auto& x : V) x = U(rng);
  return V;
}

Problem full_problem(double nu) {
  Problem p;
  p.kernel.delta = 3.0;
  p.kernel.normalizer = 1.0;
  p.kernel.sigma11 = 0.5;
  p.kernel.sigma12 = 2.0;
  p.kernel.sigma21 = 1.0;
  p.kernel.sigma22 = 3.0;
  p.kernel.sigma1I = 1.0;
  p.kernel.sigma2I = 1.5;
  p.forcing = piecewise_forcing(10, -10);
  p.nu = nu;
  return p;
}

Mesh small_box() {
  BoxMeshSpec spec;
  spec.cells_per_unit = 8;
  spec.collar = 0.25;
  return generate_box_mesh(spec, square_level_set({0.5, 0.5}, 0.25));
}

}  // namespace

TEST_SUITE("shapecalc") {

TEST_CASE("perimeter derivatives on a polygonal unit circle") {
  auto err = [](int n) {
    const Mesh m = generate_polar_mesh(n, 1.0, 1.5, 2.0);
    const InterfaceEdges g = extract_interface(m);
    const VectorField X = nodal(m, [](const Vec2& p) { return p; });
    return std::abs(perimeter_first(m, g, X) - 2.0 * std::numbers::pi);
  };
  const double e1 = err(32), e2 = err(64);
  CHECK(e2 < 0.3 * e1);
  CHECK(e2 / e1 == doctest::Approx(0.25).epsilon(0.05));

  const Mesh m = generate_polar_mesh(48, 1.0, 1.5, 2.0);
  const InterfaceEdges g = extract_interface(m);
  const VectorField X = nodal(m, [](const Vec2& p) { return p; });
  const VectorField R = nodal(m, [](const Vec2& p) { return Vec2(-p.y(), p.x()); });
  const VectorField Z = VectorField::Zero(2 * m.num_nodes());
  CHECK(std::abs(perimeter_first(m, g, R)) < 1e-13);
  CHECK(perimeter_first(m, g, Z) == 0.0);
  CHECK(std::abs(perimeter_second(m, g, X, X)) < 1e-13);
  CHECK(perimeter_second(m, g, X, Z) == 0.0);
  const VectorField A = random_field(m, 1), B = random_field(m, 2);
  CHECK(perimeter_second(m, g, A, B) == doctest::Approx(perimeter_second(m, g, B, A)).epsilon(1e-14));
}

TEST_CASE("perimeter derivatives match finite differences") {
  const Mesh m = generate_polar_mesh(24, 0.3, 0.5, 0.7);
  const InterfaceEdges g = extract_interface(m);
  const InterfaceDofs idofs = interface_dofs(m, g, DofMap::from_mesh(m));
  const VectorField V = random_interface_field(m, idofs, 3);
  const double t = 1e-4;
  auto P = [&](const VectorField& F, double s) {
    const Mesh d = deform_mesh(m, F, s);
    return perimeter(d, extract_interface(d));
  };
  const double fd1 = (P(V, t) - P(V, -t)) / (2 * t);
  CHECK(fd1 == doctest::Approx(perimeter_first(m, g, V)).epsilon(1e-6));
  const double fd2 = (P(V, t) - 2 * perimeter(m, g) + P(V, -t)) / (t * t);
  CHECK(fd2 == doctest::Approx(perimeter_second(m, g, V, V)).epsilon(1e-4));
}

TEST_CASE("gradient masking and stationarity at the data-generating interface") {
  const Mesh m = small_box();
  // u-bar = the state of the current configuration itself
  const Problem p = full_problem(0.0);
  const AnalyticField seed = verification_data();
  const StateBundle st0 = solve_states(m, p, seed);
  const NodalField ub(m, st0.u);
  const StateBundle st = solve_states(m, p, ub);
  CHECK(st.v.norm() == 0.0);
  Eigen::VectorXd unmasked;
  const Eigen::VectorXd g = first_derivative_vector(st, ub, &unmasked);
  CHECK(g.lpNorm<Eigen::Infinity>() <= 1e-8 * std::max(1.0, std::abs(st.J)));

  const StateBundle sv = solve_states(m, full_problem(0.01), seed);
  const Eigen::VectorXd gv = first_derivative_vector(sv, seed, &unmasked);
  std::vector<char> on(m.num_nodes(), 0);
  for (int n : sv.iface.nodes) on[n] = 1;
  int off_nonzero = 0, on_nonzero = 0;
  for (int i = 0; i < m.num_nodes(); ++i)
    for (int c = 0; c < 2; ++c) {
      if (!on[i] && gv[2 * i + c] != 0.0) ++off_nonzero;
      if (on[i] && gv[2 * i + c] != 0.0) ++on_nonzero;
    }
  CHECK(off_nonzero == 0);
  CHECK(on_nonzero > 0);
  CHECK((unmasked - gv).norm() > 0);
}

TEST_CASE("gradient vector reproduces the directional derivative") {
  const Mesh m = small_box();
  const AnalyticField ub = verification_data();
  const StateBundle st = solve_states(m, full_problem(0.01), ub);
  const InterfaceDofs idofs = interface_dofs(m, st.iface, st.as->dofs());
  const VectorField V = random_interface_field(m, idofs, 5);
  CHECK(first_derivative_vector(st, ub).dot(V) == doctest::Approx(first_derivative(st, ub, V)).epsilon(1e-10));
}

TEST_CASE("Hessian matrix: symmetry and agreement with direct second derivatives") {
  const Mesh m = small_box();
  const AnalyticField ub = verification_data();
  const StateBundle st = solve_states(m, full_problem(0.01), ub);
  const HessianResult hr = hessian_matrix(st, ub);
  CHECK((hr.H - hr.H.transpose()).norm() == 0.0);
  CHECK(hr.symmetry_defect >= 0.0);
  CHECK(hr.symmetry_defect < 1e-2);
  const VectorField V = random_interface_field(m, hr.idofs, 6), W = random_interface_field(m, hr.idofs, 7);
  auto restrict = [&](const VectorField& F) {
    Eigen::VectorXd a(hr.idofs.size());
    for (int i = 0; i < hr.idofs.size(); ++i) a[i] = F[2 * hr.idofs.nodes[i / 2] + i % 2];
    return a;
  };
  const double direct_vw = second_derivative(st, ub, V, W).jpp, direct_wv = second_derivative(st, ub, W, V).jpp;
  const double from_matrix = restrict(V).dot(hr.H * restrict(W));
  CHECK(from_matrix == doctest::Approx(0.5 * (direct_vw + direct_wv)).epsilon(1e-8));
  CHECK(second_derivative(st, ub, V, VectorField::Zero(V.size())).jpp == 0.0);
}

TEST_CASE("regularizer matrix") {
  SUBCASE("constant field without constraints integrates to |Omega| |c|^2") {
    const Mesh m = testutil::diamond_mesh();
    const DofMap d = DofMap::from_mesh(m);
    REQUIRE(d.num_free() == m.num_nodes());
    const SparseMatrix R = regularizer_matrix(m, d);
    const VectorField c = nodal(m, [](const Vec2&) { return Vec2(0.3, -0.7); });
    CHECK(c.dot(R * c) == doctest::Approx(4.0 * 0.58).epsilon(1e-13));
  }
  SUBCASE("symmetric positive definite on fixture meshes") {
    for (const Mesh& m : {testutil::tiny8(), small_box()}) {
      const SparseMatrix R = regularizer_matrix(m, DofMap::from_mesh(m));
      const Eigen::MatrixXd D(R);
      CHECK((D - D.transpose()).norm() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
      CHECK(es.eigenvalues().minCoeff() > 0);
    }
  }
}

TEST_CASE("interface dofs cover exactly the free interface nodes") {
  const Mesh m = testutil::tiny8();
  const InterfaceEdges g = extract_interface(m);
  const DofMap d = DofMap::from_mesh(m);
  const InterfaceDofs idofs = interface_dofs(m, g, d);
  CHECK(idofs.nodes == std::vector<int>{4});
  REQUIRE(idofs.size() == 2);
  CHECK(idofs.free_dofs[0] == 2 * d.free_index[4]);
  CHECK(idofs.free_dofs[1] == 2 * d.free_index[4] + 1);
}

}  // TEST_SUITE
