#include "nlshape/shapecalc.hpp"

#include <algorithm>

namespace nlshape {

namespace {

Vec2 nodal_vec(const VectorField& V, int i) { return {V[2 * i], V[2 * i + 1]}; }

}  // namespace

double perimeter(const Mesh&, const InterfaceEdges& iface) {
  double s = 0;
  for (const auto& e : iface.edges) s += e.length;
  return s;
}

double perimeter_first(const Mesh& mesh, const InterfaceEdges& iface, const VectorField& V) {
  double s = 0;
  for (const auto& e : iface.edges) {
    const Vec2 tau = (mesh.vertices[e.b] - mesh.vertices[e.a]) / e.length;
    s += tau.dot(nodal_vec(V, e.b) - nodal_vec(V, e.a));
  }
  return s;
}

double perimeter_second(const Mesh&, const InterfaceEdges& iface, const VectorField& V, const VectorField& W) {
  double s = 0;
  for (const auto& e : iface.edges)
    s += e.normal.dot(nodal_vec(V, e.b) - nodal_vec(V, e.a)) * e.normal.dot(nodal_vec(W, e.b) - nodal_vec(W, e.a)) /
         e.length;
  return s;
}

InterfaceDofs interface_dofs(const Mesh& mesh, const InterfaceEdges& iface, const DofMap& dofs) {
  (void)mesh;
  InterfaceDofs d;
  for (int n : iface.nodes) {
    const int f = dofs.free_index[n];
    if (f < 0) continue;
    d.nodes.push_back(n);
    d.free_dofs.push_back(2 * f);
    d.free_dofs.push_back(2 * f + 1);
  }
  return d;
}

StateBundle solve_states(const Mesh& mesh, const Problem& problem, const DataField& ubar,
                         const SolverOptions& solver, const Mesh* horizon_ref) {
  StateBundle st;
  st.mesh = &mesh;
  st.as = std::make_unique<Assembler>(mesh, problem, horizon_ref);
  st.K = st.as->stiffness();
  st.mass = assemble_mass(mesh);
  st.fact = std::make_unique<Factorization>(st.K, solver);
  st.u = solve_state(*st.fact, st.as->dofs(), st.as->load());
  st.v = solve_adjoint(*st.fact, st.as->dofs(), st.as->tracking_load(st.u, ubar));
  st.iface = extract_interface(mesh);
  st.tracking = st.as->tracking(st.u, ubar);
  st.perimeter = perimeter(mesh, st.iface);
  st.J = st.tracking + problem.nu * st.perimeter;
  return st;
}

double first_derivative(const StateBundle& st, const DataField& ubar, const VectorField& V) {
  const ShapeResiduals r = st.as->shape_residuals(V, st.u, st.v, ubar);
  return 2.0 * (r.frakJ - r.frakF + r.frakA) + st.as->problem().nu * perimeter_first(*st.mesh, st.iface, V);
}

Eigen::VectorXd first_derivative_vector(const StateBundle& st, const DataField& ubar, Eigen::VectorXd* unmasked) {
  const Mesh& mesh = *st.mesh;
  Eigen::VectorXd g = 2.0 * st.as->gradient_forms(st.u, st.v, ubar);
  const double nu = st.as->problem().nu;
  for (const auto& e : st.iface.edges) {
    const Vec2 tau = (mesh.vertices[e.b] - mesh.vertices[e.a]) / e.length;
    for (int c = 0; c < 2; ++c) {
      g[2 * e.b + c] += nu * tau[c];
      g[2 * e.a + c] -= nu * tau[c];
    }
  }
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (mesh.constrained[i]) g[2 * i] = g[2 * i + 1] = 0.0;
  if (unmasked) *unmasked = g;
  std::vector<char> on(mesh.num_nodes(), 0);
  for (int n : st.iface.nodes) on[n] = 1;
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (!on[i]) g[2 * i] = g[2 * i + 1] = 0.0;
  return g;
}

SecondDerivative second_derivative(const StateBundle& st, const DataField& ubar, const VectorField& V,
                                   const VectorField& W) {
  const AveragedAdjoints aa = solve_averaged_adjoints(*st.fact, *st.as, st.mass, V, st.u, st.v, ubar);
  const SecondOrderScalars s = st.as->second_order(V, W, st.u, st.v, aa.psi, aa.phi, ubar);
  SecondDerivative r;
  r.jpp = 2.0 * s.jpp + st.as->problem().nu * perimeter_second(*st.mesh, st.iface, V, W);
  r.dvw = 2.0 * s.dvw;
  return r;
}

HessianResult hessian_matrix(const StateBundle& st, const DataField& ubar) {
  const Mesh& mesh = *st.mesh;
  const DofMap& dofs = st.as->dofs();
  HessianResult res;
  res.idofs = interface_dofs(mesh, st.iface, dofs);
  const HessianBlocks hb = st.as->hessian_blocks(st.u, st.v, ubar, res.idofs.nodes);
  // averaged adjoints for every interface basis field, one factorization
  const Eigen::MatrixXd Phi = -st.fact->solve(hb.Q);
  const SparseMatrix Mf = dofs.restrict_matrix(st.mass);
  const Eigen::MatrixXd Psi = -st.fact->solve_transpose(Eigen::MatrixXd(hb.P + Mf * Phi));
  Eigen::MatrixXd H = 2.0 * (hb.B + Psi.transpose() * hb.Q + Phi.transpose() * hb.P);
  // perimeter Hessian over interface dofs
  std::vector<int> slot(mesh.num_nodes(), -1);
  for (std::size_t a = 0; a < res.idofs.nodes.size(); ++a) slot[res.idofs.nodes[a]] = static_cast<int>(a);
  const double nu = st.as->problem().nu;
  for (const auto& e : st.iface.edges) {
    const int ends[2] = {slot[e.a], slot[e.b]};
    const double sg[2] = {-1.0, 1.0};
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) {
        if (ends[p] < 0 || ends[q] < 0) continue;
        for (int c = 0; c < 2; ++c)
          for (int cc = 0; cc < 2; ++cc)
            H(2 * ends[p] + c, 2 * ends[q] + cc) += nu * sg[p] * sg[q] * e.normal[c] * e.normal[cc] / e.length;
      }
  }
  const double hn = H.norm();
  res.symmetry_defect = hn > 0 ? (H - H.transpose()).norm() / hn : 0.0;
  res.H = 0.5 * (H + H.transpose());
  return res;
}

SparseMatrix regularizer_matrix(const Mesh& mesh, const DofMap& dofs) {
  SparseMatrix R = assemble_vector_mass(mesh, dofs);
  R += assemble_vector_stiffness(mesh, dofs);
  return R;
}

DerivativeBundle derivative_bundle(const StateBundle& st, const DataField& ubar) {
  DerivativeBundle b;
  b.grad = st.as->dofs().restrict_vector(first_derivative_vector(st, ubar));
  HessianResult h = hessian_matrix(st, ubar);
  b.hess = std::move(h.H);
  b.idofs = std::move(h.idofs);
  b.symmetry_defect = h.symmetry_defect;
  b.reg = regularizer_matrix(*st.mesh, st.as->dofs());
  return b;
}

}  // namespace nlshape
