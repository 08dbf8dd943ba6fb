#pragma once

#include <memory>

#include "nlshape/assembly.hpp"
#include "nlshape/linsolve.hpp"

namespace nlshape {

// ---- perimeter calculus on the polygonal interface ----
double perimeter(const Mesh& mesh, const InterfaceEdges& iface);
// sum over edges of the tangential derivative tau . (V_b - V_a)
double perimeter_first(const Mesh& mesh, const InterfaceEdges& iface, const VectorField& V);
// sum over edges of (n . (V_b - V_a)) (n . (W_b - W_a)) / |e|, i.e. the
// integral of div_G V div_G W - tr(D_G V D_G W) + <D_G V^T n, D_G W^T n>
// with tangential Jacobians D_G V = DV (I - n n^T).
double perimeter_second(const Mesh& mesh, const InterfaceEdges& iface, const VectorField& V, const VectorField& W);

// Vector dofs attached to nodes on the interface, two per node.
struct InterfaceDofs {
  std::vector<int> nodes;      // mesh nodes
  std::vector<int> free_dofs;  // free vector dof of entry 2 * a + c
  int size() const { return static_cast<int>(free_dofs.size()); }
};
InterfaceDofs interface_dofs(const Mesh& mesh, const InterfaceEdges& iface, const DofMap& dofs);

// State, adjoint and objective on one mesh configuration.  References the
// mesh, which must outlive it.
struct StateBundle {
  const Mesh* mesh = nullptr;
  std::unique_ptr<Assembler> as;
  SparseMatrix K;      // free-dof stiffness
  SparseMatrix mass;   // nodal scalar mass over Omega
  std::unique_ptr<Factorization> fact;
  Eigen::VectorXd u, v;  // nodal
  InterfaceEdges iface;
  double tracking = 0, perimeter = 0, J = 0;
};
StateBundle solve_states(const Mesh& mesh, const Problem& problem, const DataField& ubar,
                         const SolverOptions& solver = {}, const Mesh* horizon_ref = nullptr);

// Reduced functional J = int (u - ubar)^2 + nu |Gamma| and its derivatives.
// First derivative: 2 (frakJ - frakF + frakA) + nu perimeter_first.
double first_derivative(const StateBundle& st, const DataField& ubar, const VectorField& V);
// Nodal (interleaved) gradient, zero at every dof not on the interface.
Eigen::VectorXd first_derivative_vector(const StateBundle& st, const DataField& ubar,
                                        Eigen::VectorXd* unmasked = nullptr);

struct SecondDerivative {
  double jpp = 0;  // J''[V, W] including nu perimeter_second
  double dvw = 0;  // D J[DV W] without the perimeter part
};
// Direct evaluation for one pair of fields (solves the averaged adjoints for V).
SecondDerivative second_derivative(const StateBundle& st, const DataField& ubar, const VectorField& V,
                                   const VectorField& W);

struct HessianResult {
  Eigen::MatrixXd H;              // symmetrized, over interface dofs
  double symmetry_defect = 0;     // ||H - H^T|| / ||H|| before symmetrization
  InterfaceDofs idofs;
};
HessianResult hessian_matrix(const StateBundle& st, const DataField& ubar);

// H1 inner product of vector fields on the free vector dofs.
SparseMatrix regularizer_matrix(const Mesh& mesh, const DofMap& dofs);

struct DerivativeBundle {
  Eigen::VectorXd grad;  // free vector dofs, masked
  Eigen::MatrixXd hess;  // interface dofs
  SparseMatrix reg;      // free vector dofs
  InterfaceDofs idofs;
  double symmetry_defect = 0;
};
DerivativeBundle derivative_bundle(const StateBundle& st, const DataField& ubar);

}  // namespace nlshape
