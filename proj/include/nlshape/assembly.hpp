#pragma once

#include "nlshape/fem.hpp"
#include "nlshape/kernel.hpp"
#include "nlshape/pairs.hpp"

namespace nlshape {

// Everything that defines the state equation and objective apart from the mesh.
struct Problem {
  KernelSpec kernel;
  Forcing forcing;
  double nu = 0.0;  // perimeter weight
  QuadratureOptions quad;
};

// Raw first-order forms at t = 0 (tracking term with the 1/2 weight):
//   frakJ = int -(u - ubar) grad(ubar).V + 1/2 (u - ubar)^2 div V
//   frakF = int v grad(f).V + f v div V
//   frakA = 1/2 int int (v(x) - v(y)) (u(x) Psi_V(x,y) - u(y) Psi_V(y,x))
struct ShapeResiduals {
  double frakJ = 0, frakF = 0, frakA = 0;
};

// The same forms as linear functionals of one scalar argument, per node.
struct ShapeVectors {
  Eigen::VectorXd A_u_test;   // frakA_V(u, lambda_i)
  Eigen::VectorXd A_trial_v;  // frakA_V(lambda_i, v)
  Eigen::VectorXd F_test;     // frakF_V(lambda_i)
  Eigen::VectorXd dJ_test;    // d_u frakJ_V[lambda_i]
};

// Second-order forms in the same (1/2-weighted) convention.
struct SecondOrderScalars {
  double jpp = 0;  // linear second shape derivative J''[V, W]
  double dvw = 0;  // first derivative in direction DV W
};

// Dense blocks for the Hessian over interface vector dofs (2 per node).
//   B[i][j] = explicit second partial of the Lagrangian
//   Q[l][j] = frakA_{V_j}(u, lambda_l) - frakF_{V_j}(lambda_l)
//   P[l][j] = d_u frakJ_{V_j}[lambda_l] + frakA_{V_j}(lambda_l, v)
// with l over free scalar dofs.
struct HessianBlocks {
  Eigen::MatrixXd B, Q, P;
};

class Assembler {
 public:
  // horizon_ref: see for_each_pair; used by the transported-horizon diagnostic.
  Assembler(const Mesh& mesh, const Problem& problem, const Mesh* horizon_ref = nullptr);

  const Mesh& mesh() const { return *mesh_; }
  const Problem& problem() const { return problem_; }
  const DofMap& dofs() const { return dofs_; }
  const PairCandidates& candidates() const { return cand_; }

  // K[i][j] = A(phi_j, phi_i) over all nodes, and its free-dof block.
  SparseMatrix stiffness_full() const;
  SparseMatrix stiffness() const;
  // Nodal vectors over all nodes.
  Eigen::VectorXd load() const;
  Eigen::VectorXd tracking_load(const Eigen::VectorXd& u, const DataField& ubar) const;
  double tracking(const Eigen::VectorXd& u, const DataField& ubar) const;  // int (u - ubar)^2

  ShapeResiduals shape_residuals(const VectorField& V, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                 const DataField& ubar) const;
  ShapeVectors shape_vectors(const VectorField& V, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                             const DataField& ubar) const;
  // frakJ - frakF + frakA for every nodal basis field e_c phi_n, interleaved.
  Eigen::VectorXd gradient_forms(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const DataField& ubar) const;

  SecondOrderScalars second_order(const VectorField& V, const VectorField& W, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v, const Eigen::VectorXd& psi,
                                  const Eigen::VectorXd& phi, const DataField& ubar) const;
  HessianBlocks hessian_blocks(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const DataField& ubar,
                               const std::vector<int>& interface_nodes) const;

 private:
  template <class Fn>
  void for_omega_points(Fn&& fn) const;

  template <class Visit>
  void pairs(const std::function<bool(int, int)>& want, Visit&& visit) const {
    for_each_pair(*mesh_, problem_.kernel, problem_.quad, cand_, want, visit, horizon_ref_);
  }

  const Mesh* mesh_;
  const Mesh* horizon_ref_;
  Problem problem_;
  DofMap dofs_;
  PairCandidates cand_;
};

template <class Fn>
inline void Assembler::for_omega_points(Fn&& fn) const {
  const TriangleRule rule = triangle_rule(problem_.quad.single_degree);
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    if (!mesh_->in_omega(t)) continue;
    const Element e = make_element(*mesh_, t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary b = bary_of(rule.points[q]);
      fn(t, e, b, e.map(rule.points[q]), rule.weights[q] * e.det);
    }
  }
}

}  // namespace nlshape
