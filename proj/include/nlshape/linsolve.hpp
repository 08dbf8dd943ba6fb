#pragma once

#include <Eigen/SparseLU>
#include <memory>

#include "nlshape/assembly.hpp"

namespace nlshape {

struct SolverOptions {
  bool iterative = false;       // BiCGSTAB with diagonal preconditioning instead of sparse LU
  double residual_tol = 1e-10;  // relative residual contract
  int max_iterations = 5000;
};

// One factorization of A serving solves with A and with A^T.  Every solve
// checks the relative residual and applies iterative refinement if needed;
// NumericError if the contract still fails.
class Factorization {
 public:
  explicit Factorization(const SparseMatrix& A, SolverOptions opts = {});
  ~Factorization();
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;
  Eigen::MatrixXd solve_transpose(const Eigen::MatrixXd& B) const;
  int size() const { return static_cast<int>(A_.rows()); }

 private:
  struct Impl;
  Eigen::VectorXd solve_impl(const Eigen::VectorXd& b, bool transpose) const;
  SparseMatrix A_, At_;
  SolverOptions opts_;
  std::unique_ptr<Impl> impl_;
};

// b - Ax with long double accumulation.
Eigen::VectorXd residual_vector(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b);
double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b);
// max_i |b - Ax|_i / (|A||x| + |b|)_i
double componentwise_backward_error(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

// State u with A(u, w) = F(w); nodal vectors over all nodes in and out.
Eigen::VectorXd solve_state(const Factorization& fact, const DofMap& dofs, const Eigen::VectorXd& load);
// Adjoint v with A(w, v) = Ftilde(u, w).
Eigen::VectorXd solve_adjoint(const Factorization& fact, const DofMap& dofs, const Eigen::VectorXd& tracking_load);

struct AveragedAdjoints {
  Eigen::VectorXd phi, psi;  // nodal
};
// phi: A(phi, w) = frakF_V(w) - frakA_V(u, w);
// psi: A(w, psi) = -d_u frakJ_V[w] - frakA_V(w, v) - int w phi.
AveragedAdjoints solve_averaged_adjoints(const Factorization& fact, const Assembler& as, const SparseMatrix& mass,
                                         const VectorField& V, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                         const DataField& ubar);

}  // namespace nlshape
