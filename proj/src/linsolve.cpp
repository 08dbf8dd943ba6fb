#include "nlshape/linsolve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <vector>

namespace nlshape {

struct Factorization::Impl {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> it, itT;
};

Eigen::VectorXd residual_vector(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  // extended accumulation: the rounding floor of (b - Ax) in double sits near
  // the 1e-10 contract for the worse conditioned Newton systems
  std::vector<long double> r(b.data(), b.data() + b.size());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      r[it.row()] -= static_cast<long double>(it.value()) * static_cast<long double>(x[it.col()]);
  Eigen::VectorXd out(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) out[i] = static_cast<double>(r[i]);
  return out;
}

double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  const double r = residual_vector(A, x, b).norm();
  return nb > 0 ? r / nb : r;
}

double componentwise_backward_error(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const Eigen::VectorXd r = residual_vector(A, x, b);
  const Eigen::VectorXd scale = A.cwiseAbs() * x.cwiseAbs() + b.cwiseAbs();
  double e = 0;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (r[i] != 0.0) e = std::max(e, scale[i] > 0 ? std::abs(r[i]) / scale[i] : INFINITY);
  return e;
}

Factorization::Factorization(const SparseMatrix& A, SolverOptions opts)
    : A_(A), At_(A.transpose()), opts_(opts), impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw NumericError("factorize: matrix is not square");
  for (const SparseMatrix* M : {&A_, &At_})
    for (int k = 0; k < M->outerSize(); ++k) {
      bool any = false;
      for (SparseMatrix::InnerIterator it(*M, k); it; ++it) any |= it.value() != 0.0;
      if (!any) throw NumericError("factorize: structurally singular matrix (empty row or column " + std::to_string(k) + ")");
    }
  A_.makeCompressed();
  At_.makeCompressed();
  if (opts_.iterative) {
    impl_->it.setMaxIterations(opts_.max_iterations);
    impl_->itT.setMaxIterations(opts_.max_iterations);
    impl_->it.setTolerance(opts_.residual_tol * 1e-2);
    impl_->itT.setTolerance(opts_.residual_tol * 1e-2);
    impl_->it.compute(A_);
    impl_->itT.compute(At_);
  } else {
    impl_->lu.compute(A_);
    if (impl_->lu.info() != Eigen::Success)
      throw NumericError("factorize: sparse LU failed (" + impl_->lu.lastErrorMessage() + ")");
  }
}

Factorization::~Factorization() = default;

Eigen::VectorXd Factorization::solve_impl(const Eigen::VectorXd& b, bool transpose) const {
  const SparseMatrix& M = transpose ? At_ : A_;
  auto raw = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
    if (opts_.iterative) return transpose ? impl_->itT.solve(rhs) : impl_->it.solve(rhs);
    return transpose ? Eigen::VectorXd(impl_->lu.transpose().solve(rhs)) : Eigen::VectorXd(impl_->lu.solve(rhs));
  };
  if (b.size() != M.rows()) throw NumericError("solve: size mismatch");
  if (b.norm() == 0.0) return Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd x = raw(b);
  double res = relative_residual(M, x, b);
  for (int k = 0; k < 3 && !(res < opts_.residual_tol); ++k) {
    x += raw(residual_vector(M, x, b));
    res = relative_residual(M, x, b);
  }
  if (!(res < opts_.residual_tol))
    throw NumericError("solve: relative residual " + std::to_string(res) + " exceeds the contract");
  return x;
}

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& b) const { return solve_impl(b, false); }
Eigen::VectorXd Factorization::solve_transpose(const Eigen::VectorXd& b) const { return solve_impl(b, true); }

Eigen::MatrixXd Factorization::solve(const Eigen::MatrixXd& B) const {
  Eigen::MatrixXd X(B.rows(), B.cols());
  for (int j = 0; j < B.cols(); ++j) X.col(j) = solve_impl(B.col(j), false);
  return X;
}

Eigen::MatrixXd Factorization::solve_transpose(const Eigen::MatrixXd& B) const {
  Eigen::MatrixXd X(B.rows(), B.cols());
  for (int j = 0; j < B.cols(); ++j) X.col(j) = solve_impl(B.col(j), true);
  return X;
}

Eigen::VectorXd solve_state(const Factorization& fact, const DofMap& dofs, const Eigen::VectorXd& load) {
  return dofs.extend_scalar(fact.solve(dofs.restrict_scalar(load)));
}

Eigen::VectorXd solve_adjoint(const Factorization& fact, const DofMap& dofs, const Eigen::VectorXd& tracking_load) {
  return dofs.extend_scalar(fact.solve_transpose(dofs.restrict_scalar(tracking_load)));
}

AveragedAdjoints solve_averaged_adjoints(const Factorization& fact, const Assembler& as, const SparseMatrix& mass,
                                         const VectorField& V, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                         const DataField& ubar) {
  const DofMap& dofs = as.dofs();
  const ShapeVectors s = as.shape_vectors(V, u, v, ubar);
  AveragedAdjoints r;
  r.phi = dofs.extend_scalar(fact.solve(dofs.restrict_scalar(s.F_test - s.A_u_test)));
  const Eigen::VectorXd rhs = -s.dJ_test - s.A_trial_v - mass * r.phi;
  r.psi = dofs.extend_scalar(fact.solve_transpose(dofs.restrict_scalar(rhs)));
  return r;
}

}  // namespace nlshape
