#pragma once

#include "nlshape/assembly.hpp"

namespace nlshape {

// Brute-force reference assembly: loops over all ordered triangle pairs and
// evaluates the integrands pointwise through the kernel module (kernel_eval,
// psi_terms, t_terms).  Dense output; meant for meshes of a few triangles.
class DenseOracle {
 public:
  DenseOracle(const Mesh& mesh, const Problem& problem, const QuadratureOptions& quad);

  Eigen::MatrixXd stiffness_full() const;
  Eigen::VectorXd load() const;
  Eigen::VectorXd tracking_load(const Eigen::VectorXd& u, const DataField& ubar) const;
  double tracking(const Eigen::VectorXd& u, const DataField& ubar) const;
  ShapeResiduals shape_residuals(const VectorField& V, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                 const DataField& ubar) const;
  SecondOrderScalars second_order(const VectorField& V, const VectorField& W, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v, const Eigen::VectorXd& psi, const Eigen::VectorXd& phi,
                                  const DataField& ubar) const;
  // vector mass + Jacobian-Frobenius stiffness over all vector dofs
  Eigen::MatrixXd regularizer_full() const;

 private:
  struct Point {
    int tri;
    Bary b;
    Vec2 x;
    double w;
  };
  std::vector<Point> single_points(int t) const;
  // calls fn(x point, y point, weight) over the ordered pair (s, t)
  template <class Fn>
  void pair_points(int s, int t, Fn&& fn) const;

  const Mesh* mesh_;
  Problem problem_;
  QuadratureOptions quad_;
};

}  // namespace nlshape
