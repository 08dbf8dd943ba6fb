#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "nlshape/mesh.hpp"
#include "nlshape/quadrature.hpp"

namespace nlshape {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

// Affine P1 element: x = p0 + J * ref.
struct Element {
  std::array<Vec2, 3> p;
  Mat2 J;
  double det;                 // 2 * area
  std::array<Vec2, 3> grad;   // hat-function gradients
  Vec2 map(const Vec2& ref) const { return p[0] + J * ref; }
};
Element make_element(const Mesh& mesh, int t);
inline Bary bary_of(const Vec2& ref) { return {1.0 - ref.x() - ref.y(), ref.x(), ref.y()}; }

struct FieldValue {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
};

// Data field evaluated at a quadrature point: triangle index and barycentric
// coordinates on the mesh being assembled, plus the physical point.
class DataField {
 public:
  virtual ~DataField() = default;
  virtual FieldValue eval(int tri, const Bary& b, const Vec2& x) const = 0;
};

class AnalyticField final : public DataField {
 public:
  explicit AnalyticField(std::function<FieldValue(const Vec2&)> fn) : fn_(std::move(fn)) {}
  FieldValue eval(int, const Bary&, const Vec2& x) const override { return fn_(x); }

 private:
  std::function<FieldValue(const Vec2&)> fn_;
};

// c0 + cx x + cy y + cxx x^2 + cxy x y + cyy y^2
AnalyticField quadratic_field(const std::array<double, 6>& c);

// P1 field on a fixed mesh; gradient and Hessian are recovered nodal fields
// (area-weighted averaging of elementwise gradients, applied twice).
class NodalField final : public DataField {
 public:
  NodalField(const Mesh& mesh, Eigen::VectorXd values);
  FieldValue eval(int tri, const Bary& b, const Vec2& x) const override;
  const Eigen::VectorXd& values() const { return values_; }

 private:
  std::vector<std::array<int, 3>> tris_;
  Eigen::VectorXd values_;
  Eigen::MatrixX2d grad_;
  Eigen::MatrixX4d hess_;
};

// Nodal average of elementwise gradients of a P1 field.
Eigen::MatrixX2d recover_gradient(const Mesh& mesh, const Eigen::VectorXd& values);

// Region-wise forcing with value, gradient and Hessian.
struct Forcing {
  std::function<FieldValue(Region, const Vec2&)> fn;
  FieldValue eval(Region r, const Vec2& x) const { return fn ? fn(r, x) : FieldValue{}; }
};
Forcing piecewise_forcing(double f1, double f2);

// Maps mesh nodes to unconstrained scalar unknowns.
struct DofMap {
  std::vector<int> free_index;  // -1 for constrained nodes
  std::vector<int> free_nodes;
  int num_free() const { return static_cast<int>(free_nodes.size()); }
  static DofMap from_mesh(const Mesh& mesh);
  Eigen::VectorXd restrict_scalar(const Eigen::VectorXd& nodal) const;
  Eigen::VectorXd extend_scalar(const Eigen::VectorXd& free) const;
  // vector dofs: 2 * free_index + component
  Eigen::VectorXd restrict_vector(const VectorField& nodal) const;
  VectorField extend_vector(const Eigen::VectorXd& free) const;
  SparseMatrix restrict_matrix(const SparseMatrix& full) const;
};

// Triangle lookup by point with a small snapping tolerance.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  // Returns triangle and barycentrics; points within tol of a triangle are
  // snapped onto it.  Empty if no triangle is close enough.
  std::optional<std::pair<int, Bary>> locate(const Vec2& x, double tol = 1e-10) const;

 private:
  const Mesh* mesh_;
  Vec2 lo_;
  double cell_;
  int nx_, ny_;
  std::vector<std::vector<int>> cells_;
};

// u-bar stored on its own (target) mesh.
struct TargetData {
  Mesh mesh;
  Eigen::VectorXd values;
};
// Nodal interpolation onto another mesh by point location.  Throws
// InputError when a node lies outside the source mesh.
Eigen::VectorXd interpolate_nodal(const TargetData& data, const Mesh& onto);

// Scalar P1 mass matrix over Omega (all nodes).
SparseMatrix assemble_mass(const Mesh& mesh);
// Vector P1 mass and Jacobian-Frobenius stiffness over Omega u I on free vector dofs.
SparseMatrix assemble_vector_mass(const Mesh& mesh, const DofMap& dofs);
SparseMatrix assemble_vector_stiffness(const Mesh& mesh, const DofMap& dofs);

}  // namespace nlshape
