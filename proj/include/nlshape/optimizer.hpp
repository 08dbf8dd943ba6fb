#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlshape/shapecalc.hpp"

namespace nlshape {

// Where a mesh comes from: a file, or the box generator with a level-set interface.
struct MeshSource {
  std::string path;  // empty -> generated
  MeshFormat format = MeshFormat::Native;
  RegionMap regions;
  BoxMeshSpec box;
  std::string shape = "circle";  // circle | square | ellipse
  Vec2 center{0.5, 0.5};
  double radius = 0.25;      // circle
  double half_width = 0.15;  // square
  double ax = 0.3, ay = 0.18;  // ellipse
};
Mesh build_mesh(const MeshSource& src);
LevelSet shape_level_set(const MeshSource& src);

struct RunConfig {
  Problem problem;
  double f1 = 10.0, f2 = -10.0;
  double epsilon = 0.3;
  int maxiter = 50;
  double tol = 5e-5;
  int max_halvings = 5;
  SolverOptions solver;
  MeshSource initial, target;
  std::string data_path;  // precomputed u-bar file; empty -> generate from target
  // Treatment of negative curvature in the shape Hessian: "none" keeps H as
  // assembled, "clip" zeroes its negative eigenvalues, "abs" flips their sign.
  std::string hessian_projection = "none";
  std::string output_dir = "out";
  bool write_vtk = true;
  void validate() const;  // throws InputError
};

struct HistoryRecord {
  int iter;
  double J;
  double defnorm;  // ||W||_{L2} of the computed step
  double walltime;
  std::string mesh_file;  // relative to the output directory, empty if not written
  int halvings = 0;
  int clipped = 0;  // negative Hessian eigenvalues removed by the projection
};
struct RunHistory {
  std::vector<HistoryRecord> records;
  bool converged = false;
  int total_halvings = 0;
  Mesh final_mesh;
};

// Nonlocal state on the target configuration.
TargetData generate_data(const Mesh& target, const Problem& problem, const SolverOptions& solver = {});
// Nodal interpolant of u-bar on the current mesh with recovered derivatives.
NodalField interpolate_data(const TargetData& data, const Mesh& mesh);

struct NewtonStep {
  Eigen::VectorXd W;  // free vector dofs
  double residual = 0;        // |S W + g| / |g|
  double backward_error = 0;  // componentwise, see newton_step
};
// Solves (H_pad + eps R) W = -g on the free vector dofs, H zero-padded off the
// interface, by sparse LDL^T.  NumericError if the system is not positive definite.
NewtonStep newton_step(const DerivativeBundle& bundle, double epsilon);
// Replaces bundle.hess by its positive semidefinite part; returns the number of
// negative eigenvalues that were set to zero.
int clip_hessian(DerivativeBundle& bundle, bool mirror = false);
double l2_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& W);

using IterationHook = std::function<void(const HistoryRecord&)>;
RunHistory run(const RunConfig& cfg, const IterationHook& hook = {});

// Two-sided Hausdorff distance between the discrete interface and a circle.
double hausdorff_to_circle(const Mesh& mesh, Vec2 center, double radius);

}  // namespace nlshape
