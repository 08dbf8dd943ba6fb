#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlshape/shapecalc.hpp"

namespace nlshape {

// Ground-truth map mesh -> J = int (u - ubar)^2 + nu |Gamma|: assemble, solve, evaluate.
// With horizon_ref the interaction indicator is taken on that mesh (see for_each_pair).
double reduced_functional(const Mesh& mesh, const Problem& problem, const DataField& ubar,
                          const SolverOptions& solver = {}, const Mesh* horizon_ref = nullptr);

struct FdRow {
  double t, fd, assembled, rel_err;  // rel_err is NaN when the step inverts an element
};
struct FdTable {
  std::string label;
  std::vector<FdRow> rows;
  double best_rel_err() const;
};

struct FdOptions {
  std::vector<double> t_list{1e-2, 1e-3, 1e-4};
  bool carry_horizon = false;  // evaluate the indicator on the undeformed mesh
  SolverOptions solver;
};

// Central differences of the reduced functional along x + tV versus g . V.
FdTable fd_first(const Mesh& mesh, const Problem& problem, const DataField& ubar, const VectorField& V,
                 double assembled, const FdOptions& opt = {});
// Second central difference along x + tV versus J''[V, V].
FdTable fd_second(const Mesh& mesh, const Problem& problem, const DataField& ubar, const VectorField& V,
                  double assembled, const FdOptions& opt = {});
// 1/4 (FD2[V + W] - FD2[V - W]) versus J''[V, W].
FdTable fd_polarization(const Mesh& mesh, const Problem& problem, const DataField& ubar, const VectorField& V,
                        const VectorField& W, double assembled, const FdOptions& opt = {});
// A vector field given in space, sampled at mesh nodes.
using SpatialField = std::function<Vec2(const Vec2&)>;
// Nodal samples of F, zero on constrained nodes.
VectorField sample_field(const Mesh& mesh, const SpatialField& F);
// x -> a + Bx with random a, B (B not symmetric), entries in [-1, 1].
SpatialField random_affine_field(unsigned seed);

// Central difference of t -> DJ(x + tW)[V] with V a fixed spatial field,
// sampled on the deformed mesh, versus J''[V, W] + DJ[DV W].  The discrete
// identity is exact when V is affine on the elements where W is nonzero.
FdTable fd_structure(const Mesh& mesh, const Problem& problem, const DataField& ubar, const SpatialField& V,
                     const VectorField& W, double assembled, const FdOptions& opt = {});
// CSV with header t,fd,assembled,rel_err
void write_fd_csv(const std::string& path, const std::vector<FdTable>& tables);

struct NormReport {
  int dofs = 0;
  double coercivity = 0;         // smallest eigenvalue of the symmetric part of K
  double l2_lower = 0, l2_upper = 0;  // extremes of A(u,u) / ||u||^2_{L2}
  double sample_lower = 0, sample_upper = 0;  // same over random samples
  bool singular = false;
  double hs_lower = 0, hs_upper = 0;  // extremes of A(u,u) / |u|^2_{H^s} (singular class)
  int samples = 0;
};
NormReport norm_checks(const Mesh& mesh, const Problem& problem, int samples = 20, unsigned seed = 1);

// Random field with uniform [-1, 1] components on the interface nodes, scaled
// to unit maximum nodal length.
VectorField random_interface_field(const Mesh& mesh, const InterfaceDofs& idofs, unsigned seed);

}  // namespace nlshape
