#pragma once

#include <functional>
#include <vector>

#include "nlshape/kernel.hpp"
#include "nlshape/mesh.hpp"
#include "nlshape/quadrature.hpp"
#include "nlshape/fem.hpp"

namespace nlshape {

struct QuadratureOptions {
  int pair_degree = 5;    // tensor rule per triangle for separated pairs
  int duffy_order = 4;    // Gauss points per axis in the touching-pair rules
  int single_degree = 6;  // single-triangle integrals
};

// For each triangle T, the triangles T' >= T within distance delta of it.
// Pairs of two interaction-domain triangles are omitted.
struct PairCandidates {
  std::vector<std::vector<int>> partners;
  std::size_t num_pairs() const;
};
PairCandidates find_pair_candidates(const Mesh& mesh, double delta);

// Quadrature data of one unordered triangle pair (T, T'), x in T and y in T'.
// Weights already contain the Jacobians and the pair multiplicity
// (1/2 for T == T', 1 otherwise), so that summing w * I(x, y) for an
// integrand symmetric under x <-> y yields 1/2 of its integral over the
// full product domain.
struct PairBlock {
  static constexpr int kMaxNodes = 6;
  int T = -1, Tp = -1;
  Touch touch = Touch::None;
  Region rx = Region::Omega1, ry = Region::Omega1;
  double cxy = 0, cyx = 0;  // sigma * normalizer for gamma(x, y) and gamma(y, x)
  int nloc = 0;
  std::array<int, kMaxNodes> node{};
  std::array<Vec2, kMaxNodes> gradx{}, grady{};  // hat gradients on T and T'
  std::size_t npts = 0;
  std::vector<Vec2> x, y;
  std::vector<double> w, rho;          // rho = chi * radial factor
  std::vector<double> phix, phiy;      // hat values, index q * kMaxNodes + k

  double phi_x(std::size_t q, int k) const { return phix[q * kMaxNodes + k]; }
  double phi_y(std::size_t q, int k) const { return phiy[q * kMaxNodes + k]; }
  // nodal field values at the quadrature points
  double at_x(const Eigen::VectorXd& f, std::size_t q) const;
  double at_y(const Eigen::VectorXd& f, std::size_t q) const;
};

// Number of accumulator slots a visitor needs (one per worker block).
int pair_block_count();

// Visits every candidate pair in parallel; visit(block, pair) is called with
// block in [0, pair_block_count()).  Pairs for which want(T, T') is false are
// skipped before any quadrature work.  If horizon_ref is given (a mesh with
// the same connectivity), the indicator |x - y| < delta is evaluated at the
// corresponding points of that mesh instead, i.e. the horizon is carried
// along with the deformation.
void for_each_pair(const Mesh& mesh, const KernelSpec& spec, const QuadratureOptions& quad,
                   const PairCandidates& cand, const std::function<bool(int, int)>& want,
                   const std::function<void(int, const PairBlock&)>& visit, const Mesh* horizon_ref = nullptr);

}  // namespace nlshape
