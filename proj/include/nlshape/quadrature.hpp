#pragma once

#include <vector>

#include "nlshape/types.hpp"

namespace nlshape {

// Points on the reference triangle (0,0), (1,0), (0,1); weights sum to 1/2.
struct TriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;
  std::size_t size() const { return weights.size(); }
};

// Fully symmetric rules of exact degree 1, 2, 4, 5 or 6.
TriangleRule symmetric_rule(int degree);
// Conical (collapsed) Gauss product rule with n x n points, exact up to degree 2n-2.
TriangleRule collapsed_gauss_rule(int n);
// Symmetric rule for degree <= 6, collapsed Gauss rule beyond.
TriangleRule triangle_rule(int degree);
// Gauss-Legendre nodes/weights on [0, 1].
void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w);

enum class Touch { None = 0, Vertex = 1, Edge = 2, Identical = 3 };

// Rule on T_ref x T_ref; weights sum to 1/4.
struct PairRule {
  std::vector<Vec2> x, y;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

PairRule tensor_pair_rule(const TriangleRule& outer, const TriangleRule& inner);

// Duffy-type subdivisions of the 4D pair domain that remove the diagonal
// singularity.  Vertex conventions: Identical uses the same local order in
// both triangles; Edge puts the shared edge on (0,0)-(1,0) of both;
// Vertex puts the shared vertex at (0,0) of both.  n Gauss points per axis.
PairRule duffy_pair_rule(Touch touch, int n);

PairRule swapped(const PairRule& rule);

}  // namespace nlshape
