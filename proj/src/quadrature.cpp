#include "nlshape/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <utility>

namespace nlshape {

namespace {

template <int N>
void gl_fixed(std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& b = G::weights();
  x.clear();
  w.clear();
  // boost stores the nonnegative half; expand to the full symmetric set on [0,1]
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] == 0.0) continue;
    x.push_back(0.5 * (1.0 - a[i]));
    w.push_back(0.5 * b[i]);
  }
  if (a[0] == 0.0) {
    x.push_back(0.5);
    w.push_back(0.5 * b[0]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    x.push_back(0.5 * (1.0 + a[i]));
    w.push_back(0.5 * b[i]);
  }
}

template <int... Ns>
bool gl_dispatch(int n, std::vector<double>& x, std::vector<double>& w, std::integer_sequence<int, Ns...>) {
  return ((n == Ns + 1 ? (gl_fixed<Ns + 1>(x, w), true) : false) || ...);
}

void add_orbit(TriangleRule& r, double a, double wt) {
  // (a, a, 1-2a) and its permutations
  const double b = 1.0 - 2.0 * a;
  r.points.emplace_back(a, a);
  r.points.emplace_back(b, a);
  r.points.emplace_back(a, b);
  for (int k = 0; k < 3; ++k) r.weights.push_back(0.5 * wt);
}

void add_orbit6(TriangleRule& r, double a, double b, double wt) {
  const double c = 1.0 - a - b;
  const double p[6][2] = {{a, b}, {b, a}, {a, c}, {c, a}, {b, c}, {c, b}};
  for (auto& q : p) {
    r.points.emplace_back(q[0], q[1]);
    r.weights.push_back(0.5 * wt);
  }
}

}  // namespace

void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  if (!gl_dispatch(n, x, w, std::make_integer_sequence<int, 24>{}))
    throw InputError("Gauss-Legendre order must be in [1, 24]");
}

TriangleRule symmetric_rule(int degree) {
  TriangleRule r;
  switch (degree) {
    case 1:
      r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
      r.weights.push_back(0.5);
      break;
    case 2:
      add_orbit(r, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 4:
      add_orbit(r, 0.445948490915965, 0.223381589678011);
      add_orbit(r, 0.091576213509771, 0.109951743655322);
      break;
    case 5: {
      const double s = std::sqrt(15.0);
      r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
      r.weights.push_back(0.5 * 9.0 / 40.0);
      add_orbit(r, (6.0 - s) / 21.0, (155.0 - s) / 1200.0);
      add_orbit(r, (6.0 + s) / 21.0, (155.0 + s) / 1200.0);
      break;
    }
    case 6:
      add_orbit(r, 0.249286745170910, 0.116786275726379);
      add_orbit(r, 0.063089014491502, 0.050844906370207);
      add_orbit6(r, 0.053145049844817, 0.310352451033784, 0.082851075618374);
      break;
    default:
      throw InputError("symmetric triangle rule of degree " + std::to_string(degree) + " not available");
  }
  r.degree = degree;
  return r;
}

TriangleRule collapsed_gauss_rule(int n) {
  std::vector<double> x, w;
  gauss_legendre_01(n, x, w);
  TriangleRule r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r.points.emplace_back(x[i], x[j] * (1.0 - x[i]));
      r.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
    }
  r.degree = 2 * n - 2;
  return r;
}

TriangleRule triangle_rule(int degree) {
  if (degree < 1) throw InputError("quadrature degree must be positive");
  if (degree == 3) return symmetric_rule(4);
  if (degree <= 6) return symmetric_rule(degree);
  return collapsed_gauss_rule((degree + 3) / 2);
}

PairRule tensor_pair_rule(const TriangleRule& outer, const TriangleRule& inner) {
  PairRule p;
  for (std::size_t i = 0; i < outer.size(); ++i)
    for (std::size_t j = 0; j < inner.size(); ++j) {
      p.x.push_back(outer.points[i]);
      p.y.push_back(inner.points[j]);
      p.weights.push_back(outer.weights[i] * inner.weights[j]);
    }
  return p;
}

namespace {

// Maps from [0,1]^4 to pairs of points in the reference triangle.
void map_identical(double k, double e1, double e2, double e3, int s, Vec2& x, Vec2& y, double& jac) {
  jac = k * k * k * e1 * e1 * e2;
  switch (s) {
    case 0:
      x = {k * e1 * (1 - e2), k * (1 - e1 * (1 - e2))};
      y = {k * e1 * (1 - e2 * e3), k * (1 - e1)};
      break;
    case 1:
      x = {k * e1 * (1 - e2 * e3), k * (1 - e1)};
      y = {k * e1 * (1 - e2), k * (1 - e1 * (1 - e2))};
      break;
    case 2:
      x = {k * (1 - e1 * (1 - e2 * (1 - e3))), k * e1 * (1 - e2 * (1 - e3))};
      y = {k * (1 - e1), k * e1 * (1 - e2)};
      break;
    case 3:
      x = {k * (1 - e1), k * e1 * (1 - e2)};
      y = {k * (1 - e1 * (1 - e2 * (1 - e3))), k * e1 * (1 - e2 * (1 - e3))};
      break;
    case 4:
      x = {k * (1 - e1), k * e1 * (1 - e2 * e3)};
      y = {k * (1 - e1 * (1 - e2)), k * e1 * (1 - e2)};
      break;
    default:
      x = {k * (1 - e1 * (1 - e2)), k * e1 * (1 - e2)};
      y = {k * (1 - e1), k * e1 * (1 - e2 * e3)};
      break;
  }
}

void map_edge(double k, double e1, double e2, double e3, int s, Vec2& x, Vec2& y, double& jac) {
  jac = k * k * k * e1 * e1;
  switch (s) {
    case 0:
      x = {k * (1 - e1 * e3), k * e1 * e3};
      y = {k * (1 - e1), k * e1 * (1 - e2)};
      break;
    case 1:
      x = {k * (1 - e1), k * e1};
      y = {k * (1 - e1 * e2), k * e1 * e2 * (1 - e3)};
      jac *= e2;
      break;
    case 2:
      x = {k * (1 - e1), k * e1 * (1 - e2)};
      y = {k * (1 - e1 * e2 * e3), k * e1 * e2 * e3};
      jac *= e2;
      break;
    case 3:
      x = {k * (1 - e1 * e2), k * e1 * e2 * (1 - e3)};
      y = {k * (1 - e1), k * e1};
      jac *= e2;
      break;
    default:
      x = {k * (1 - e1), k * e1 * (1 - e2 * e3)};
      y = {k * (1 - e1 * e2), k * e1 * e2};
      jac *= e2;
      break;
  }
}

void map_vertex(double k, double e1, double e2, double e3, int s, Vec2& x, Vec2& y, double& jac) {
  jac = k * k * k * e2;
  if (s == 0) {
    x = {k * (1 - e1), k * e1};
    y = {k * e2 * (1 - e3), k * e2 * e3};
  } else {
    x = {k * e2 * (1 - e3), k * e2 * e3};
    y = {k * (1 - e1), k * e1};
  }
}

}  // namespace

PairRule duffy_pair_rule(Touch touch, int n) {
  if (touch == Touch::None) throw InputError("duffy_pair_rule needs a touching configuration");
  std::vector<double> g, w;
  gauss_legendre_01(n, g, w);
  const int pieces = touch == Touch::Identical ? 6 : (touch == Touch::Edge ? 5 : 2);
  auto map = touch == Touch::Identical ? map_identical : (touch == Touch::Edge ? map_edge : map_vertex);
  PairRule p;
  p.x.reserve(pieces * n * n * n * n);
  for (int s = 0; s < pieces; ++s)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            Vec2 x, y;
            double jac;
            map(g[a], g[b], g[c], g[d], s, x, y, jac);
            p.x.push_back(x);
            p.y.push_back(y);
            p.weights.push_back(w[a] * w[b] * w[c] * w[d] * jac);
          }
  return p;
}

PairRule swapped(const PairRule& rule) {
  PairRule r;
  r.x = rule.y;
  r.y = rule.x;
  r.weights = rule.weights;
  return r;
}

}  // namespace nlshape
