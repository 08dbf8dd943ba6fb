#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlshape/kernel.hpp"

using namespace nlshape;

namespace {

PointPairContext pair_at(Vec2 x, Vec2 y, Region rx = Region::Omega1, Region ry = Region::Omega1) {
  PointPairContext c;
  c.x = x;
  c.y = y;
  c.region_x = rx;
  c.region_y = ry;
  return c;
}

// Affine fields V(z) = a + B z and W(z) = c + D z evaluated into a context.
struct Affine {
  Vec2 a;
  Mat2 B;
  Vec2 at(const Vec2& z) const { return a + B * z; }
};

void fill(PointPairContext& c, const Affine& V, const Affine& W) {
  c.V_x = V.at(c.x);
  c.V_y = V.at(c.y);
  c.W_x = W.at(c.x);
  c.W_y = W.at(c.y);
  c.DV_x = c.DV_y = V.B;
  c.DW_x = c.DW_y = W.B;
  c.divV_x = c.divV_y = V.B.trace();
  c.divW_x = c.divW_y = W.B.trace();
  c.divDVW_x = c.divDVW_y = (V.B * W.B).trace();
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("gamma1 preset values") {
  const KernelSpec k = preset_gamma1();
  CHECK(k.normalizer == doctest::Approx(1e4));
  CHECK(kernel_eval(k, pair_at({0, 0}, {0.05, 0})) == doctest::Approx(1e3));
  CHECK(kernel_eval(k, pair_at({0, 0}, {0.2, 0})) == 0.0);
  const KernelGrad g = kernel_grad(k, pair_at({0.1, 0.3}, {0.13, 0.28}));
  CHECK(g.gx.norm() == 0.0);
  CHECK(g.gy.norm() == 0.0);
  const KernelHessian h = kernel_hessian(k, pair_at({0.1, 0.3}, {0.13, 0.28}));
  CHECK(h.xx.norm() + h.xy.norm() + h.yx.norm() + h.yy.norm() == 0.0);
}

TEST_CASE("gamma2 preset value and gradient") {
  const KernelSpec k = preset_gamma2(0.5);
  CHECK(k.normalizer == doctest::Approx(1.0 / (0.001 * std::numbers::pi)));
  const PointPairContext c = pair_at({0, 0}, {0.05, 0});
  const double g = kernel_eval(k, c);
  CHECK(g == doctest::Approx(2.546e7).epsilon(1e-3));
  CHECK(g == doctest::Approx(10.0 * k.normalizer / (0.05 * 0.05 * 0.05)).epsilon(1e-14));
  const KernelGrad G = kernel_grad(k, c);
  CHECK(G.gx.x() == doctest::Approx(60.0 * g).epsilon(1e-14));
  CHECK(G.gx.x() == doctest::Approx(1.527e9).epsilon(1e-3));
  CHECK(G.gx.y() == 0.0);
  CHECK_THROWS_AS(kernel_eval(k, pair_at({0.2, 0.2}, {0.2, 0.2})), NumericError);
}

TEST_CASE("singular kernel: symmetry, antisymmetry and block relations") {
  const KernelSpec k = preset_gamma2(0.5);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-0.04, 0.04);
  for (int i = 0; i < 20; ++i) {
    const Vec2 x(0.4 + U(rng), 0.5 + U(rng)), y(0.45 + U(rng), 0.48 + U(rng));
    for (Region rx : {Region::Omega1, Region::Omega2})
      for (Region ry : {Region::Omega1, Region::Omega2, Region::Interaction}) {
        const PointPairContext c = pair_at(x, y, rx, ry);
        if (ry != Region::Interaction) CHECK(kernel_eval(k, c) == kernel_eval(k, c.swapped()));
        const KernelGrad G = kernel_grad(k, c);
        CHECK((G.gx + G.gy).norm() == 0.0);
        const KernelHessian H = kernel_hessian(k, c);
        CHECK((H.xy + H.xx).norm() == 0.0);
        CHECK((H.yx + H.xx).norm() == 0.0);
        CHECK((H.yy - H.xx).norm() == 0.0);
      }
  }
}

TEST_CASE("kernel bounds inside the horizon") {
  KernelSpec k = preset_gamma2(0.3);
  k.sigma11 = 0.5;
  k.sigma12 = k.sigma21 = 2.0;
  const double lo = 0.5 * k.normalizer, hi = 10.0 * k.normalizer;
  for (Region rx : {Region::Omega1, Region::Omega2})
    for (Region ry : {Region::Omega1, Region::Omega2, Region::Interaction}) {
      const PointPairContext c = pair_at({0.3, 0.3}, {0.33, 0.32}, rx, ry);
      const double scaled = kernel_eval(k, c) * std::pow((c.x - c.y).norm(), k.exponent());
      CHECK(scaled >= lo * (1 - 1e-14));
      CHECK(scaled <= hi * (1 + 1e-14));
    }
}

TEST_CASE("finite differences of gradient and Hessian") {
  const KernelSpec k = preset_gamma2(0.4);
  const Vec2 x(0.31, 0.52), y(0.34, 0.49);
  const double h = 1e-7;
  for (int d = 0; d < 2; ++d) {
    const Vec2 e = Vec2::Unit(d);
    const double fd = (kernel_eval(k, pair_at(x + h * e, y)) - kernel_eval(k, pair_at(x - h * e, y))) / (2 * h);
    const Vec2 gx = kernel_grad(k, pair_at(x, y)).gx;
    CHECK(fd == doctest::Approx(gx[d]).epsilon(1e-6));
    const Vec2 dg = (kernel_grad(k, pair_at(x + h * e, y)).gx - kernel_grad(k, pair_at(x - h * e, y)).gx) / (2 * h);
    const Mat2 H = kernel_hessian(k, pair_at(x, y)).xx;
    CHECK((dg - H.col(d)).norm() / H.norm() < 1e-6);
  }
}

TEST_CASE("psi terms") {
  SUBCASE("zero field") {
    const PsiTerms p = psi_terms(preset_gamma2(0.5), pair_at({0.3, 0.3}, {0.33, 0.32}));
    CHECK(p.psi1_xy == 0.0);
    CHECK(p.psi1_yx == 0.0);
    CHECK(p.psi2_xy == 0.0);
    CHECK(p.psi2_yx == 0.0);
  }
  SUBCASE("integrable kernel: only the divergence part") {
    PointPairContext c = pair_at({0.3, 0.3}, {0.33, 0.32});
    const KernelSpec k = preset_gamma1();
    fill(c, {{0.1, 0.2}, Mat2{{0.3, 0.1}, {-0.2, 0.5}}}, {{0, 0}, Mat2::Zero()});
    const PsiTerms p = psi_terms(k, c);
    CHECK(p.psi1_xy == 0.0);
    CHECK(p.psi2_xy == doctest::Approx(kernel_eval(k, c) * 1.6));
  }
  SUBCASE("translation has no gradient part") {
    PointPairContext c = pair_at({0.3, 0.3}, {0.33, 0.32});
    fill(c, {{0.1, -0.2}, Mat2::Zero()}, {{0, 0}, Mat2::Zero()});
    const KernelSpec k = preset_gamma2(0.5);
    const PsiTerms p = psi_terms(k, c);
    const double scale = kernel_grad(k, c).gx.norm() * c.V_x.norm();
    CHECK(std::abs(p.psi1_xy) <= 1e-14 * scale);
    CHECK(std::abs(p.psi1_yx) <= 1e-14 * scale);
  }
}

TEST_CASE("t terms") {
  const Affine V{{0.1, -0.2}, Mat2{{0.3, 0.1}, {-0.2, 0.5}}};
  const Affine W{{-0.05, 0.15}, Mat2{{0.2, -0.4}, {0.1, 0.25}}};
  SUBCASE("zero W") {
    PointPairContext c = pair_at({0.3, 0.3}, {0.33, 0.32});
    fill(c, V, {{0, 0}, Mat2::Zero()});
    const TTerms t = t_terms(preset_gamma2(0.5), c);
    CHECK(t.t11_xy == 0.0);
    CHECK(t.t21_xy == 0.0);
    CHECK(t.t12_xy == 0.0);
    CHECK(t.t22_yx == 0.0);
  }
  SUBCASE("integrable kernel") {
    PointPairContext c = pair_at({0.3, 0.3}, {0.33, 0.32});
    fill(c, V, W);
    const KernelSpec k = preset_gamma1();
    const TTerms t = t_terms(k, c);
    CHECK(t.t11_xy == 0.0);
    CHECK(t.t21_xy == 0.0);
    CHECK(t.t12_xy == doctest::Approx(-kernel_eval(k, c) * 2.0 * (V.B * W.B).trace()));
  }
  SUBCASE("gradient of psi1 along W equals T11 + T21") {
    const KernelSpec k = preset_gamma2(0.5);
    const Vec2 x(0.3, 0.3), y(0.33, 0.32);
    auto psi1 = [&](double t) {
      PointPairContext c = pair_at(x + t * W.at(x), y + t * W.at(y));
      // V is a fixed spatial field, evaluated at the moved points
      c.V_x = V.at(c.x);
      c.V_y = V.at(c.y);
      return psi_terms(k, c);
    };
    const double h = 1e-6;
    const PsiTerms p = psi1(h), m = psi1(-h);
    PointPairContext c = pair_at(x, y);
    fill(c, V, W);
    const TTerms t = t_terms(k, c);
    const double fd_xy = (p.psi1_xy - m.psi1_xy) / (2 * h), fd_yx = (p.psi1_yx - m.psi1_yx) / (2 * h);
    CHECK(fd_xy == doctest::Approx(t.t11_xy + t.t21_xy).epsilon(1e-6));
    CHECK(fd_yx == doctest::Approx(t.t11_yx + t.t21_yx).epsilon(1e-6));
  }
}

TEST_CASE("batched radial factor: SIMD and scalar agree") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-0.12, 0.12);
  const std::size_t n = 1003;
  std::vector<double> dx(n), dy(n), a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] = U(rng);
    dy[i] = U(rng);
  }
  for (const KernelSpec& k : {preset_gamma1(), preset_gamma2(0.5), preset_gamma2(0.3)}) {
    radial_factor_scalar(k, n, dx.data(), dy.data(), a.data());
    radial_factor(k, n, dx.data(), dy.data(), b.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-15));
  }
  set_simd_enabled(false);
  CHECK_FALSE(simd_active(preset_gamma2(0.5)));
  set_simd_enabled(true);
  if (cpu_has_avx2()) CHECK(simd_active(preset_gamma2(0.5)));
}

TEST_CASE("spec validation") {
  KernelSpec k = preset_gamma2(0.5);
  CHECK_NOTHROW(k.validate());
  k.sigma12 = 2.0;
  CHECK_THROWS_AS(k.validate(), InputError);
  k = preset_gamma2(0.5);
  k.s = 1.0;
  CHECK_THROWS_AS(k.validate(), InputError);
  k = preset_gamma1();
  k.sigma1I = -0.1;
  CHECK_THROWS_AS(k.validate(), InputError);
  k = preset_gamma1();
  k.delta = 0;
  CHECK_THROWS_AS(k.validate(), InputError);
}

}  // TEST_SUITE
