#include "nlshape/kernel.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

namespace nlshape {

double KernelSpec::sigma(Region rx, Region ry) const {
  using R = Region;
  if (rx == R::Interaction && ry == R::Interaction) return 0.0;
  if (rx == R::Interaction) std::swap(rx, ry);
  if (ry == R::Interaction) return rx == R::Omega1 ? sigma1I : sigma2I;
  if (rx == R::Omega1) return ry == R::Omega1 ? sigma11 : sigma12;
  return ry == R::Omega1 ? sigma21 : sigma22;
}

void KernelSpec::validate() const {
  if (!(delta > 0) || !std::isfinite(delta)) throw InputError("kernel: delta must be positive");
  if (!(normalizer > 0) || !std::isfinite(normalizer)) throw InputError("kernel: normalizer must be positive");
  for (double c : {sigma11, sigma12, sigma21, sigma22, sigma1I, sigma2I})
    if (!(c > 0) || !std::isfinite(c)) throw InputError("kernel: region coefficients must be positive");
  if (kind == KernelClass::SingularSymmetric) {
    if (!(s > 0 && s < 1)) throw InputError("kernel: s must lie in (0, 1)");
    if (sigma12 != sigma21) throw InputError("kernel: singular symmetric class needs sigma12 == sigma21");
  }
}

double default_normalizer(KernelClass kind, double delta, double s) {
  if (kind == KernelClass::Integrable) return 1.0 / std::pow(delta, 4);
  return (2.0 - 2.0 * s) / (std::numbers::pi * std::pow(delta, 2.0 + 2.0 * s));
}

KernelSpec preset_gamma1() {
  KernelSpec k;
  k.kind = KernelClass::Integrable;
  k.delta = 0.1;
  k.normalizer = default_normalizer(k.kind, k.delta, 0.0);
  k.sigma11 = 0.1;
  k.sigma22 = 10.0;
  k.sigma12 = k.sigma21 = k.sigma1I = k.sigma2I = 1.0;
  return k;
}

KernelSpec preset_gamma2(double s) {
  KernelSpec k;
  k.kind = KernelClass::SingularSymmetric;
  k.delta = 0.1;
  k.s = s;
  k.normalizer = default_normalizer(k.kind, k.delta, s);
  k.sigma11 = 10.0;
  k.sigma22 = 1.0;
  k.sigma12 = k.sigma21 = k.sigma1I = k.sigma2I = 5.0;
  return k;
}

PointPairContext PointPairContext::swapped() const {
  PointPairContext c = *this;
  std::swap(c.x, c.y);
  std::swap(c.region_x, c.region_y);
  std::swap(c.V_x, c.V_y);
  std::swap(c.W_x, c.W_y);
  std::swap(c.divV_x, c.divV_y);
  std::swap(c.divW_x, c.divW_y);
  std::swap(c.DV_x, c.DV_y);
  std::swap(c.DW_x, c.DW_y);
  std::swap(c.divDVW_x, c.divDVW_y);
  return c;
}

double kernel_eval(const KernelSpec& spec, const PointPairContext& ctx) {
  const Vec2 d = ctx.x - ctx.y;
  if (spec.singular() && d.squaredNorm() == 0.0)
    throw NumericError("singular kernel evaluated at x == y");
  double rho;
  radial_factor_scalar(spec, 1, &d.x(), &d.y(), &rho);
  return spec.sigma(ctx.region_x, ctx.region_y) * spec.normalizer * rho;
}

KernelGrad kernel_grad(const KernelSpec& spec, const PointPairContext& ctx) {
  const double g = kernel_eval(spec, ctx);
  if (!spec.singular()) return {Vec2::Zero(), Vec2::Zero()};
  const Vec2 d = ctx.x - ctx.y;
  const Vec2 gx = -spec.exponent() * g * d / d.squaredNorm();
  return {gx, -gx};
}

KernelHessian kernel_hessian(const KernelSpec& spec, const PointPairContext& ctx) {
  const double g = kernel_eval(spec, ctx);
  if (!spec.singular()) return {Mat2::Zero(), Mat2::Zero(), Mat2::Zero(), Mat2::Zero()};
  const Vec2 d = ctx.x - ctx.y;
  const double r2 = d.squaredNorm(), e = spec.exponent();
  const double c1 = -e, c2 = 2.0 * e + e * e;
  const Mat2 xx = c1 * g * Mat2::Identity() / r2 + c2 * g * (d * d.transpose()) / (r2 * r2);
  return {xx, -xx, -xx, xx};
}

namespace {

struct OneSided {
  double psi1, psi2, t11, t21, t12, t22;
};

OneSided one_side(const KernelSpec& spec, const PointPairContext& c) {
  const double g = kernel_eval(spec, c);
  const KernelGrad G = kernel_grad(spec, c);
  const KernelHessian H = kernel_hessian(spec, c);
  OneSided o;
  o.psi1 = G.gx.dot(c.V_x) + G.gy.dot(c.V_y);
  o.psi2 = g * (c.divV_x + c.divV_y);
  o.t11 = c.V_x.dot(H.xx * c.W_x) + c.V_x.dot(H.xy * c.W_y) + c.V_y.dot(H.yx * c.W_x) + c.V_y.dot(H.yy * c.W_y);
  o.t21 = G.gx.dot(c.DV_x * c.W_x) + G.gy.dot(c.DV_y * c.W_y);
  o.t12 = (c.divV_x + c.divV_y) * (G.gx.dot(c.W_x) + G.gy.dot(c.W_y)) -
          g * ((c.DV_x * c.DW_x).trace() + (c.DV_y * c.DW_y).trace());
  o.t22 = g * (c.divDVW_x + c.divDVW_y);
  return o;
}

}  // namespace

PsiTerms psi_terms(const KernelSpec& spec, const PointPairContext& ctx) {
  const OneSided a = one_side(spec, ctx), b = one_side(spec, ctx.swapped());
  return {a.psi1, b.psi1, a.psi2, b.psi2};
}

TTerms t_terms(const KernelSpec& spec, const PointPairContext& ctx) {
  const OneSided a = one_side(spec, ctx), b = one_side(spec, ctx.swapped());
  return {a.t11, b.t11, a.t21, b.t21, a.t12, b.t12, a.t22, b.t22};
}

// ---- radial factor dispatch ----

namespace {
std::atomic<bool> g_simd_enabled{true};
}

void set_simd_enabled(bool enabled) { g_simd_enabled = enabled; }

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

bool simd_active(const KernelSpec& spec) {
#ifdef NLSHAPE_HAVE_AVX2
  static const bool has = cpu_has_avx2();
  return has && g_simd_enabled && (!spec.singular() || spec.s == 0.5);
#else
  (void)spec;
  return false;
#endif
}

void radial_factor(const KernelSpec& spec, std::size_t n, const double* dx, const double* dy, double* out) {
#ifdef NLSHAPE_HAVE_AVX2
  if (simd_active(spec)) {
    radial_factor_avx2(spec, n, dx, dy, out);
    return;
  }
#endif
  radial_factor_scalar(spec, n, dx, dy, out);
}

}  // namespace nlshape
