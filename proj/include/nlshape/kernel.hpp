#pragma once

#include <cstddef>

#include "nlshape/mesh.hpp"
#include "nlshape/types.hpp"

namespace nlshape {

enum class KernelClass { Integrable, SingularSymmetric };

// gamma(x, y) = sigma(region(x), region(y)) * normalizer * rho(|x - y|) * chi(|x - y| < delta)
// with rho = 1 (Integrable) or |x - y|^{-(2 + 2s)} (SingularSymmetric).
struct KernelSpec {
  KernelClass kind = KernelClass::Integrable;
  double delta = 0.1;
  double s = 0.5;
  double normalizer = 1e4;
  double sigma11 = 1, sigma12 = 1, sigma21 = 1, sigma22 = 1, sigma1I = 1, sigma2I = 1;

  double sigma(Region rx, Region ry) const;
  double exponent() const { return kind == KernelClass::SingularSymmetric ? 2.0 + 2.0 * s : 0.0; }
  bool singular() const { return kind == KernelClass::SingularSymmetric; }
  bool symmetric() const { return sigma12 == sigma21; }
  void validate() const;  // throws InputError
};

double default_normalizer(KernelClass kind, double delta, double s);
KernelSpec preset_gamma1();
KernelSpec preset_gamma2(double s = 0.5);

struct PointPairContext {
  Vec2 x = Vec2::Zero(), y = Vec2::Zero();
  Region region_x = Region::Omega1, region_y = Region::Omega1;
  Vec2 V_x = Vec2::Zero(), V_y = Vec2::Zero(), W_x = Vec2::Zero(), W_y = Vec2::Zero();
  double divV_x = 0, divV_y = 0, divW_x = 0, divW_y = 0;
  Mat2 DV_x = Mat2::Zero(), DV_y = Mat2::Zero(), DW_x = Mat2::Zero(), DW_y = Mat2::Zero();
  // div(DV W) at x and y; equals trace(DV DW) for piecewise linear fields
  double divDVW_x = 0, divDVW_y = 0;

  PointPairContext swapped() const;
};

double kernel_eval(const KernelSpec& spec, const PointPairContext& ctx);

struct KernelGrad {
  Vec2 gx, gy;
};
KernelGrad kernel_grad(const KernelSpec& spec, const PointPairContext& ctx);

struct KernelHessian {
  Mat2 xx, xy, yx, yy;
};
KernelHessian kernel_hessian(const KernelSpec& spec, const PointPairContext& ctx);

struct PsiTerms {
  double psi1_xy, psi1_yx, psi2_xy, psi2_yx;
};
PsiTerms psi_terms(const KernelSpec& spec, const PointPairContext& ctx);

struct TTerms {
  double t11_xy, t11_yx, t21_xy, t21_yx, t12_xy, t12_yx, t22_xy, t22_yx;
};
TTerms t_terms(const KernelSpec& spec, const PointPairContext& ctx);

// ---- batched radial factor chi * rho over difference vectors ----
void radial_factor(const KernelSpec& spec, std::size_t n, const double* dx, const double* dy, double* out);
void radial_factor_scalar(const KernelSpec& spec, std::size_t n, const double* dx, const double* dy,
                          double* out);
#ifdef NLSHAPE_HAVE_AVX2
// Handles the integrable class and s = 1/2; other s fall back to scalar.
void radial_factor_avx2(const KernelSpec& spec, std::size_t n, const double* dx, const double* dy,
                        double* out);
#endif
bool cpu_has_avx2();
// Forces the scalar path regardless of CPU support (for equivalence tests).
void set_simd_enabled(bool enabled);
bool simd_active(const KernelSpec& spec);

}  // namespace nlshape
