#include <cmath>

#include "nlshape/kernel.hpp"

namespace nlshape {

void radial_factor_scalar(const KernelSpec& spec, std::size_t n, const double* dx, const double* dy,
                          double* out) {
  const double d2 = spec.delta * spec.delta;
  if (!spec.singular()) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r2 = dx[i] * dx[i] + dy[i] * dy[i];
      out[i] = r2 < d2 ? 1.0 : 0.0;
    }
    return;
  }
  if (spec.s == 0.5) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r2 = dx[i] * dx[i] + dy[i] * dy[i];
      out[i] = r2 < d2 ? 1.0 / (r2 * std::sqrt(r2)) : 0.0;
    }
    return;
  }
  const double p = -(1.0 + spec.s);
  for (std::size_t i = 0; i < n; ++i) {
    const double r2 = dx[i] * dx[i] + dy[i] * dy[i];
    out[i] = r2 < d2 ? std::pow(r2, p) : 0.0;
  }
}

}  // namespace nlshape
