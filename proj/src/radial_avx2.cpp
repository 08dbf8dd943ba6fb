#include <immintrin.h>

#include "nlshape/kernel.hpp"

namespace nlshape {

void radial_factor_avx2(const KernelSpec& spec, std::size_t n, const double* dx, const double* dy,
                        double* out) {
  if (spec.singular() && spec.s != 0.5) {
    radial_factor_scalar(spec, n, dx, dy, out);
    return;
  }
  const __m256d d2 = _mm256_set1_pd(spec.delta * spec.delta);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  if (!spec.singular()) {
    for (; i + 4 <= n; i += 4) {
      const __m256d x = _mm256_loadu_pd(dx + i), y = _mm256_loadu_pd(dy + i);
      const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
      const __m256d m = _mm256_cmp_pd(r2, d2, _CMP_LT_OQ);
      _mm256_storeu_pd(out + i, _mm256_and_pd(m, one));
    }
  } else {
    for (; i + 4 <= n; i += 4) {
      const __m256d x = _mm256_loadu_pd(dx + i), y = _mm256_loadu_pd(dy + i);
      const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
      const __m256d m = _mm256_cmp_pd(r2, d2, _CMP_LT_OQ);
      const __m256d v = _mm256_div_pd(one, _mm256_mul_pd(r2, _mm256_sqrt_pd(r2)));
      _mm256_storeu_pd(out + i, _mm256_and_pd(m, v));
    }
  }
  if (i < n) radial_factor_scalar(spec, n - i, dx + i, dy + i, out + i);
}

}  // namespace nlshape
