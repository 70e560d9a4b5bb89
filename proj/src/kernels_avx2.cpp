// Compiled with -mavx2 (see src/CMakeLists.txt); only reached after a
// runtime CPU check.
#if defined(__x86_64__)

#include <immintrin.h>

#include "lorentzlab/kernels.hpp"

namespace lorentzlab::kernels::avx2 {

void difference_scaled(const double* plus, const double* minus, double* out, std::size_t n, double scale) {
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d p = _mm256_loadu_pd(plus + j);
    __m256d m = _mm256_loadu_pd(minus + j);
    _mm256_storeu_pd(out + j, _mm256_mul_pd(_mm256_sub_pd(p, m), s));
  }
  for (; j < n; ++j) out[j] = (plus[j] - minus[j]) * scale;
}

void second_difference(const double* plus, const double* center, const double* minus, double* out,
                       std::size_t n, double scale) {
  const __m256d s = _mm256_set1_pd(scale);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d sum = _mm256_add_pd(_mm256_loadu_pd(plus + j), _mm256_loadu_pd(minus + j));
    __m256d twice = _mm256_mul_pd(two, _mm256_loadu_pd(center + j));
    _mm256_storeu_pd(out + j, _mm256_mul_pd(_mm256_sub_pd(sum, twice), s));
  }
  for (; j < n; ++j) {
    double sum = plus[j] + minus[j];
    double twice = 2.0 * center[j];
    out[j] = (sum - twice) * scale;
  }
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4)
    _mm256_storeu_pd(out + j, _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j)));
  for (; j < n; ++j) out[j] = a[j] * b[j];
}

}  // namespace lorentzlab::kernels::avx2

#endif
