#include <cstddef>

#include "ttr/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define TTR_X86 1
#include <immintrin.h>
#else
#define TTR_X86 0
#endif

namespace ttr::kernels::avx2 {

#if TTR_X86

__attribute__((target("avx2,fma"))) double dot(std::span<const float> a,
                                               std::span<const float> b) {
  const std::size_t n = a.size();
  const float* pa = a.data();
  const float* pb = b.data();
  __m256d acc_lo = _mm256_setzero_pd();
  __m256d acc_hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 va = _mm256_loadu_ps(pa + i);
    __m256 vb = _mm256_loadu_ps(pb + i);
    __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
    __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
    __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
    __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
    acc_lo = _mm256_fmadd_pd(a_lo, b_lo, acc_lo);
    acc_hi = _mm256_fmadd_pd(a_hi, b_hi, acc_hi);
  }
  __m256d acc = _mm256_add_pd(acc_lo, acc_hi);
  __m128d half = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
  half = _mm_add_sd(half, _mm_unpackhi_pd(half, half));
  double total = _mm_cvtsd_f64(half);
  for (; i < n; ++i) total += static_cast<double>(pa[i]) * static_cast<double>(pb[i]);
  return total;
}

__attribute__((target("avx2,fma"))) void axpy(float alpha, std::span<const float> x,
                                              std::span<float> y) {
  const std::size_t n = x.size();
  const float* px = x.data();
  float* py = y.data();
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vy = _mm256_loadu_ps(py + i);
    vy = _mm256_fmadd_ps(va, _mm256_loadu_ps(px + i), vy);
    _mm256_storeu_ps(py + i, vy);
  }
  for (; i < n; ++i) py[i] += alpha * px[i];
}

#else

double dot(std::span<const float> a, std::span<const float> b) { return scalar::dot(a, b); }
void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  scalar::axpy(alpha, x, y);
}

#endif

}  // namespace ttr::kernels::avx2
