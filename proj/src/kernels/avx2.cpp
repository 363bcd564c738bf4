#include "judgekit/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace judgekit::kernels::avx2 {

#if defined(__AVX2__)

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t body = n & ~std::size_t{7};
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i),
                                             _mm256_loadu_pd(b.data() + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i + 4),
                                             _mm256_loadu_pd(b.data() + i + 4)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (std::size_t i = body; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const std::size_t body = n & ~std::size_t{3};
  const __m256d va = _mm256_set1_pd(alpha);
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y.data() + i);
    _mm256_storeu_pd(y.data() + i,
                     _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i))));
  }
  for (std::size_t i = body; i < n; ++i) y[i] += alpha * x[i];
}

void standardize(std::span<const double> x, std::span<const double> mean,
                 std::span<const double> std_dev, std::span<double> out) {
  const std::size_t n = x.size();
  const std::size_t body = n & ~std::size_t{3};
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d s = _mm256_loadu_pd(std_dev.data() + i);
    const __m256d live = _mm256_cmp_pd(s, zero, _CMP_GT_OQ);
    // Constant lanes divide by 1 and are then masked to zero.
    const __m256d denom = _mm256_blendv_pd(_mm256_set1_pd(1.0), s, live);
    const __m256d z = _mm256_div_pd(
        _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(mean.data() + i)), denom);
    _mm256_storeu_pd(out.data() + i, _mm256_and_pd(z, live));
  }
  for (std::size_t i = body; i < n; ++i)
    out[i] = std_dev[i] > 0.0 ? (x[i] - mean[i]) / std_dev[i] : 0.0;
}

#else

double dot(std::span<const double> a, std::span<const double> b) { return scalar::dot(a, b); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  scalar::axpy(alpha, x, y);
}
void standardize(std::span<const double> x, std::span<const double> mean,
                 std::span<const double> std_dev, std::span<double> out) {
  scalar::standardize(x, mean, std_dev, out);
}

#endif

}  // namespace judgekit::kernels::avx2
