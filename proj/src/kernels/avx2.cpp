#include <immintrin.h>

#include <cmath>

#include "eedc/kernels.hpp"

namespace eedc::kernels {

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= len; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t len) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < len; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, const double* x, double* y, std::size_t len) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(a, _mm256_loadu_pd(x + i)));
  for (; i < len; ++i) y[i] = alpha * x[i];
}

void affine_avx2(double r, const double* a, const double* b, double* out, std::size_t len) {
  const __m256d rv = _mm256_set1_pd(r);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d ra = _mm256_mul_pd(rv, _mm256_loadu_pd(a + i));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(ra, _mm256_loadu_pd(b + i)));
  }
  for (; i < len; ++i) {
    const double ra = r * a[i];
    out[i] = ra - b[i];
  }
}

void tridiag_avx2(const double* lo, const double* di, const double* up, const double* x,
                  double* y, std::size_t len) {
  if (len < 3) {
    scalar_table().tridiag(lo, di, up, x, y, len);
    return;
  }
  y[0] = di[0] * x[0] + up[0] * x[1];
  std::size_t i = 1;
  for (; i + 4 < len; i += 4) {
    __m256d s = _mm256_mul_pd(_mm256_loadu_pd(di + i), _mm256_loadu_pd(x + i));
    s = _mm256_fmadd_pd(_mm256_loadu_pd(lo + i), _mm256_loadu_pd(x + i - 1), s);
    s = _mm256_fmadd_pd(_mm256_loadu_pd(up + i), _mm256_loadu_pd(x + i + 1), s);
    _mm256_storeu_pd(y + i, s);
  }
  for (; i + 1 < len; ++i) y[i] = di[i] * x[i] + lo[i] * x[i - 1] + up[i] * x[i + 1];
  y[len - 1] = di[len - 1] * x[len - 1] + lo[len - 1] * x[len - 2];
}

double max_abs_diff_avx2(const double* x, const double* y, std::size_t len) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d best = _mm256_setzero_pd();
  __m256d nan_seen = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    nan_seen = _mm256_or_pd(nan_seen, _mm256_cmp_pd(d, d, _CMP_UNORD_Q));
    best = _mm256_max_pd(best, d);
  }
  if (_mm256_movemask_pd(nan_seen) != 0) return std::nan("");
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double m = lanes[0];
  for (int k = 1; k < 4; ++k) m = lanes[k] > m ? lanes[k] : m;
  for (; i < len; ++i) {
    const double d = std::fabs(x[i] - y[i]);
    if (std::isnan(d)) return d;
    if (d > m) m = d;
  }
  return m;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{"avx2",      dot_avx2,     axpy_avx2,
                                 scale_avx2,  affine_avx2,  tridiag_avx2,
                                 max_abs_diff_avx2};
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &table : nullptr;
}

}  // namespace eedc::kernels
