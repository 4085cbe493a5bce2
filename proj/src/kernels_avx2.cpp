#include "kernels_impl.hpp"

// AVX2 kernel variants. This translation unit is compiled with -mavx2; the
// dispatcher only installs the table after a runtime CPU check. Lane
// operations are plain IEEE add/sub/mul/div (no FMA) so each lane rounds like
// the scalar reference, and reductions keep the scalar path's 4-lane stripe
// and combine order.

#if defined(EQDISC_BUILD_AVX2) && defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace eqdisc::kernels::detail {
namespace {

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_avx2(const double* a, double alpha, double* out, std::size_t n) {
  const __m256d valpha = _mm256_set1_pd(alpha);
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), valpha));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = a[i] * alpha;
}

void clamp_avx2(const double* a, double lo, double hi, double* out, std::size_t n) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d t = _mm256_max_pd(_mm256_loadu_pd(a + i), vlo);
    _mm256_storeu_pd(out + i, _mm256_min_pd(t, vhi));
  }
  for (std::size_t i = n4; i < n; ++i) {
    double t = a[i] > lo ? a[i] : lo;
    out[i] = t < hi ? t : hi;
  }
}

std::size_t guarded_div_avx2(const double* a, const double* b, double* out,
                             std::size_t n, double eps) {
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vone = _mm256_set1_pd(1.0);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t guarded = 0;
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d vb = _mm256_loadu_pd(b + i);
    __m256d small = _mm256_cmp_pd(_mm256_and_pd(vb, abs_mask), veps, _CMP_LT_OQ);
    __m256d q = _mm256_div_pd(_mm256_loadu_pd(a + i), vb);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(q, vone, small));
    guarded += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(small)));
  }
  for (std::size_t i = n4; i < n; ++i) {
    if (std::fabs(b[i]) < eps) {
      out[i] = 1.0;
      ++guarded;
    } else {
      out[i] = a[i] / b[i];
    }
  }
  return guarded;
}

// Lane j of `v` holds the stripe of elements with index = j (mod 4); combine
// as ((l0+l2) + (l1+l3)) to match the scalar reference.
double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) tail += a[i] * b[i];
  return hsum(acc) + tail;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t n4 = n - (n % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) tail += a[i];
  return hsum(acc) + tail;
}

double sum_squares_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

void central_diff1_avx2(const double* u, double* out, std::size_t n_out, double two_h) {
  const __m256d vh = _mm256_set1_pd(two_h);
  std::size_t n4 = n_out - (n_out % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(u + i + 2), _mm256_loadu_pd(u + i));
    _mm256_storeu_pd(out + i, _mm256_div_pd(d, vh));
  }
  for (std::size_t i = n4; i < n_out; ++i) out[i] = (u[i + 2] - u[i]) / two_h;
}

void central_diff2_avx2(const double* u, double* out, std::size_t n_out, double h_sq) {
  const __m256d vh = _mm256_set1_pd(h_sq);
  const __m256d vtwo = _mm256_set1_pd(2.0);
  std::size_t n4 = n_out - (n_out % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d ends = _mm256_add_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(u + i + 2));
    __m256d mid = _mm256_mul_pd(vtwo, _mm256_loadu_pd(u + i + 1));
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_sub_pd(ends, mid), vh));
  }
  for (std::size_t i = n4; i < n_out; ++i)
    out[i] = ((u[i] + u[i + 2]) - 2.0 * u[i + 1]) / h_sq;
}

void stencil3_avx2(const double* u, double* out, std::size_t n_out, double c_mid,
                   double c_side) {
  const __m256d vmid = _mm256_set1_pd(c_mid);
  const __m256d vside = _mm256_set1_pd(c_side);
  std::size_t n4 = n_out - (n_out % 4);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d ends = _mm256_add_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(u + i + 2));
    __m256d mid = _mm256_mul_pd(vmid, _mm256_loadu_pd(u + i + 1));
    _mm256_storeu_pd(out + i, _mm256_add_pd(mid, _mm256_mul_pd(vside, ends)));
  }
  for (std::size_t i = n4; i < n_out; ++i)
    out[i] = c_mid * u[i + 1] + c_side * (u[i] + u[i + 2]);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table = {
      add_avx2,           sub_avx2,          mul_avx2,
      scale_avx2,         clamp_avx2,        guarded_div_avx2,
      dot_avx2,           sum_avx2,          sum_squares_avx2,
      central_diff1_avx2, central_diff2_avx2, stencil3_avx2,
  };
  return table;
}

}  // namespace eqdisc::kernels::detail

#endif  // EQDISC_BUILD_AVX2 && __AVX2__
