#include "rlr/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace rlr::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

void matvec_avx2(int rows, int cols, const double* w, const double* x,
                 const double* b, double* y) {
  for (int r = 0; r < rows; ++r) {
    const double* wr = w + static_cast<long>(r) * cols;
    __m256d acc = _mm256_setzero_pd();
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(wr + c), _mm256_loadu_pd(x + c),
                            acc);
    }
    double s = hsum(acc);
    for (; c < cols; ++c) s += wr[c] * x[c];
    y[r] = s + b[r];
  }
}

void matvec_t_avx2(int rows, int cols, const double* w, const double* dy,
                   double* x_grad) {
  int c = 0;
  for (; c + 4 <= cols; c += 4) _mm256_storeu_pd(x_grad + c, _mm256_setzero_pd());
  for (; c < cols; ++c) x_grad[c] = 0.0;
  for (int r = 0; r < rows; ++r) {
    const double* wr = w + static_cast<long>(r) * cols;
    const __m256d g = _mm256_set1_pd(dy[r]);
    c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_loadu_pd(x_grad + c);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(wr + c), g, acc);
      _mm256_storeu_pd(x_grad + c, acc);
    }
    for (; c < cols; ++c) x_grad[c] += wr[c] * dy[r];
  }
}

void ger_acc_avx2(int rows, int cols, double* a, const double* u,
                  const double* v) {
  for (int r = 0; r < rows; ++r) {
    double* ar = a + static_cast<long>(r) * cols;
    const __m256d ur = _mm256_set1_pd(u[r]);
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_loadu_pd(ar + c);
      acc = _mm256_fmadd_pd(ur, _mm256_loadu_pd(v + c), acc);
      _mm256_storeu_pd(ar + c, acc);
    }
    for (; c < cols; ++c) ar[c] += u[r] * v[c];
  }
}

void axpy_avx2(int n, double alpha, const double* x, double* y) {
  const __m256d a = _mm256_set1_pd(alpha);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_loadu_pd(y + i);
    acc = _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), acc);
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void enlargement_stats_avx2(int dims, int n, int stride, const double* lo,
                            const double* hi, const double* box_lo,
                            const double* box_hi, double* d_area,
                            double* d_margin) {
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d area_u = _mm256_set1_pd(1.0);
    __m256d area_b = _mm256_set1_pd(1.0);
    __m256d mar_u = _mm256_setzero_pd();
    __m256d mar_b = _mm256_setzero_pd();
    for (int d = 0; d < dims; ++d) {
      const __m256d l = _mm256_loadu_pd(lo + static_cast<long>(d) * stride + i);
      const __m256d h = _mm256_loadu_pd(hi + static_cast<long>(d) * stride + i);
      const __m256d bl = _mm256_set1_pd(box_lo[d]);
      const __m256d bh = _mm256_set1_pd(box_hi[d]);
      const __m256d wu = _mm256_sub_pd(_mm256_max_pd(h, bh), _mm256_min_pd(l, bl));
      const __m256d wb = _mm256_sub_pd(h, l);
      area_u = _mm256_mul_pd(area_u, wu);
      area_b = _mm256_mul_pd(area_b, wb);
      mar_u = _mm256_add_pd(mar_u, wu);
      mar_b = _mm256_add_pd(mar_b, wb);
    }
    _mm256_storeu_pd(d_area + i, _mm256_sub_pd(area_u, area_b));
    _mm256_storeu_pd(d_margin + i, _mm256_sub_pd(mar_u, mar_b));
  }
  if (i < n) {
    scalar_ops().enlargement_stats(dims, n - i, stride, lo + i, hi + i, box_lo,
                                   box_hi, d_area + i, d_margin + i);
  }
}

double overlap_area_sum_avx2(int dims, int n, int stride, const double* lo,
                             const double* hi, const double* box_lo,
                             const double* box_hi) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d total = zero;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_set1_pd(1.0);
    __m256d alive = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    for (int d = 0; d < dims; ++d) {
      const __m256d l = _mm256_loadu_pd(lo + static_cast<long>(d) * stride + i);
      const __m256d h = _mm256_loadu_pd(hi + static_cast<long>(d) * stride + i);
      const __m256d il = _mm256_max_pd(l, _mm256_set1_pd(box_lo[d]));
      const __m256d ih = _mm256_min_pd(h, _mm256_set1_pd(box_hi[d]));
      const __m256d w = _mm256_sub_pd(ih, il);
      alive = _mm256_and_pd(alive, _mm256_cmp_pd(w, zero, _CMP_GT_OQ));
      v = _mm256_mul_pd(v, w);
    }
    total = _mm256_add_pd(total, _mm256_and_pd(v, alive));
  }
  double s = hsum(total);
  if (i < n) {
    s += scalar_ops().overlap_area_sum(dims, n - i, stride, lo + i, hi + i,
                                       box_lo, box_hi);
  }
  return s;
}

}  // namespace

const Ops* avx2_ops() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
    return nullptr;
  static const Ops table = {
      matvec_avx2,        matvec_t_avx2,
      ger_acc_avx2,       axpy_avx2,
      scalar_ops().selu,  scalar_ops().selu_grad,
      enlargement_stats_avx2, overlap_area_sum_avx2,
  };
  return &table;
}

}  // namespace rlr::kernels

#else

namespace rlr::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace rlr::kernels

#endif
