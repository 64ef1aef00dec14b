#pragma once

namespace rlr::kernels {

// Data-parallel inner loops used by the value-network math and the batched
// rectangle feature computations. Scalar reference implementations always
// exist; an AVX2 variant is selected at runtime when the CPU supports it.
// The two variants are equivalence-tested; results may differ by normal
// floating-point reassociation only.
//
// Matrices are row-major. Rectangle batches are structure-of-arrays:
// lo[d * stride + i] / hi[d * stride + i] hold coordinate d of entry i.
struct Ops {
  // y = W x + b   (W: rows x cols)
  void (*matvec)(int rows, int cols, const double* w, const double* x,
                 const double* b, double* y);
  // x_grad = W^T dy
  void (*matvec_t)(int rows, int cols, const double* w, const double* dy,
                   double* x_grad);
  // A += u v^T    (A: rows x cols, u: rows, v: cols)
  void (*ger_acc)(int rows, int cols, double* a, const double* u,
                  const double* v);
  // y += alpha x
  void (*axpy)(int n, double alpha, const double* x, double* y);
  // h = selu(z)
  void (*selu)(int n, const double* z, double* h);
  // dz = dh * selu'(z)
  void (*selu_grad)(int n, const double* z, const double* dh, double* dz);
  // Per-entry growth when entry i is extended to cover `box`:
  //   d_area[i]   = area(union(entry_i, box)) - area(entry_i)
  //   d_margin[i] = margin(union(entry_i, box)) - margin(entry_i)
  void (*enlargement_stats)(int dims, int n, int stride, const double* lo,
                            const double* hi, const double* box_lo,
                            const double* box_hi, double* d_area,
                            double* d_margin);
  // Sum over entries of the intersection area with `box`.
  double (*overlap_area_sum)(int dims, int n, int stride, const double* lo,
                             const double* hi, const double* box_lo,
                             const double* box_hi);
};

// Active table: AVX2 when available, overridable with RLR_KERNELS=scalar|avx2.
const Ops& ops();

const Ops& scalar_ops();
// nullptr when the build or the CPU lacks AVX2+FMA.
const Ops* avx2_ops();
const char* active_name();

inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

}  // namespace rlr::kernels
