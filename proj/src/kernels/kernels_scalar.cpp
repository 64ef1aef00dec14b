#include <cmath>

#include "rlr/kernels.hpp"

namespace rlr::kernels {
namespace {

void matvec_scalar(int rows, int cols, const double* w, const double* x,
                   const double* b, double* y) {
  for (int r = 0; r < rows; ++r) {
    const double* wr = w + static_cast<long>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc + b[r];
  }
}

void matvec_t_scalar(int rows, int cols, const double* w, const double* dy,
                     double* x_grad) {
  for (int c = 0; c < cols; ++c) x_grad[c] = 0.0;
  for (int r = 0; r < rows; ++r) {
    const double* wr = w + static_cast<long>(r) * cols;
    const double g = dy[r];
    for (int c = 0; c < cols; ++c) x_grad[c] += wr[c] * g;
  }
}

void ger_acc_scalar(int rows, int cols, double* a, const double* u,
                    const double* v) {
  for (int r = 0; r < rows; ++r) {
    double* ar = a + static_cast<long>(r) * cols;
    const double ur = u[r];
    for (int c = 0; c < cols; ++c) ar[c] += ur * v[c];
  }
}

void axpy_scalar(int n, double alpha, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void selu_scalar(int n, const double* z, double* h) {
  for (int i = 0; i < n; ++i) {
    const double v = z[i];
    h[i] = v > 0.0 ? kSeluLambda * v
                   : kSeluLambda * kSeluAlpha * (std::exp(v) - 1.0);
  }
}

void selu_grad_scalar(int n, const double* z, const double* dh, double* dz) {
  for (int i = 0; i < n; ++i) {
    const double v = z[i];
    const double d =
        v > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(v);
    dz[i] = dh[i] * d;
  }
}

void enlargement_stats_scalar(int dims, int n, int stride, const double* lo,
                              const double* hi, const double* box_lo,
                              const double* box_hi, double* d_area,
                              double* d_margin) {
  for (int i = 0; i < n; ++i) {
    double area_u = 1.0, area_b = 1.0, mar_u = 0.0, mar_b = 0.0;
    for (int d = 0; d < dims; ++d) {
      const double l = lo[static_cast<long>(d) * stride + i];
      const double h = hi[static_cast<long>(d) * stride + i];
      const double ul = l < box_lo[d] ? l : box_lo[d];
      const double uh = h > box_hi[d] ? h : box_hi[d];
      const double wu = uh - ul;
      const double wb = h - l;
      area_u *= wu;
      area_b *= wb;
      mar_u += wu;
      mar_b += wb;
    }
    d_area[i] = area_u - area_b;
    d_margin[i] = mar_u - mar_b;
  }
}

double overlap_area_sum_scalar(int dims, int n, int stride, const double* lo,
                               const double* hi, const double* box_lo,
                               const double* box_hi) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = 1.0;
    for (int d = 0; d < dims; ++d) {
      const double l = lo[static_cast<long>(d) * stride + i];
      const double h = hi[static_cast<long>(d) * stride + i];
      const double il = l > box_lo[d] ? l : box_lo[d];
      const double ih = h < box_hi[d] ? h : box_hi[d];
      const double w = ih - il;
      if (w <= 0.0) {
        v = 0.0;
        break;
      }
      v *= w;
    }
    total += v;
  }
  return total;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      matvec_scalar,        matvec_t_scalar,
      ger_acc_scalar,       axpy_scalar,
      selu_scalar,          selu_grad_scalar,
      enlargement_stats_scalar, overlap_area_sum_scalar,
  };
  return table;
}

}  // namespace rlr::kernels
