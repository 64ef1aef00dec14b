#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rlr/kernels.hpp"

using namespace rlr::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, size_t n, double lo = -2,
                               double hi = 2) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool all_close(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!close(a[i], b[i])) return false;
  return true;
}

// Sizes around the 4-wide vector boundary plus the shapes the network uses.
const int kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 63, 64, 65};

}  // namespace

TEST_CASE("matvec against naive loops") {
  std::mt19937_64 rng(1);
  const Ops& active = ops();
  for (int rows : {1, 2, 5, 64}) {
    for (int cols : kSizes) {
      const auto w = random_vec(rng, static_cast<size_t>(rows) * cols);
      const auto x = random_vec(rng, static_cast<size_t>(cols));
      const auto b = random_vec(rng, static_cast<size_t>(rows));
      std::vector<double> y(static_cast<size_t>(rows));
      active.matvec(rows, cols, w.data(), x.data(), b.data(), y.data());
      for (int r = 0; r < rows; ++r) {
        double acc = b[static_cast<size_t>(r)];
        for (int c = 0; c < cols; ++c)
          acc += w[static_cast<size_t>(r) * cols + c] * x[static_cast<size_t>(c)];
        CHECK(close(y[static_cast<size_t>(r)], acc));
      }
    }
  }
}

TEST_CASE("scalar and avx2 variants agree") {
  const Ops* avx2 = avx2_ops();
  if (avx2 == nullptr) return;  // CPU without AVX2: nothing to compare
  const Ops& scalar = scalar_ops();
  std::mt19937_64 rng(2);

  for (int n : kSizes) {
    const auto x = random_vec(rng, static_cast<size_t>(n));
    const auto z = random_vec(rng, static_cast<size_t>(n));
    {
      auto y1 = random_vec(rng, static_cast<size_t>(n));
      auto y2 = y1;
      scalar.axpy(n, 0.37, x.data(), y1.data());
      avx2->axpy(n, 0.37, x.data(), y2.data());
      CHECK(all_close(y1, y2));
    }
    {
      std::vector<double> h1(static_cast<size_t>(n)), h2(static_cast<size_t>(n));
      scalar.selu(n, z.data(), h1.data());
      avx2->selu(n, z.data(), h2.data());
      CHECK(all_close(h1, h2));
      std::vector<double> d1(static_cast<size_t>(n)), d2(static_cast<size_t>(n));
      scalar.selu_grad(n, z.data(), x.data(), d1.data());
      avx2->selu_grad(n, z.data(), x.data(), d2.data());
      CHECK(all_close(d1, d2));
    }
  }

  for (int rows : {1, 2, 3, 64}) {
    for (int cols : kSizes) {
      const auto w = random_vec(rng, static_cast<size_t>(rows) * cols);
      const auto x = random_vec(rng, static_cast<size_t>(cols));
      const auto b = random_vec(rng, static_cast<size_t>(rows));
      const auto dy = random_vec(rng, static_cast<size_t>(rows));
      std::vector<double> y1(static_cast<size_t>(rows)), y2(static_cast<size_t>(rows));
      scalar.matvec(rows, cols, w.data(), x.data(), b.data(), y1.data());
      avx2->matvec(rows, cols, w.data(), x.data(), b.data(), y2.data());
      CHECK(all_close(y1, y2));

      std::vector<double> g1(static_cast<size_t>(cols)), g2(static_cast<size_t>(cols));
      scalar.matvec_t(rows, cols, w.data(), dy.data(), g1.data());
      avx2->matvec_t(rows, cols, w.data(), dy.data(), g2.data());
      CHECK(all_close(g1, g2));

      auto a1 = random_vec(rng, static_cast<size_t>(rows) * cols);
      auto a2 = a1;
      scalar.ger_acc(rows, cols, a1.data(), dy.data(), x.data());
      avx2->ger_acc(rows, cols, a2.data(), dy.data(), x.data());
      CHECK(all_close(a1, a2));
    }
  }
}

TEST_CASE("rect batch kernels match direct geometry") {
  const Ops* avx2 = avx2_ops();
  const Ops& scalar = scalar_ops();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (int dims : {2, 3, 5}) {
    for (int n : {1, 3, 4, 5, 8, 51}) {
      std::vector<double> lo(static_cast<size_t>(dims) * n);
      std::vector<double> hi(static_cast<size_t>(dims) * n);
      for (int i = 0; i < n; ++i)
        for (int d = 0; d < dims; ++d) {
          const double a = u(rng), b = u(rng);
          lo[static_cast<size_t>(d) * n + i] = std::min(a, b);
          hi[static_cast<size_t>(d) * n + i] = std::max(a, b);
        }
      std::vector<double> box_lo(static_cast<size_t>(dims)),
          box_hi(static_cast<size_t>(dims));
      for (int d = 0; d < dims; ++d) {
        const double a = u(rng), b = u(rng);
        box_lo[static_cast<size_t>(d)] = std::min(a, b);
        box_hi[static_cast<size_t>(d)] = std::max(a, b);
      }

      std::vector<double> da(static_cast<size_t>(n)), dm(static_cast<size_t>(n));
      scalar.enlargement_stats(dims, n, n, lo.data(), hi.data(), box_lo.data(),
                               box_hi.data(), da.data(), dm.data());
      for (int i = 0; i < n; ++i) {
        double area_u = 1, area_b = 1, mar_u = 0, mar_b = 0;
        for (int d = 0; d < dims; ++d) {
          const double l = lo[static_cast<size_t>(d) * n + i];
          const double h = hi[static_cast<size_t>(d) * n + i];
          const double ul = std::min(l, box_lo[static_cast<size_t>(d)]);
          const double uh = std::max(h, box_hi[static_cast<size_t>(d)]);
          area_u *= uh - ul;
          area_b *= h - l;
          mar_u += uh - ul;
          mar_b += h - l;
        }
        CHECK(close(da[static_cast<size_t>(i)], area_u - area_b));
        CHECK(close(dm[static_cast<size_t>(i)], mar_u - mar_b));
        CHECK(da[static_cast<size_t>(i)] >= 0.0);
        CHECK(dm[static_cast<size_t>(i)] >= 0.0);
      }

      const double sum_scalar = scalar.overlap_area_sum(
          dims, n, n, lo.data(), hi.data(), box_lo.data(), box_hi.data());
      double direct = 0;
      for (int i = 0; i < n; ++i) {
        double v = 1;
        for (int d = 0; d < dims; ++d) {
          const double w =
              std::min(hi[static_cast<size_t>(d) * n + i],
                       box_hi[static_cast<size_t>(d)]) -
              std::max(lo[static_cast<size_t>(d) * n + i],
                       box_lo[static_cast<size_t>(d)]);
          if (w <= 0) {
            v = 0;
            break;
          }
          v *= w;
        }
        direct += v;
      }
      CHECK(close(sum_scalar, direct));

      if (avx2 != nullptr) {
        std::vector<double> da2(static_cast<size_t>(n)), dm2(static_cast<size_t>(n));
        avx2->enlargement_stats(dims, n, n, lo.data(), hi.data(), box_lo.data(),
                                box_hi.data(), da2.data(), dm2.data());
        CHECK(all_close(da, da2));
        CHECK(all_close(dm, dm2));
        const double sum_avx2 = avx2->overlap_area_sum(
            dims, n, n, lo.data(), hi.data(), box_lo.data(), box_hi.data());
        CHECK(close(sum_scalar, sum_avx2));
      }
    }
  }
}

TEST_CASE("active table is selectable") {
  const std::string name = active_name();
  CHECK((name == "avx2" || name == "scalar"));
  CHECK(ops().matvec != nullptr);
}
