#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rlr/common.hpp"

namespace rlr {

/// Axis-aligned d-dimensional box. Coordinates are packed lo[0..d) then
/// hi[0..d). Degenerate boxes (lo == hi in some dimension) are valid.
struct Rect {
  static constexpr int kMaxDims = 10;

  std::array<double, 2 * kMaxDims> c{};
  int32_t dims = 0;

  double lo(int i) const { return c[static_cast<size_t>(i)]; }
  double hi(int i) const { return c[static_cast<size_t>(dims + i)]; }
  double& lo(int i) { return c[static_cast<size_t>(i)]; }
  double& hi(int i) { return c[static_cast<size_t>(dims + i)]; }

  double side(int i) const { return hi(i) - lo(i); }

  /// Product of side lengths; 0 for degenerate boxes.
  double area() const {
    double a = 1.0;
    for (int i = 0; i < dims; ++i) a *= side(i);
    return a;
  }

  /// Sum of side lengths (generalized semi-perimeter).
  double margin() const {
    double s = 0.0;
    for (int i = 0; i < dims; ++i) s += side(i);
    return s;
  }

  bool valid() const {
    if (dims < 1 || dims > kMaxDims) return false;
    for (int i = 0; i < dims; ++i)
      if (!(lo(i) <= hi(i))) return false;
    return true;
  }

  void center(double* out) const {
    for (int i = 0; i < dims; ++i) out[i] = 0.5 * (lo(i) + hi(i));
  }

  bool operator==(const Rect& o) const {
    if (dims != o.dims) return false;
    for (int i = 0; i < 2 * dims; ++i)
      if (c[static_cast<size_t>(i)] != o.c[static_cast<size_t>(i)]) return false;
    return true;
  }
};

Rect make_rect(std::span<const double> lo, std::span<const double> hi);
Rect make_point_rect(std::span<const double> p);
Rect make_rect_2d(double lox, double loy, double hix, double hiy);

inline void check_same_dims(const Rect& a, const Rect& b) {
  if (a.dims != b.dims)
    throw std::invalid_argument("rect dimension mismatch: " +
                                std::to_string(a.dims) + " vs " +
                                std::to_string(b.dims));
}

inline Rect rect_union(const Rect& a, const Rect& b) {
  check_same_dims(a, b);
  Rect u;
  u.dims = a.dims;
  for (int i = 0; i < a.dims; ++i) {
    u.lo(i) = a.lo(i) < b.lo(i) ? a.lo(i) : b.lo(i);
    u.hi(i) = a.hi(i) > b.hi(i) ? a.hi(i) : b.hi(i);
  }
  return u;
}

inline void rect_extend(Rect& a, const Rect& b) {
  check_same_dims(a, b);
  for (int i = 0; i < a.dims; ++i) {
    if (b.lo(i) < a.lo(i)) a.lo(i) = b.lo(i);
    if (b.hi(i) > a.hi(i)) a.hi(i) = b.hi(i);
  }
}

/// Area of the intersection; 0 when disjoint or merely touching.
inline double rect_overlap_area(const Rect& a, const Rect& b) {
  check_same_dims(a, b);
  double v = 1.0;
  for (int i = 0; i < a.dims; ++i) {
    double lo = a.lo(i) > b.lo(i) ? a.lo(i) : b.lo(i);
    double hi = a.hi(i) < b.hi(i) ? a.hi(i) : b.hi(i);
    double w = hi - lo;
    if (w <= 0.0) return 0.0;
    v *= w;
  }
  return v;
}

/// Closed-box intersection test: shared boundaries intersect.
inline bool rect_intersects(const Rect& a, const Rect& b) {
  check_same_dims(a, b);
  for (int i = 0; i < a.dims; ++i)
    if (a.lo(i) > b.hi(i) || b.lo(i) > a.hi(i)) return false;
  return true;
}

/// True when `outer` fully contains `inner` (closed boxes).
inline bool rect_contains(const Rect& outer, const Rect& inner) {
  check_same_dims(outer, inner);
  for (int i = 0; i < outer.dims; ++i)
    if (inner.lo(i) < outer.lo(i) || inner.hi(i) > outer.hi(i)) return false;
  return true;
}

inline double rect_enlargement(const Rect& base, const Rect& add) {
  return rect_union(base, add).area() - base.area();
}

/// Squared minimum Euclidean distance from point q to the box (0 if inside).
inline double mindist_sq(const Rect& r, std::span<const double> q) {
  double s = 0.0;
  for (int i = 0; i < r.dims; ++i) {
    double d = 0.0;
    if (q[static_cast<size_t>(i)] < r.lo(i))
      d = r.lo(i) - q[static_cast<size_t>(i)];
    else if (q[static_cast<size_t>(i)] > r.hi(i))
      d = q[static_cast<size_t>(i)] - r.hi(i);
    s += d * d;
  }
  return s;
}

struct ObjectRecord {
  int64_t id = 0;
  Rect mbr;
};

}  // namespace rlr
