#include "rlr/geometry.hpp"

namespace rlr {

Rect make_rect(std::span<const double> lo, std::span<const double> hi) {
  if (lo.size() != hi.size())
    throw std::invalid_argument("make_rect: lo/hi length mismatch");
  if (lo.size() < 1 || lo.size() > Rect::kMaxDims)
    throw std::invalid_argument("make_rect: unsupported dimension count " +
                                std::to_string(lo.size()));
  Rect r;
  r.dims = static_cast<int32_t>(lo.size());
  for (int i = 0; i < r.dims; ++i) {
    r.lo(i) = lo[static_cast<size_t>(i)];
    r.hi(i) = hi[static_cast<size_t>(i)];
    if (!(r.lo(i) <= r.hi(i)))
      throw std::invalid_argument("make_rect: lo > hi in dimension " +
                                  std::to_string(i));
  }
  return r;
}

Rect make_point_rect(std::span<const double> p) { return make_rect(p, p); }

Rect make_rect_2d(double lox, double loy, double hix, double hiy) {
  const double lo[2] = {lox, loy};
  const double hi[2] = {hix, hiy};
  return make_rect(lo, hi);
}

}  // namespace rlr
