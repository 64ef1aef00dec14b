#pragma once

// Independent test oracles. These deliberately avoid the library's query and
// feature paths: plain linear scans and a separate scalar network
// implementation, kept simple enough to be obviously correct.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rlr/dqn.hpp"
#include "rlr/geometry.hpp"

namespace oracle {

inline bool boxes_intersect(const rlr::Rect& a, const rlr::Rect& b) {
  for (int d = 0; d < a.dims; ++d)
    if (a.lo(d) > b.hi(d) || b.lo(d) > a.hi(d)) return false;
  return true;
}

inline std::vector<int64_t> range_scan(
    const std::vector<rlr::ObjectRecord>& objects, const rlr::Rect& window) {
  std::vector<int64_t> out;
  for (const rlr::ObjectRecord& o : objects)
    if (boxes_intersect(o.mbr, window)) out.push_back(o.id);
  std::sort(out.begin(), out.end());
  return out;
}

inline double point_box_dist(const rlr::Rect& r, const std::vector<double>& q) {
  double s = 0;
  for (int d = 0; d < r.dims; ++d) {
    double diff = 0;
    if (q[static_cast<size_t>(d)] < r.lo(d)) diff = r.lo(d) - q[static_cast<size_t>(d)];
    if (q[static_cast<size_t>(d)] > r.hi(d)) diff = q[static_cast<size_t>(d)] - r.hi(d);
    s += diff * diff;
  }
  return std::sqrt(s);
}

inline std::vector<int64_t> knn_scan(const std::vector<rlr::ObjectRecord>& objects,
                                     const std::vector<double>& q, int k) {
  std::vector<std::pair<double, int64_t>> all;
  all.reserve(objects.size());
  for (const rlr::ObjectRecord& o : objects)
    all.push_back({point_box_dist(o.mbr, q), o.id});
  std::sort(all.begin(), all.end());
  std::vector<int64_t> out;
  const size_t take = std::min<size_t>(static_cast<size_t>(k), all.size());
  for (size_t i = 0; i < take; ++i) out.push_back(all[i].second);
  return out;
}

// Scalar re-implementation of the value network forward pass, written
// independently from the kernel-backed production path.
inline std::vector<double> net_forward(const rlr::QNetwork& net,
                                       const std::vector<double>& s) {
  constexpr double lambda = 1.0507009873554804934193349852946;
  constexpr double alpha = 1.6732632423543772848170429916717;
  std::vector<double> h(static_cast<size_t>(net.hidden));
  for (int i = 0; i < net.hidden; ++i) {
    double z = net.b1[static_cast<size_t>(i)];
    for (int j = 0; j < net.input; ++j)
      z += net.w1[static_cast<size_t>(i) * net.input + static_cast<size_t>(j)] *
           s[static_cast<size_t>(j)];
    h[static_cast<size_t>(i)] =
        z > 0 ? lambda * z : lambda * alpha * (std::exp(z) - 1.0);
  }
  std::vector<double> q(static_cast<size_t>(net.k));
  for (int a = 0; a < net.k; ++a) {
    double v = net.b2[static_cast<size_t>(a)];
    for (int i = 0; i < net.hidden; ++i)
      v += net.w2[static_cast<size_t>(a) * net.hidden + static_cast<size_t>(i)] *
           h[static_cast<size_t>(i)];
    q[static_cast<size_t>(a)] = v;
  }
  return q;
}

inline std::vector<rlr::ObjectRecord> random_boxes(int n, int dims,
                                                   uint64_t seed,
                                                   double max_side = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  std::uniform_real_distribution<double> side(0.0, max_side);
  std::vector<rlr::ObjectRecord> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    rlr::ObjectRecord o;
    o.id = i;
    o.mbr.dims = dims;
    for (int d = 0; d < dims; ++d) {
      const double c = pos(rng);
      const double s = side(rng);
      o.mbr.lo(d) = c - 0.5 * s;
      o.mbr.hi(d) = c + 0.5 * s;
    }
    out.push_back(o);
  }
  return out;
}

inline std::vector<rlr::ObjectRecord> random_points(int n, int dims,
                                                    uint64_t seed) {
  return random_boxes(n, dims, seed, 0.0);
}

}  // namespace oracle
