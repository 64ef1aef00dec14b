#include "rlr/features.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "rlr/kernels.hpp"

namespace rlr {
namespace {

// Structure-of-arrays scratch for the entry batches handed to the kernels.
struct Scratch {
  std::vector<double> lo, hi, d_area, d_margin;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

void fill_soa(std::span<const Entry> entries, int dims, Scratch& s) {
  const int n = static_cast<int>(entries.size());
  s.lo.resize(static_cast<size_t>(dims) * n);
  s.hi.resize(static_cast<size_t>(dims) * n);
  for (int i = 0; i < n; ++i) {
    const Rect& r = entries[static_cast<size_t>(i)].rect;
    for (int d = 0; d < dims; ++d) {
      s.lo[static_cast<size_t>(d) * n + i] = r.lo(d);
      s.hi[static_cast<size_t>(d) * n + i] = r.hi(d);
    }
  }
}

}  // namespace

std::vector<CandidateChild> rank_candidate_children(const RTree& tree,
                                                    NodeId node,
                                                    const ObjectRecord& obj,
                                                    int k) {
  const Node& nd = tree.node(node);
  if (nd.level == 0)
    throw std::logic_error("rank_candidate_children: leaf node");
  if (nd.entries.empty())
    throw std::logic_error("rank_candidate_children: empty node");
  if (k < 1) throw std::invalid_argument("rank_candidate_children: k < 1");
  const int dims = tree.dims();
  const int n = static_cast<int>(nd.entries.size());

  Scratch& s = scratch();
  fill_soa(nd.entries, dims, s);
  s.d_area.resize(static_cast<size_t>(n));
  s.d_margin.resize(static_cast<size_t>(n));
  const auto& ops = kernels::ops();
  ops.enlargement_stats(dims, n, n, s.lo.data(), s.hi.data(), obj.mbr.c.data(),
                        obj.mbr.c.data() + dims, s.d_area.data(),
                        s.d_margin.data());

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const size_t ia = static_cast<size_t>(a), ib = static_cast<size_t>(b);
    if (s.d_area[ia] != s.d_area[ib]) return s.d_area[ia] < s.d_area[ib];
    if (s.d_margin[ia] != s.d_margin[ib]) return s.d_margin[ia] < s.d_margin[ib];
    return a < b;
  });

  const int take = std::min(k, n);
  std::vector<CandidateChild> out;
  out.reserve(static_cast<size_t>(take));
  for (int t = 0; t < take; ++t) {
    const int idx = order[static_cast<size_t>(t)];
    const Entry& e = nd.entries[static_cast<size_t>(idx)];
    const Rect u = rect_union(e.rect, obj.mbr);
    // Sum over siblings of the overlap growth. Summing over all entries is
    // equivalent: the self terms are area(e) on both sides and cancel.
    const double ovlp_u = ops.overlap_area_sum(dims, n, n, s.lo.data(),
                                               s.hi.data(), u.c.data(),
                                               u.c.data() + dims);
    const double ovlp_e = ops.overlap_area_sum(dims, n, n, s.lo.data(),
                                               s.hi.data(), e.rect.c.data(),
                                               e.rect.c.data() + dims);
    CandidateChild c;
    c.entry_index = idx;
    c.delta_area = s.d_area[static_cast<size_t>(idx)];
    c.delta_margin = s.d_margin[static_cast<size_t>(idx)];
    c.delta_overlap = std::max(0.0, ovlp_u - ovlp_e);
    const NodeId child = static_cast<NodeId>(e.id);
    c.occupancy = static_cast<double>(tree.node(child).entries.size()) /
                  static_cast<double>(tree.max_entries());
    out.push_back(c);
  }
  return out;
}

StateVector choose_state(std::span<const CandidateChild> candidates, int k) {
  if (candidates.empty() || static_cast<int>(candidates.size()) > k)
    throw std::invalid_argument("choose_state: need 1..k candidates");
  StateVector s;
  s.values.assign(static_cast<size_t>(4 * k), 0.0);
  s.valid_actions = static_cast<int>(candidates.size());
  double max_a = 0, max_m = 0, max_o = 0;
  for (const CandidateChild& c : candidates) {
    max_a = std::max(max_a, c.delta_area);
    max_m = std::max(max_m, c.delta_margin);
    max_o = std::max(max_o, c.delta_overlap);
  }
  for (size_t i = 0; i < candidates.size(); ++i) {
    const CandidateChild& c = candidates[i];
    s.values[4 * i + 0] = max_a > 0 ? c.delta_area / max_a : 0.0;
    s.values[4 * i + 1] = max_m > 0 ? c.delta_margin / max_m : 0.0;
    s.values[4 * i + 2] = max_o > 0 ? c.delta_overlap / max_o : 0.0;
    s.values[4 * i + 3] = c.occupancy;
  }
  return s;
}

std::optional<int> containment_shortcut(const RTree& tree, NodeId node,
                                        const ObjectRecord& obj) {
  const Node& nd = tree.node(node);
  int best = -1;
  double best_area = 0;
  for (size_t i = 0; i < nd.entries.size(); ++i) {
    const Rect& r = nd.entries[i].rect;
    if (!rect_contains(r, obj.mbr)) continue;
    const double a = r.area();
    if (best < 0 || a < best_area) {
      best = static_cast<int>(i);
      best_area = a;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

CandidateSplitSet enumerate_candidate_splits(std::span<const Entry> entries,
                                             int min_fill, int max_fill) {
  const int n = static_cast<int>(entries.size());
  if (n != max_fill + 1)
    throw std::invalid_argument("enumerate_candidate_splits: need M+1 entries");
  const int dims = entries.front().rect.dims;

  CandidateSplitSet set;
  set.all.reserve(static_cast<size_t>(dims) *
                  static_cast<size_t>(max_fill + 2 - 2 * min_fill));

  std::vector<int> order(static_cast<size_t>(n));
  std::vector<Rect> prefix(static_cast<size_t>(n));
  std::vector<Rect> suffix(static_cast<size_t>(n));
  for (int axis = 0; axis < dims; ++axis) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const Rect& ra = entries[static_cast<size_t>(a)].rect;
      const Rect& rb = entries[static_cast<size_t>(b)].rect;
      if (ra.lo(axis) != rb.lo(axis)) return ra.lo(axis) < rb.lo(axis);
      if (ra.hi(axis) != rb.hi(axis)) return ra.hi(axis) < rb.hi(axis);
      return entries[static_cast<size_t>(a)].id <
             entries[static_cast<size_t>(b)].id;
    });
    prefix[0] = entries[static_cast<size_t>(order[0])].rect;
    for (int i = 1; i < n; ++i) {
      prefix[static_cast<size_t>(i)] = prefix[static_cast<size_t>(i - 1)];
      rect_extend(prefix[static_cast<size_t>(i)],
                  entries[static_cast<size_t>(order[static_cast<size_t>(i)])].rect);
    }
    suffix[static_cast<size_t>(n - 1)] =
        entries[static_cast<size_t>(order[static_cast<size_t>(n - 1)])].rect;
    for (int i = n - 2; i >= 0; --i) {
      suffix[static_cast<size_t>(i)] = suffix[static_cast<size_t>(i + 1)];
      rect_extend(suffix[static_cast<size_t>(i)],
                  entries[static_cast<size_t>(order[static_cast<size_t>(i)])].rect);
    }
    for (int pos = min_fill; pos <= max_fill + 1 - min_fill; ++pos) {
      CandidateSplit c;
      c.axis = axis;
      c.position = pos;
      c.mbr1 = prefix[static_cast<size_t>(pos - 1)];
      c.mbr2 = suffix[static_cast<size_t>(pos)];
      c.area1 = c.mbr1.area();
      c.area2 = c.mbr2.area();
      c.margin1 = c.mbr1.margin();
      c.margin2 = c.mbr2.margin();
      c.overlap = rect_overlap_area(c.mbr1, c.mbr2);
      c.group1.assign(order.begin(), order.begin() + pos);
      c.group2.assign(order.begin() + pos, order.end());
      set.all.push_back(std::move(c));
    }
  }
  auto key_less = [](const CandidateSplit& a, const CandidateSplit& b) {
    if (a.total_area() != b.total_area()) return a.total_area() < b.total_area();
    if (a.total_margin() != b.total_margin())
      return a.total_margin() < b.total_margin();
    if (a.axis != b.axis) return a.axis < b.axis;
    return a.position < b.position;
  };
  std::sort(set.all.begin(), set.all.end(), key_less);
  for (const CandidateSplit& c : set.all)
    if (c.overlap == 0.0) set.zero_overlap.push_back(c);
  return set;
}

StateVector split_state(std::span<const CandidateSplit> topk, int k) {
  if (topk.empty() || static_cast<int>(topk.size()) > k)
    throw std::invalid_argument("split_state: need 1..k splits");
  StateVector s;
  s.values.assign(static_cast<size_t>(4 * k), 0.0);
  s.valid_actions = static_cast<int>(topk.size());
  double max_a = 0, max_m = 0;
  for (const CandidateSplit& c : topk) {
    max_a = std::max({max_a, c.area1, c.area2});
    max_m = std::max({max_m, c.margin1, c.margin2});
  }
  for (size_t i = 0; i < topk.size(); ++i) {
    const CandidateSplit& c = topk[i];
    s.values[4 * i + 0] = max_a > 0 ? c.area1 / max_a : 0.0;
    s.values[4 * i + 1] = max_a > 0 ? c.area2 / max_a : 0.0;
    s.values[4 * i + 2] = max_m > 0 ? c.margin1 / max_m : 0.0;
    s.values[4 * i + 3] = max_m > 0 ? c.margin2 / max_m : 0.0;
  }
  return s;
}

std::optional<CandidateSplit> split_special_case(const CandidateSplitSet& set) {
  if (set.zero_overlap.size() > 1) return std::nullopt;
  if (set.all.empty())
    throw std::logic_error("split_special_case: empty candidate set");
  const CandidateSplit* best = &set.all.front();
  for (const CandidateSplit& c : set.all) {
    if (c.overlap < best->overlap ||
        (c.overlap == best->overlap &&
         (c.total_area() < best->total_area() ||
          (c.total_area() == best->total_area() &&
           (c.axis < best->axis ||
            (c.axis == best->axis && c.position < best->position))))))
      best = &c;
  }
  return *best;
}

}  // namespace rlr
