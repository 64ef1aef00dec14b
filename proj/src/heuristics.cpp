#include "rlr/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rlr/features.hpp"

namespace rlr {
namespace {

struct SeedPair {
  int a = 0, b = 1;
};

// Guttman's quadratic PickSeeds: the pair wasting the most area, ties by
// lexicographically lowest (i, j).
SeedPair pick_seeds_quadratic(std::span<const Entry> entries) {
  const int n = static_cast<int>(entries.size());
  SeedPair best;
  double best_d = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double ai = entries[static_cast<size_t>(i)].rect.area();
    for (int j = i + 1; j < n; ++j) {
      const Rect u = rect_union(entries[static_cast<size_t>(i)].rect,
                                entries[static_cast<size_t>(j)].rect);
      const double d = u.area() - ai - entries[static_cast<size_t>(j)].rect.area();
      if (d > best_d) {
        best_d = d;
        best = {i, j};
      }
    }
  }
  return best;
}

// Shared distribution loop: assign the remaining entries one at a time to the
// group whose MBR needs the least enlargement (ties: smaller area, fewer
// entries, group 1), forcing assignment when one group must take all the rest
// to reach the minimum fill.
struct Distributor {
  std::span<const Entry> entries;
  int min_fill;
  SplitGroups groups;
  Rect mbr1, mbr2;

  Distributor(std::span<const Entry> e, int m, int seed1, int seed2)
      : entries(e), min_fill(m) {
    groups.group1.push_back(seed1);
    groups.group2.push_back(seed2);
    mbr1 = e[static_cast<size_t>(seed1)].rect;
    mbr2 = e[static_cast<size_t>(seed2)].rect;
  }

  bool force_if_needed(std::vector<int>& remaining) {
    const size_t need1 =
        static_cast<size_t>(min_fill) > groups.group1.size()
            ? static_cast<size_t>(min_fill) - groups.group1.size()
            : 0;
    const size_t need2 =
        static_cast<size_t>(min_fill) > groups.group2.size()
            ? static_cast<size_t>(min_fill) - groups.group2.size()
            : 0;
    if (remaining.size() == need1) {
      for (int idx : remaining) assign(idx, true);
      remaining.clear();
      return true;
    }
    if (remaining.size() == need2) {
      for (int idx : remaining) assign(idx, false);
      remaining.clear();
      return true;
    }
    return false;
  }

  void assign(int idx, bool to_first) {
    const Rect& r = entries[static_cast<size_t>(idx)].rect;
    if (to_first) {
      groups.group1.push_back(idx);
      rect_extend(mbr1, r);
    } else {
      groups.group2.push_back(idx);
      rect_extend(mbr2, r);
    }
  }

  void assign_least_enlargement(int idx) {
    const Rect& r = entries[static_cast<size_t>(idx)].rect;
    const double d1 = rect_enlargement(mbr1, r);
    const double d2 = rect_enlargement(mbr2, r);
    bool to_first;
    if (d1 != d2) {
      to_first = d1 < d2;
    } else {
      const double a1 = mbr1.area(), a2 = mbr2.area();
      if (a1 != a2)
        to_first = a1 < a2;
      else
        to_first = groups.group1.size() <= groups.group2.size();
    }
    assign(idx, to_first);
  }
};

double axis_extent(std::span<const Entry> entries, int axis) {
  double lo = entries.front().rect.lo(axis);
  double hi = entries.front().rect.hi(axis);
  for (const Entry& e : entries) {
    lo = std::min(lo, e.rect.lo(axis));
    hi = std::max(hi, e.rect.hi(axis));
  }
  return hi - lo;
}

const CandidateSplit* min_overlap_candidate(std::span<const CandidateSplit> cs) {
  const CandidateSplit* best = &cs.front();
  for (const CandidateSplit& c : cs) {
    if (c.overlap < best->overlap ||
        (c.overlap == best->overlap &&
         (c.total_area() < best->total_area() ||
          (c.total_area() == best->total_area() &&
           (c.axis < best->axis ||
            (c.axis == best->axis && c.position < best->position))))))
      best = &c;
  }
  return best;
}

}  // namespace

int choose_min_area_enlargement(std::span<const Entry> entries,
                                const ObjectRecord& obj) {
  if (entries.empty())
    throw std::invalid_argument("choose_min_area_enlargement: empty node");
  int best = 0;
  double best_enl = std::numeric_limits<double>::infinity();
  double best_area = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < entries.size(); ++i) {
    const Rect u = rect_union(entries[i].rect, obj.mbr);
    const double ua = u.area();
    const double enl = ua - entries[i].rect.area();
    if (enl < best_enl || (enl == best_enl && ua < best_area)) {
      best = static_cast<int>(i);
      best_enl = enl;
      best_area = ua;
    }
  }
  return best;
}

int choose_rstar(const RTree& tree, NodeId node, const ObjectRecord& obj) {
  const Node& nd = tree.node(node);
  if (nd.entries.empty()) throw std::invalid_argument("choose_rstar: empty node");
  if (nd.level != 1)
    return choose_min_area_enlargement(nd.entries, obj);

  // Children are leaves: minimize overlap enlargement with the siblings,
  // ties by area enlargement, then entry area, then index.
  const auto& entries = nd.entries;
  int best = 0;
  double best_ovlp = std::numeric_limits<double>::infinity();
  double best_enl = 0, best_area = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    const Rect u = rect_union(entries[i].rect, obj.mbr);
    double d_ovlp = 0;
    for (size_t j = 0; j < entries.size(); ++j) {
      if (j == i) continue;
      d_ovlp += rect_overlap_area(u, entries[j].rect) -
                rect_overlap_area(entries[i].rect, entries[j].rect);
    }
    const double area = entries[i].rect.area();
    const double enl = u.area() - area;
    if (d_ovlp < best_ovlp ||
        (d_ovlp == best_ovlp &&
         (enl < best_enl || (enl == best_enl && area < best_area)))) {
      best = static_cast<int>(i);
      best_ovlp = d_ovlp;
      best_enl = enl;
      best_area = area;
    }
  }
  return best;
}

SplitGroups split_quadratic(std::span<const Entry> entries, int min_fill,
                            int max_fill) {
  if (entries.size() != static_cast<size_t>(max_fill) + 1)
    throw std::invalid_argument("split_quadratic: need M+1 entries");
  const SeedPair seeds = pick_seeds_quadratic(entries);
  Distributor dist(entries, min_fill, seeds.a, seeds.b);
  std::vector<int> remaining;
  for (int i = 0; i < static_cast<int>(entries.size()); ++i)
    if (i != seeds.a && i != seeds.b) remaining.push_back(i);

  while (!remaining.empty()) {
    if (dist.force_if_needed(remaining)) break;
    // PickNext: the entry with the strongest group preference.
    size_t pick = 0;
    double best_diff = -1.0;
    double pick_d1 = 0, pick_d2 = 0;
    for (size_t r = 0; r < remaining.size(); ++r) {
      const Rect& rect = entries[static_cast<size_t>(remaining[r])].rect;
      const double d1 = rect_enlargement(dist.mbr1, rect);
      const double d2 = rect_enlargement(dist.mbr2, rect);
      const double diff = std::abs(d1 - d2);
      if (diff > best_diff) {
        best_diff = diff;
        pick = r;
        pick_d1 = d1;
        pick_d2 = d2;
      }
    }
    const int idx = remaining[pick];
    remaining.erase(remaining.begin() + static_cast<long>(pick));
    if (pick_d1 != pick_d2) {
      dist.assign(idx, pick_d1 < pick_d2);
    } else {
      dist.assign_least_enlargement(idx);
    }
  }
  return std::move(dist.groups);
}

SplitGroups split_linear(std::span<const Entry> entries, int min_fill,
                         int max_fill) {
  if (entries.size() != static_cast<size_t>(max_fill) + 1)
    throw std::invalid_argument("split_linear: need M+1 entries");
  const int n = static_cast<int>(entries.size());
  const int dims = entries.front().rect.dims;

  // Per dimension: the entry with the highest low side and the one with the
  // lowest high side; their separation normalized by the total extent.
  int seed_a = 0, seed_b = 1;
  double best_sep = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (int d = 0; d < dims; ++d) {
    int max_lo = 0, min_hi = 0;
    for (int i = 1; i < n; ++i) {
      if (entries[static_cast<size_t>(i)].rect.lo(d) >
          entries[static_cast<size_t>(max_lo)].rect.lo(d))
        max_lo = i;
      if (entries[static_cast<size_t>(i)].rect.hi(d) <
          entries[static_cast<size_t>(min_hi)].rect.hi(d))
        min_hi = i;
    }
    if (max_lo == min_hi) continue;  // cannot separate along this dimension
    const double extent = axis_extent(entries, d);
    const double raw = entries[static_cast<size_t>(max_lo)].rect.lo(d) -
                       entries[static_cast<size_t>(min_hi)].rect.hi(d);
    const double sep = extent > 0 ? raw / extent : 0.0;
    if (sep > best_sep) {
      best_sep = sep;
      seed_a = std::min(max_lo, min_hi);
      seed_b = std::max(max_lo, min_hi);
      found = true;
    }
  }
  if (!found) {
    seed_a = 0;
    seed_b = 1;
  }

  Distributor dist(entries, min_fill, seed_a, seed_b);
  std::vector<int> remaining;
  for (int i = 0; i < n; ++i)
    if (i != seed_a && i != seed_b) remaining.push_back(i);
  while (!remaining.empty()) {
    if (dist.force_if_needed(remaining)) break;
    const int idx = remaining.front();
    remaining.erase(remaining.begin());
    dist.assign_least_enlargement(idx);
  }
  return std::move(dist.groups);
}

SplitGroups split_greene(std::span<const Entry> entries, int min_fill,
                         int max_fill) {
  (void)min_fill;  // fixed halves always satisfy m <= M/2 < (M+1)/2
  if (entries.size() != static_cast<size_t>(max_fill) + 1)
    throw std::invalid_argument("split_greene: need M+1 entries");
  const int n = static_cast<int>(entries.size());
  const int dims = entries.front().rect.dims;

  const SeedPair seeds = pick_seeds_quadratic(entries);
  const Rect& ra = entries[static_cast<size_t>(seeds.a)].rect;
  const Rect& rb = entries[static_cast<size_t>(seeds.b)].rect;
  int axis = 0;
  double best_sep = -std::numeric_limits<double>::infinity();
  for (int d = 0; d < dims; ++d) {
    const double gap = std::max(ra.lo(d), rb.lo(d)) - std::min(ra.hi(d), rb.hi(d));
    const double extent = axis_extent(entries, d);
    const double sep = extent > 0 ? gap / extent : 0.0;
    if (sep > best_sep) {
      best_sep = sep;
      axis = d;
    }
  }

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Rect& x = entries[static_cast<size_t>(a)].rect;
    const Rect& y = entries[static_cast<size_t>(b)].rect;
    if (x.lo(axis) != y.lo(axis)) return x.lo(axis) < y.lo(axis);
    if (x.hi(axis) != y.hi(axis)) return x.hi(axis) < y.hi(axis);
    return entries[static_cast<size_t>(a)].id < entries[static_cast<size_t>(b)].id;
  });

  const int half = n / 2;
  SplitGroups g;
  g.group1.assign(order.begin(), order.begin() + half);
  g.group2.assign(order.end() - half, order.end());
  if (n % 2 != 0) {
    // Middle entry joins the group with the smaller covering area (tie: 1).
    Rect m1 = entries[static_cast<size_t>(g.group1.front())].rect;
    for (int i : g.group1) rect_extend(m1, entries[static_cast<size_t>(i)].rect);
    Rect m2 = entries[static_cast<size_t>(g.group2.front())].rect;
    for (int i : g.group2) rect_extend(m2, entries[static_cast<size_t>(i)].rect);
    const int middle = order[static_cast<size_t>(half)];
    if (m2.area() < m1.area())
      g.group2.insert(g.group2.begin(), middle);
    else
      g.group1.push_back(middle);
  }
  return g;
}

SplitGroups split_rstar_topology(std::span<const Entry> entries, int min_fill,
                                 int max_fill) {
  const CandidateSplitSet set =
      enumerate_candidate_splits(entries, min_fill, max_fill);
  const int dims = entries.front().rect.dims;

  // Axis with the minimum margin sum over its candidates, ties to lower axis.
  std::vector<double> margin_sum(static_cast<size_t>(dims), 0.0);
  for (const CandidateSplit& c : set.all)
    margin_sum[static_cast<size_t>(c.axis)] += c.total_margin();
  int axis = 0;
  for (int d = 1; d < dims; ++d)
    if (margin_sum[static_cast<size_t>(d)] < margin_sum[static_cast<size_t>(axis)])
      axis = d;

  // Within the axis: minimum overlap, ties by total area, then position.
  const CandidateSplit* best = nullptr;
  for (const CandidateSplit& c : set.all) {
    if (c.axis != axis) continue;
    if (best == nullptr || c.overlap < best->overlap ||
        (c.overlap == best->overlap &&
         (c.total_area() < best->total_area() ||
          (c.total_area() == best->total_area() && c.position < best->position))))
      best = &c;
  }
  return {best->group1, best->group2};
}

SplitGroups split_min_overlap_partition(std::span<const Entry> entries,
                                        int min_fill, int max_fill) {
  const CandidateSplitSet set =
      enumerate_candidate_splits(entries, min_fill, max_fill);
  const CandidateSplit* best = min_overlap_candidate(set.all);
  return {best->group1, best->group2};
}

SplitGroups run_split(SplitRule rule, std::span<const Entry> entries,
                      int min_fill, int max_fill) {
  switch (rule) {
    case SplitRule::kLinear:
      return split_linear(entries, min_fill, max_fill);
    case SplitRule::kQuadratic:
      return split_quadratic(entries, min_fill, max_fill);
    case SplitRule::kGreene:
      return split_greene(entries, min_fill, max_fill);
    case SplitRule::kRStarTopology:
      return split_rstar_topology(entries, min_fill, max_fill);
    case SplitRule::kMinOverlapPartition:
      return split_min_overlap_partition(entries, min_fill, max_fill);
  }
  throw std::logic_error("run_split: unknown rule");
}

int HeuristicPolicy::choose_subtree(const RTree& tree, NodeId node,
                                    const ObjectRecord& obj) {
  switch (id_.choose_rule) {
    case ChooseRule::kMinAreaEnlargement:
      return choose_min_area_enlargement(tree.node(node).entries, obj);
    case ChooseRule::kRStarOverlap:
      return choose_rstar(tree, node, obj);
  }
  throw std::logic_error("choose_subtree: unknown rule");
}

SplitGroups HeuristicPolicy::split(const RTree& tree,
                                   std::span<const Entry> overflow,
                                   int min_fill, int max_fill) {
  (void)tree;
  return run_split(id_.split_rule, overflow, min_fill, max_fill);
}

HeuristicId heuristic_from_name(const std::string& name) {
  if (name == "guttman-linear")
    return {ChooseRule::kMinAreaEnlargement, SplitRule::kLinear};
  if (name == "guttman-quadratic")
    return {ChooseRule::kMinAreaEnlargement, SplitRule::kQuadratic};
  if (name == "greene")
    return {ChooseRule::kMinAreaEnlargement, SplitRule::kGreene};
  if (name == "rstar")
    return {ChooseRule::kRStarOverlap, SplitRule::kRStarTopology};
  if (name == "ref") return reference_heuristic();
  throw DataError("unknown policy name '" + name + "' (expected one of " +
                  heuristic_policy_names() + ")");
}

std::string heuristic_policy_names() {
  return "guttman-linear, guttman-quadratic, greene, rstar, ref";
}

}  // namespace rlr
