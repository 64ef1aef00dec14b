#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "rlr/features.hpp"
#include "support/oracles.hpp"

using namespace rlr;

namespace {

// Two-level tree: root children carry the given boxes; child i is a leaf
// stuffed with `fills[i]` entries so occupancy is controllable.
RTree feature_tree(const std::vector<Rect>& child_boxes,
                   const std::vector<int>& fills, int max_entries = 10) {
  std::vector<Node> nodes(child_boxes.size() + 1);
  Node& root = nodes[0];
  root.level = 1;
  root.parent = kInvalidNode;
  size_t objects = 0;
  for (size_t i = 0; i < child_boxes.size(); ++i) {
    root.entries.push_back({static_cast<int64_t>(i + 1), child_boxes[i]});
    Node& leaf = nodes[i + 1];
    leaf.level = 0;
    leaf.parent = 0;
    for (int f = 0; f < fills[i]; ++f)
      leaf.entries.push_back(
          {static_cast<int64_t>(i * 100 + f), child_boxes[i]});
    objects += static_cast<size_t>(fills[i]);
  }
  return RTree::from_nodes(2, max_entries, 2, std::move(nodes), 0, objects);
}

Entry entry(int64_t id, double lox, double loy, double hix, double hiy) {
  return Entry{id, make_rect_2d(lox, loy, hix, hiy)};
}

std::vector<Entry> collinear_unit_squares(int n) {
  std::vector<Entry> e;
  for (int i = 0; i < n; ++i) e.push_back(entry(i, i, 0, i + 1, 1));
  return e;
}

// Same squares with ids out of x order, so the y-axis tie-break by id yields
// groupings that straddle the line instead of mirroring the x splits.
std::vector<Entry> collinear_scrambled() {
  const int ids[5] = {2, 0, 3, 1, 4};
  std::vector<Entry> e;
  for (int i = 0; i < 5; ++i) e.push_back(entry(ids[i], i, 0, i + 1, 1));
  return e;
}

}  // namespace

TEST_CASE("candidate ranking orders by area increase") {
  const std::vector<Rect> boxes{make_rect_2d(0, 0, 1, 1),
                                make_rect_2d(2, 2, 3, 3)};
  RTree t = feature_tree(boxes, {4, 7});
  ObjectRecord obj;
  obj.mbr = make_rect_2d(1.5, 1.5, 1.6, 1.6);

  const auto cands = rank_candidate_children(t, t.root(), obj, 2);
  REQUIRE(cands.size() == 2);
  CHECK(cands[0].entry_index == 1);  // cheaper growth first
  CHECK(cands[0].delta_area == doctest::Approx(1.25));
  CHECK(cands[1].entry_index == 0);
  CHECK(cands[1].delta_area == doctest::Approx(1.56));
  CHECK(cands[0].occupancy == doctest::Approx(0.7));
  CHECK(cands[1].occupancy == doctest::Approx(0.4));
  CHECK(cands[0].delta_overlap == 0.0);
  CHECK(cands[1].delta_overlap == 0.0);

  // margins: box 1 grows from [2,3]^2 to [1.5,3]^2: margin 3 - 2 = 1
  CHECK(cands[0].delta_margin == doctest::Approx(1.0));
}

TEST_CASE("candidate ranking with fewer children than k") {
  RTree t = feature_tree({make_rect_2d(0, 0, 1, 1)}, {5});
  ObjectRecord obj;
  obj.mbr = make_rect_2d(2, 2, 3, 3);
  const auto cands = rank_candidate_children(t, t.root(), obj, 2);
  REQUIRE(cands.size() == 1);
  const StateVector s = choose_state(cands, 2);
  CHECK(s.valid_actions == 1);
}

TEST_CASE("top-k agrees with a full sort over many children") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> pos(0, 1), side(0.01, 0.1);
  std::vector<Rect> boxes;
  std::vector<int> fills;
  for (int i = 0; i < 50; ++i) {
    const double x = pos(rng), y = pos(rng), w = side(rng), h = side(rng);
    boxes.push_back(make_rect_2d(x, y, x + w, y + h));
    fills.push_back(2 + static_cast<int>(rng() % 9));
  }
  RTree t = feature_tree(boxes, fills);
  ObjectRecord obj;
  obj.mbr = make_rect_2d(0.5, 0.5, 0.52, 0.52);

  const auto top2 = rank_candidate_children(t, t.root(), obj, 2);
  REQUIRE(top2.size() == 2);
  const auto full = rank_candidate_children(t, t.root(), obj, 50);
  REQUIRE(full.size() == 50);
  CHECK(top2[0].entry_index == full[0].entry_index);
  CHECK(top2[1].entry_index == full[1].entry_index);
  for (size_t i = 0; i + 1 < full.size(); ++i)
    CHECK(full[i].delta_area <= full[i + 1].delta_area);
  // the two minima really are minimal over the other 48
  for (size_t i = 2; i < full.size(); ++i)
    CHECK(top2[1].delta_area <= full[i].delta_area);
}

TEST_CASE("choose state normalizes against the candidate maxima") {
  const std::vector<Rect> boxes{make_rect_2d(0, 0, 1, 1),
                                make_rect_2d(2, 2, 3, 3)};
  RTree t = feature_tree(boxes, {4, 7});
  ObjectRecord obj;
  obj.mbr = make_rect_2d(1.5, 1.5, 1.6, 1.6);
  const auto cands = rank_candidate_children(t, t.root(), obj, 2);
  const StateVector s = choose_state(cands, 2);
  REQUIRE(s.values.size() == 8);
  CHECK(s.valid_actions == 2);
  CHECK(s.values[0] == doctest::Approx(1.25 / 1.56));
  CHECK(s.values[4] == doctest::Approx(1.0));
  CHECK(s.values[2] == 0.0);  // zero-max overlap feature maps to zero
  CHECK(s.values[6] == 0.0);
  CHECK(s.values[3] == doctest::Approx(0.7));
  CHECK(s.values[7] == doctest::Approx(0.4));
}

TEST_CASE("choose state with zero enlargements everywhere") {
  // the object fits inside both children: area/margin/overlap features all 0
  const std::vector<Rect> boxes{make_rect_2d(0, 0, 2, 2),
                                make_rect_2d(0.5, 0.5, 2.5, 2.5)};
  RTree t = feature_tree(boxes, {3, 9});
  ObjectRecord obj;
  obj.mbr = make_rect_2d(0.6, 0.6, 0.7, 0.7);
  const auto cands = rank_candidate_children(t, t.root(), obj, 2);
  const StateVector s = choose_state(cands, 2);
  for (int i : {0, 1, 2, 4, 5, 6}) CHECK(s.values[static_cast<size_t>(i)] == 0.0);
  CHECK(s.values[3] > 0.0);  // occupancy passes through
  CHECK(s.values[7] > 0.0);
}

TEST_CASE("single candidate pads the rest of the state") {
  RTree t = feature_tree({make_rect_2d(0, 0, 1, 1)}, {5});
  ObjectRecord obj;
  obj.mbr = make_rect_2d(2, 2, 3, 3);
  const auto cands = rank_candidate_children(t, t.root(), obj, 3);
  const StateVector s = choose_state(cands, 3);
  REQUIRE(s.values.size() == 12);
  CHECK(s.valid_actions == 1);
  for (size_t i = 4; i < 12; ++i) CHECK(s.values[i] == 0.0);
}

TEST_CASE("containment shortcut") {
  const std::vector<Rect> boxes{make_rect_2d(0, 0, 4, 4),
                                make_rect_2d(1, 1, 3, 3),
                                make_rect_2d(10, 10, 11, 11)};
  RTree t = feature_tree(boxes, {2, 2, 2});
  ObjectRecord obj;

  obj.mbr = make_rect_2d(10.2, 10.2, 10.4, 10.4);  // only inside child 2
  CHECK(containment_shortcut(t, t.root(), obj) == 2);

  obj.mbr = make_rect_2d(1.5, 1.5, 2.5, 2.5);  // inside both nested children
  CHECK(containment_shortcut(t, t.root(), obj) == 1);  // smaller area wins

  obj.mbr = make_rect_2d(3.5, 3.5, 10.5, 10.5);  // straddles everything
  CHECK(!containment_shortcut(t, t.root(), obj).has_value());
}

TEST_CASE("candidate split enumeration on collinear squares") {
  const auto e = collinear_scrambled();  // M=4, m=2
  const CandidateSplitSet set = enumerate_candidate_splits(e, 2, 4);
  // M+2-2m = 2 per dimension
  CHECK(set.all.size() == 4);
  REQUIRE(set.zero_overlap.size() == 2);
  for (const CandidateSplit& c : set.zero_overlap) {
    CHECK(c.axis == 0);
    CHECK(c.total_area() == doctest::Approx(5.0));
    CHECK(c.overlap == 0.0);
  }
  // y-axis splits fully overlap and never enter the clean list
  for (const CandidateSplit& c : set.all)
    if (c.axis == 1) CHECK(c.overlap > 0.0);
}

TEST_CASE("identical entries leave no overlap-free split") {
  std::vector<Entry> same;
  for (int i = 0; i < 5; ++i) same.push_back(entry(i, 0, 0, 1, 1));
  const CandidateSplitSet set = enumerate_candidate_splits(same, 2, 4);
  CHECK(set.zero_overlap.empty());
  CHECK(set.all.size() == 4);
}

TEST_CASE("candidate splits are contiguous runs of the sorted sequence") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0, 1), side(0, 0.2);
  for (int it = 0; it < 200; ++it) {
    std::vector<Entry> e;
    for (int i = 0; i < 9; ++i) {
      const double x = pos(rng), y = pos(rng), w = side(rng), h = side(rng);
      e.push_back(entry(i, x, y, x + w, y + h));
    }
    const CandidateSplitSet set = enumerate_candidate_splits(e, 3, 8);
    CHECK(set.all.size() == 2 * (8 + 2 - 2 * 3));
    for (const CandidateSplit& c : set.all) {
      CHECK(static_cast<int>(c.group1.size()) == c.position);
      // reconstruct from (axis, position) over an independent sort
      std::vector<int> idx(e.size());
      for (size_t i = 0; i < e.size(); ++i) idx[i] = static_cast<int>(i);
      std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        const Rect& ra = e[static_cast<size_t>(a)].rect;
        const Rect& rb = e[static_cast<size_t>(b)].rect;
        if (ra.lo(c.axis) != rb.lo(c.axis)) return ra.lo(c.axis) < rb.lo(c.axis);
        if (ra.hi(c.axis) != rb.hi(c.axis)) return ra.hi(c.axis) < rb.hi(c.axis);
        return e[static_cast<size_t>(a)].id < e[static_cast<size_t>(b)].id;
      });
      const std::vector<int> expect1(idx.begin(), idx.begin() + c.position);
      CHECK(c.group1 == expect1);
    }
  }
}

TEST_CASE("split state features") {
  const auto e = collinear_scrambled();
  const CandidateSplitSet set = enumerate_candidate_splits(e, 2, 4);
  REQUIRE(set.zero_overlap.size() == 2);
  const StateVector s = split_state(set.zero_overlap, 2);
  REQUIRE(s.values.size() == 8);
  CHECK(s.valid_actions == 2);
  // groups of areas {2,3} and margins {3,4} against maxima 3 and 4
  CHECK(s.values[0] == doctest::Approx(2.0 / 3.0));
  CHECK(s.values[1] == doctest::Approx(1.0));
  CHECK(s.values[2] == doctest::Approx(3.0 / 4.0));
  CHECK(s.values[3] == doctest::Approx(1.0));
  CHECK(s.values[4] == doctest::Approx(1.0));
  CHECK(s.values[5] == doctest::Approx(2.0 / 3.0));
  CHECK(s.values[6] == doctest::Approx(1.0));
  CHECK(s.values[7] == doctest::Approx(3.0 / 4.0));

  // identical geometry produces identical feature blocks
  std::vector<CandidateSplit> twins{set.zero_overlap[0], set.zero_overlap[0]};
  const StateVector ts = split_state(twins, 2);
  for (int i = 0; i < 4; ++i)
    CHECK(ts.values[static_cast<size_t>(i)] ==
          ts.values[static_cast<size_t>(i + 4)]);

  // single candidate: its larger group normalizes to exactly one
  std::vector<CandidateSplit> solo{set.zero_overlap[0]};
  const StateVector ss = split_state(solo, 2);
  CHECK(ss.valid_actions == 1);
  CHECK(std::max(ss.values[0], ss.values[1]) == 1.0);
  CHECK(std::max(ss.values[2], ss.values[3]) == 1.0);
  for (size_t i = 4; i < 8; ++i) CHECK(ss.values[i] == 0.0);
}

TEST_CASE("split special case") {
  // three clean splits: the model decides
  const auto spread = collinear_unit_squares(7);  // M=6, m=2: x positions 2..5
  const CandidateSplitSet many = enumerate_candidate_splits(spread, 2, 6);
  REQUIRE(many.zero_overlap.size() >= 3);
  CHECK(!split_special_case(many).has_value());

  // no clean split at all: global minimum overlap wins
  std::vector<Entry> messy;
  for (int i = 0; i < 5; ++i)
    messy.push_back(entry(i, 0.1 * i, 0, 1 + 0.1 * i, 1));
  const CandidateSplitSet none = enumerate_candidate_splits(messy, 2, 4);
  REQUIRE(none.zero_overlap.empty());
  const auto forced = split_special_case(none);
  REQUIRE(forced.has_value());
  for (const CandidateSplit& c : none.all) CHECK(forced->overlap <= c.overlap);

  // exactly one clean split: it is forced
  std::vector<Entry> pair_layout;
  pair_layout.push_back(entry(0, 0, 0, 1, 1));
  pair_layout.push_back(entry(1, 0.2, 0, 1.2, 1));
  pair_layout.push_back(entry(2, 5, 0, 6, 1));
  pair_layout.push_back(entry(3, 5.1, 0, 6.1, 1));
  pair_layout.push_back(entry(4, 0.1, 0, 1.1, 1));
  const CandidateSplitSet one = enumerate_candidate_splits(pair_layout, 2, 4);
  REQUIRE(one.zero_overlap.size() == 1);
  const auto taken = split_special_case(one);
  REQUIRE(taken.has_value());
  CHECK(taken->overlap == 0.0);
}

TEST_CASE("state values stay in the unit interval") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> pos(0, 1), side(0, 0.3);
  for (int it = 0; it < 200; ++it) {
    std::vector<Rect> boxes;
    std::vector<int> fills;
    const int n = 2 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      const double x = pos(rng), y = pos(rng), w = side(rng), h = side(rng);
      boxes.push_back(make_rect_2d(x, y, x + w, y + h));
      fills.push_back(2 + static_cast<int>(rng() % 9));
    }
    RTree t = feature_tree(boxes, fills);
    ObjectRecord obj;
    const double x = pos(rng), y = pos(rng);
    obj.mbr = make_rect_2d(x, y, x + 0.01, y + 0.01);
    const int k = 2 + static_cast<int>(rng() % 3);
    const auto cands = rank_candidate_children(t, t.root(), obj, k);
    const StateVector s = choose_state(cands, k);
    CHECK(static_cast<int>(s.values.size()) == 4 * k);
    for (double v : s.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }

    std::vector<Entry> overflow;
    for (int i = 0; i < 9; ++i) {
      const double ox = pos(rng), oy = pos(rng), w = side(rng), h = side(rng);
      overflow.push_back(entry(i, ox, oy, ox + w, oy + h));
    }
    const CandidateSplitSet set = enumerate_candidate_splits(overflow, 3, 8);
    const size_t take = std::min<size_t>(static_cast<size_t>(k), set.all.size());
    const StateVector sv = split_state(
        std::span<const CandidateSplit>(set.all.data(), take), k);
    for (double v : sv.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("scaling all coordinates leaves features unchanged") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pos(0, 1), side(0.01, 0.3);
  std::vector<Rect> boxes;
  std::vector<int> fills;
  for (int i = 0; i < 8; ++i) {
    const double x = pos(rng), y = pos(rng), w = side(rng), h = side(rng);
    boxes.push_back(make_rect_2d(x, y, x + w, y + h));
    fills.push_back(3 + static_cast<int>(rng() % 7));
  }
  ObjectRecord obj;
  obj.mbr = make_rect_2d(0.4, 0.4, 0.45, 0.45);

  for (double lambda : {0.25, 2.0, 1024.0}) {  // exact binary scale factors
    std::vector<Rect> scaled = boxes;
    for (Rect& r : scaled)
      for (int d = 0; d < 2; ++d) {
        r.lo(d) *= lambda;
        r.hi(d) *= lambda;
      }
    ObjectRecord sobj = obj;
    for (int d = 0; d < 2; ++d) {
      sobj.mbr.lo(d) *= lambda;
      sobj.mbr.hi(d) *= lambda;
    }
    RTree t1 = feature_tree(boxes, fills);
    RTree t2 = feature_tree(scaled, fills);
    const auto c1 = rank_candidate_children(t1, t1.root(), obj, 3);
    const auto c2 = rank_candidate_children(t2, t2.root(), sobj, 3);
    REQUIRE(c1.size() == c2.size());
    for (size_t i = 0; i < c1.size(); ++i)
      CHECK(c1[i].entry_index == c2[i].entry_index);
    const StateVector s1 = choose_state(c1, 3);
    const StateVector s2 = choose_state(c2, 3);
    for (size_t i = 0; i < s1.values.size(); ++i)
      CHECK(s1.values[i] == s2.values[i]);
  }
}
