#include "rlr/rtree.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace rlr {
namespace {

int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

RTree::RTree(int dims, int max_entries, int min_entries)
    : dims_(dims), max_entries_(max_entries), min_entries_(min_entries) {
  if (dims < 1 || dims > Rect::kMaxDims)
    throw std::invalid_argument("RTree: unsupported dims");
  if (min_entries < 1 || max_entries < 2 * min_entries)
    throw std::invalid_argument("RTree: need 1 <= m <= M/2");
  root_ = alloc_node(0, kInvalidNode);
}

void RTree::touch(NodeId id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.touch_full != epoch_) {
    n.touch_full = epoch_;
    touched_full_.push_back(id);
  }
}

void RTree::touch_parent_link(NodeId id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.touch_full == epoch_ || n.touch_parent == epoch_) return;
  n.touch_parent = epoch_;
  touched_parent_.push_back(id);
}

NodeId RTree::alloc_node(int32_t level, NodeId parent) {
  const NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.emplace_back();
  nodes_.back().level = level;
  nodes_.back().parent = parent;
  touch(id);
  return id;
}

Rect RTree::node_mbr(NodeId id) const {
  const Node& n = nodes_[static_cast<size_t>(id)];
  Rect r;
  r.dims = dims_;
  if (n.entries.empty()) return r;
  r = n.entries.front().rect;
  for (size_t i = 1; i < n.entries.size(); ++i) rect_extend(r, n.entries[i].rect);
  return r;
}

int RTree::entry_index_in_parent(NodeId child) const {
  const Node& p = nodes_[static_cast<size_t>(nodes_[static_cast<size_t>(child)].parent)];
  for (size_t i = 0; i < p.entries.size(); ++i)
    if (p.entries[i].id == child) return static_cast<int>(i);
  throw std::logic_error("RTree: child entry missing from parent");
}

NodeId RTree::descend(const std::function<int(NodeId)>& choose) const {
  NodeId n = root_;
  while (nodes_[static_cast<size_t>(n)].level > 0) {
    const Node& nd = nodes_[static_cast<size_t>(n)];
    const int idx = choose(n);
    if (idx < 0 || static_cast<size_t>(idx) >= nd.entries.size())
      throw std::logic_error("RTree: choose_subtree returned invalid index");
    n = static_cast<NodeId>(nd.entries[static_cast<size_t>(idx)].id);
  }
  return n;
}

bool RTree::add_to_leaf(NodeId leaf, const ObjectRecord& obj) {
  if (obj.mbr.dims != dims_)
    throw std::invalid_argument("RTree: object dimension mismatch");
  touch(leaf);
  Node& nd = nodes_[static_cast<size_t>(leaf)];
  nd.entries.push_back({obj.id, obj.mbr});
  ++object_count_;
  return nd.entries.size() > static_cast<size_t>(max_entries_);
}

void RTree::apply_split(NodeId node_id, const SplitGroups& groups,
                        NodeId* out_new) {
  const size_t total = nodes_[static_cast<size_t>(node_id)].entries.size();
  const size_t lo = static_cast<size_t>(min_entries_);
  const size_t hi = total - lo;
  if (groups.group1.size() + groups.group2.size() != total ||
      groups.group1.size() < lo || groups.group1.size() > hi ||
      groups.group2.size() < lo || groups.group2.size() > hi)
    throw std::logic_error("RTree: split produced invalid group sizes");
  std::vector<char> seen(total, 0);
  for (int i : groups.group1) seen.at(static_cast<size_t>(i)) += 1;
  for (int i : groups.group2) seen.at(static_cast<size_t>(i)) += 1;
  for (char s : seen)
    if (s != 1) throw std::logic_error("RTree: split is not a partition");

  const int32_t level = nodes_[static_cast<size_t>(node_id)].level;
  const NodeId parent = nodes_[static_cast<size_t>(node_id)].parent;
  const NodeId new_id = alloc_node(level, parent);  // may reallocate arena
  touch(node_id);

  std::vector<Entry> e1, e2;
  e1.reserve(groups.group1.size());
  e2.reserve(groups.group2.size());
  {
    Node& nd = nodes_[static_cast<size_t>(node_id)];
    for (int i : groups.group1) e1.push_back(nd.entries[static_cast<size_t>(i)]);
    for (int i : groups.group2) e2.push_back(nd.entries[static_cast<size_t>(i)]);
    nd.entries = std::move(e1);
  }
  nodes_[static_cast<size_t>(new_id)].entries = std::move(e2);

  if (level > 0) {
    for (const Entry& e : nodes_[static_cast<size_t>(new_id)].entries) {
      const NodeId child = static_cast<NodeId>(e.id);
      touch_parent_link(child);
      nodes_[static_cast<size_t>(child)].parent = new_id;
    }
  }
  *out_new = new_id;
}

void RTree::finish_insert(NodeId leaf, const SplitFn& split) {
  NodeId n = leaf;
  while (n != kInvalidNode) {
    const NodeId parent = nodes_[static_cast<size_t>(n)].parent;
    if (nodes_[static_cast<size_t>(n)].entries.size() >
        static_cast<size_t>(max_entries_)) {
      if (!split) throw std::logic_error("RTree: overflow without a split fn");
      const SplitGroups groups =
          split(n, std::span<const Entry>(nodes_[static_cast<size_t>(n)].entries));
      NodeId new_id = kInvalidNode;
      apply_split(n, groups, &new_id);
      const Rect r1 = node_mbr(n);
      const Rect r2 = node_mbr(new_id);
      if (parent == kInvalidNode) {
        const NodeId new_root = alloc_node(
            nodes_[static_cast<size_t>(n)].level + 1, kInvalidNode);
        nodes_[static_cast<size_t>(new_root)].entries = {{n, r1}, {new_id, r2}};
        touch_parent_link(n);
        touch_parent_link(new_id);
        nodes_[static_cast<size_t>(n)].parent = new_root;
        nodes_[static_cast<size_t>(new_id)].parent = new_root;
        root_ = new_root;
        break;
      }
      touch(parent);
      Node& p = nodes_[static_cast<size_t>(parent)];
      p.entries[static_cast<size_t>(entry_index_in_parent(n))].rect = r1;
      p.entries.push_back({new_id, r2});
      n = parent;
    } else {
      if (parent == kInvalidNode) break;
      const Rect u = node_mbr(n);
      Node& p = nodes_[static_cast<size_t>(parent)];
      Entry& pe = p.entries[static_cast<size_t>(entry_index_in_parent(n))];
      if (!(pe.rect == u)) {
        touch(parent);
        pe.rect = u;
      }
      n = parent;
    }
  }
}

void RTree::insert(const ObjectRecord& obj, InsertPolicy& policy) {
  const NodeId leaf =
      descend([&](NodeId n) { return policy.choose_subtree(*this, n, obj); });
  add_to_leaf(leaf, obj);
  finish_insert(leaf, [&](NodeId, std::span<const Entry> overflow) {
    return policy.split(*this, overflow, min_entries_, max_entries_);
  });
}

std::vector<int64_t> RTree::range_query(const Rect& window,
                                        QueryStats* stats) const {
  if (window.dims != dims_)
    throw std::invalid_argument("range_query: window dimension mismatch");
  const int64_t t0 = now_ns();
  std::vector<int64_t> out;
  uint64_t accesses = 0;
  std::vector<NodeId> stack;
  stack.push_back(root_);
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const Node& nd = nodes_[static_cast<size_t>(id)];
    ++accesses;
    if (nd.level == 0) {
      for (const Entry& e : nd.entries)
        if (rect_intersects(e.rect, window)) out.push_back(e.id);
    } else {
      for (const Entry& e : nd.entries)
        if (rect_intersects(e.rect, window))
          stack.push_back(static_cast<NodeId>(e.id));
    }
  }
  std::sort(out.begin(), out.end());
  if (stats != nullptr) {
    stats->node_accesses = accesses;
    stats->result_count = out.size();
    stats->elapsed_ns = now_ns() - t0;
  }
  return out;
}

KnnResult RTree::knn_query(std::span<const double> q, int k,
                           QueryStats* stats) const {
  if (static_cast<int>(q.size()) != dims_)
    throw std::invalid_argument("knn_query: point dimension mismatch");
  if (k < 1) throw std::invalid_argument("knn_query: K must be >= 1");
  const int64_t t0 = now_ns();

  using Cand = std::pair<double, int64_t>;  // (squared distance, id)
  // Worst current candidate on top.
  std::priority_queue<Cand> best;
  auto admits = [&](double d2, int64_t id) {
    if (best.size() < static_cast<size_t>(k)) return true;
    const Cand& w = best.top();
    return d2 < w.first || (d2 == w.first && id < w.second);
  };

  using Visit = std::pair<double, NodeId>;
  std::priority_queue<Visit, std::vector<Visit>, std::greater<Visit>> queue;
  queue.push({0.0, root_});
  uint64_t accesses = 0;
  while (!queue.empty()) {
    const auto [d2, id] = queue.top();
    queue.pop();
    if (best.size() == static_cast<size_t>(k) && d2 > best.top().first)
      continue;  // pruned, not accessed
    const Node& nd = nodes_[static_cast<size_t>(id)];
    ++accesses;
    if (nd.level == 0) {
      for (const Entry& e : nd.entries) {
        const double od2 = mindist_sq(e.rect, q);
        if (admits(od2, e.id)) {
          best.push({od2, e.id});
          if (best.size() > static_cast<size_t>(k)) best.pop();
        }
      }
    } else {
      for (const Entry& e : nd.entries) {
        const double cd2 = mindist_sq(e.rect, q);
        if (best.size() < static_cast<size_t>(k) || cd2 <= best.top().first)
          queue.push({cd2, static_cast<NodeId>(e.id)});
      }
    }
  }

  KnnResult res;
  res.short_result = static_cast<size_t>(k) > object_count_;
  std::vector<Cand> sorted;
  sorted.reserve(best.size());
  while (!best.empty()) {
    sorted.push_back(best.top());
    best.pop();
  }
  std::sort(sorted.begin(), sorted.end());
  res.ids.reserve(sorted.size());
  res.distances.reserve(sorted.size());
  for (const Cand& c : sorted) {
    res.ids.push_back(c.second);
    res.distances.push_back(std::sqrt(c.first));
  }
  if (stats != nullptr) {
    stats->node_accesses = accesses;
    stats->result_count = res.ids.size();
    stats->elapsed_ns = now_ns() - t0;
  }
  return res;
}

std::vector<std::string> RTree::validate() const {
  std::vector<std::string> out;
  auto complain = [&](NodeId id, const std::string& msg) {
    out.push_back("node " + std::to_string(id) + ": " + msg);
  };

  if (nodes_[static_cast<size_t>(root_)].parent != kInvalidNode)
    complain(root_, "root has a parent link");

  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> stack{root_};
  size_t leaf_entry_total = 0;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (seen[static_cast<size_t>(id)]) {
      complain(id, "reached twice (cycle or shared child)");
      continue;
    }
    seen[static_cast<size_t>(id)] = 1;
    const Node& nd = nodes_[static_cast<size_t>(id)];

    const size_t count = nd.entries.size();
    if (id == root_) {
      const size_t min_root = nd.level > 0 ? 2 : (object_count_ > 0 ? 1 : 0);
      if (count < min_root || count > static_cast<size_t>(max_entries_))
        complain(id, "root entry count " + std::to_string(count) +
                         " outside bounds");
    } else {
      if (count < static_cast<size_t>(min_entries_) ||
          count > static_cast<size_t>(max_entries_))
        complain(id, "entry count " + std::to_string(count) + " outside [" +
                         std::to_string(min_entries_) + "," +
                         std::to_string(max_entries_) + "]");
    }

    for (const Entry& e : nd.entries) {
      if (e.rect.dims != dims_ || !e.rect.valid()) {
        complain(id, "invalid entry rect");
        continue;
      }
      if (nd.level > 0) {
        if (e.id < 0 || static_cast<size_t>(e.id) >= nodes_.size()) {
          complain(id, "entry references missing node " + std::to_string(e.id));
          continue;
        }
        const NodeId child = static_cast<NodeId>(e.id);
        const Node& c = nodes_[static_cast<size_t>(child)];
        if (c.level != nd.level - 1)
          complain(id, "child " + std::to_string(child) + " level " +
                           std::to_string(c.level) + " != " +
                           std::to_string(nd.level - 1));
        if (c.parent != id)
          complain(id, "child " + std::to_string(child) + " parent link wrong");
        if (!(node_mbr(child) == e.rect))
          complain(id, "loose MBR for child " + std::to_string(child));
        stack.push_back(child);
      }
    }
    if (nd.level == 0) leaf_entry_total += count;
  }
  if (leaf_entry_total != object_count_)
    out.push_back("leaf entries " + std::to_string(leaf_entry_total) +
                  " != object count " + std::to_string(object_count_));
  return out;
}

RTree RTree::clone_structure() const {
  RTree t(dims_, max_entries_, min_entries_);
  t.clone_from(*this);
  return t;
}

void RTree::clone_from(const RTree& src) {
  if (dims_ != src.dims_ || max_entries_ != src.max_entries_ ||
      min_entries_ != src.min_entries_)
    throw std::invalid_argument("clone_from: tree parameter mismatch");
  nodes_ = src.nodes_;
  root_ = src.root_;
  object_count_ = src.object_count_;
  epoch_ = std::max(epoch_, src.epoch_) + 1;
  touched_full_.clear();
  touched_parent_.clear();
}

void RTree::sync_from(RTree& src) {
  if (&src == this) throw std::invalid_argument("sync_from: self sync");
  if (dims_ != src.dims_ || max_entries_ != src.max_entries_ ||
      min_entries_ != src.min_entries_)
    throw std::invalid_argument("sync_from: tree parameter mismatch");

  const size_t n = src.nodes_.size();
  nodes_.resize(n);
  auto copy_node = [&](NodeId id) {
    if (static_cast<size_t>(id) >= n) return;  // dropped by truncation
    const Node& s = src.nodes_[static_cast<size_t>(id)];
    Node& d = nodes_[static_cast<size_t>(id)];
    d.level = s.level;
    d.parent = s.parent;
    d.entries = s.entries;
  };
  for (NodeId id : src.touched_full_) copy_node(id);
  for (NodeId id : touched_full_) copy_node(id);
  auto copy_parent = [&](NodeId id) {
    if (static_cast<size_t>(id) >= n) return;
    nodes_[static_cast<size_t>(id)].parent =
        src.nodes_[static_cast<size_t>(id)].parent;
  };
  for (NodeId id : src.touched_parent_) copy_parent(id);
  for (NodeId id : touched_parent_) copy_parent(id);

  root_ = src.root_;
  object_count_ = src.object_count_;
  ++epoch_;
  touched_full_.clear();
  touched_parent_.clear();
  ++src.epoch_;
  src.touched_full_.clear();
  src.touched_parent_.clear();
}

bool RTree::same_structure(const RTree& a, const RTree& b) {
  if (a.dims_ != b.dims_ || a.max_entries_ != b.max_entries_ ||
      a.min_entries_ != b.min_entries_)
    return false;
  if (a.root_ != b.root_ || a.object_count_ != b.object_count_ ||
      a.nodes_.size() != b.nodes_.size())
    return false;
  for (size_t i = 0; i < a.nodes_.size(); ++i) {
    const Node& x = a.nodes_[i];
    const Node& y = b.nodes_[i];
    if (x.level != y.level || x.parent != y.parent ||
        x.entries.size() != y.entries.size())
      return false;
    for (size_t j = 0; j < x.entries.size(); ++j)
      if (x.entries[j].id != y.entries[j].id ||
          !(x.entries[j].rect == y.entries[j].rect))
        return false;
  }
  return true;
}

RTree RTree::from_nodes(int dims, int max_entries, int min_entries,
                        std::vector<Node> nodes, NodeId root,
                        size_t object_count) {
  RTree t(dims, max_entries, min_entries);
  if (nodes.empty() || root < 0 || static_cast<size_t>(root) >= nodes.size())
    throw std::invalid_argument("from_nodes: bad root");
  t.nodes_ = std::move(nodes);
  for (Node& n : t.nodes_) {
    n.touch_full = 0;
    n.touch_parent = 0;
  }
  t.root_ = root;
  t.object_count_ = object_count;
  t.epoch_ = 1;
  t.touched_full_.clear();
  t.touched_parent_.clear();
  return t;
}

}  // namespace rlr
