#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rlr/geometry.hpp"

namespace rlr {

using NodeId = int32_t;
inline constexpr NodeId kInvalidNode = -1;

/// One slot of a node: for internal nodes `id` is a child NodeId and `rect`
/// the exact MBR of that child's entries; for leaves `id` is an object id and
/// `rect` the object MBR.
struct Entry {
  int64_t id = 0;
  Rect rect;
};

struct Node {
  int32_t level = 0;  // 0 = leaf
  NodeId parent = kInvalidNode;
  std::vector<Entry> entries;
  // Change tracking for incremental synchronization between trees.
  uint64_t touch_full = 0;
  uint64_t touch_parent = 0;
};

struct QueryStats {
  uint64_t node_accesses = 0;
  uint64_t result_count = 0;
  int64_t elapsed_ns = 0;
};

struct KnnResult {
  std::vector<int64_t> ids;       // ascending (distance, id)
  std::vector<double> distances;  // matching Euclidean distances
  bool short_result = false;      // K exceeded the object count
};

/// Two disjoint, exhaustive index groups over an overflowing entry list.
struct SplitGroups {
  std::vector<int> group1, group2;
};

class RTree;

/// Pluggable insertion strategy: which child receives a descending object,
/// and how an overflowing node's M+1 entries are partitioned.
class InsertPolicy {
 public:
  virtual ~InsertPolicy() = default;
  virtual int choose_subtree(const RTree& tree, NodeId node,
                             const ObjectRecord& obj) = 0;
  virtual SplitGroups split(const RTree& tree,
                            std::span<const Entry> overflow, int min_fill,
                            int max_fill) = 0;
};

using SplitFn =
    std::function<SplitGroups(NodeId node, std::span<const Entry> overflow)>;

/// Arena-stored balanced R-Tree with capacities M/m. Node handles are stable
/// arena indices. Mutation is single-writer; after construction, concurrent
/// read-only queries are fine as long as each uses its own QueryStats.
class RTree {
 public:
  RTree(int dims, int max_entries, int min_entries);

  int dims() const { return dims_; }
  int max_entries() const { return max_entries_; }
  int min_entries() const { return min_entries_; }
  NodeId root() const { return root_; }
  /// Level count root to leaf inclusive (1 for a single-node tree).
  int height() const { return nodes_[static_cast<size_t>(root_)].level + 1; }
  size_t node_count() const { return nodes_.size(); }
  size_t size() const { return object_count_; }
  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
  Rect node_mbr(NodeId id) const;

  // --- construction -------------------------------------------------------

  void insert(const ObjectRecord& obj, InsertPolicy& policy);

  /// Leaf reached by repeatedly applying `choose` from the root. `choose`
  /// receives the current node and must return a valid entry index.
  NodeId descend(const std::function<int(NodeId)>& choose) const;

  /// Appends the object to `leaf` without restoring any invariant.
  /// Returns true when the leaf now overflows. Must be followed by
  /// finish_insert on the same leaf.
  bool add_to_leaf(NodeId leaf, const ObjectRecord& obj);

  /// Restores invariants after add_to_leaf: splits overflowing nodes bottom-up
  /// (asking `split` for each) and re-tightens ancestor MBRs along the path.
  void finish_insert(NodeId leaf, const SplitFn& split);

  // --- queries -------------------------------------------------------------

  /// Ids of objects whose MBR intersects the window (closed boxes), sorted
  /// ascending. node_accesses counts every node whose entries are scanned,
  /// root included.
  std::vector<int64_t> range_query(const Rect& window,
                                   QueryStats* stats = nullptr) const;

  /// K nearest objects by minimum distance from q to the object MBR,
  /// ascending distance with ties broken by ascending id. Branch-and-bound:
  /// subtrees whose MINDIST exceeds the current K-th best are pruned and not
  /// counted as accessed.
  KnnResult knn_query(std::span<const double> q, int k,
                      QueryStats* stats = nullptr) const;

  // --- integrity -----------------------------------------------------------

  /// Empty iff fill bounds, tight MBRs, balance, parent links, and the level
  /// structure all hold.
  std::vector<std::string> validate() const;

  /// Deep copy with independent storage; per-query node accesses are
  /// identical on the copy.
  RTree clone_structure() const;

  static bool same_structure(const RTree& a, const RTree& b);

  // --- incremental synchronization ------------------------------------------

  /// Makes this tree identical to `src` by copying only nodes touched in
  /// either tree since their last synchronization point. Requires that the
  /// two trees were identical when both touch sets were last cleared
  /// (established by clone_from). Clears both tracked sets.
  void sync_from(RTree& src);

  /// Full copy that also establishes a synchronization baseline.
  void clone_from(const RTree& src);

  /// Direct construction from prebuilt nodes (snapshot loading, tests).
  /// No invariants are checked; call validate() if needed.
  static RTree from_nodes(int dims, int max_entries, int min_entries,
                          std::vector<Node> nodes, NodeId root,
                          size_t object_count);

 private:
  void touch(NodeId id);
  void touch_parent_link(NodeId id);
  NodeId alloc_node(int32_t level, NodeId parent);
  int entry_index_in_parent(NodeId child) const;
  void apply_split(NodeId node_id, const SplitGroups& groups, NodeId* out_new);

  int dims_;
  int max_entries_;
  int min_entries_;
  NodeId root_;
  size_t object_count_ = 0;
  std::vector<Node> nodes_;

  uint64_t epoch_ = 1;
  std::vector<NodeId> touched_full_;
  std::vector<NodeId> touched_parent_;
};

}  // namespace rlr
