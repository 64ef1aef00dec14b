#pragma once

#include <memory>
#include <span>
#include <string>

#include "rlr/rtree.hpp"

namespace rlr {

// Classic deterministic ChooseSubtree and Split strategies. All functions are
// pure and deterministic; every tie cascades to the lowest index so outputs
// are stable across runs.

enum class ChooseRule { kMinAreaEnlargement, kRStarOverlap };
enum class SplitRule {
  kLinear,
  kQuadratic,
  kGreene,
  kRStarTopology,
  kMinOverlapPartition,
};

struct HeuristicId {
  ChooseRule choose_rule;
  SplitRule split_rule;
};

/// Entry index minimizing area(union(entry, obj)) - area(entry); ties by
/// smaller resulting area, then lower index.
int choose_min_area_enlargement(std::span<const Entry> entries,
                                const ObjectRecord& obj);

/// At the level just above the leaves, minimizes overlap enlargement with the
/// sibling entries (ties by area enlargement, then area, then index);
/// elsewhere identical to choose_min_area_enlargement.
int choose_rstar(const RTree& tree, NodeId node, const ObjectRecord& obj);

SplitGroups split_linear(std::span<const Entry> entries, int min_fill,
                         int max_fill);
SplitGroups split_quadratic(std::span<const Entry> entries, int min_fill,
                            int max_fill);
SplitGroups split_greene(std::span<const Entry> entries, int min_fill,
                         int max_fill);
SplitGroups split_rstar_topology(std::span<const Entry> entries, int min_fill,
                                 int max_fill);
SplitGroups split_min_overlap_partition(std::span<const Entry> entries,
                                        int min_fill, int max_fill);

SplitGroups run_split(SplitRule rule, std::span<const Entry> entries,
                      int min_fill, int max_fill);

class HeuristicPolicy : public InsertPolicy {
 public:
  explicit HeuristicPolicy(HeuristicId id) : id_(id) {}

  int choose_subtree(const RTree& tree, NodeId node,
                     const ObjectRecord& obj) override;
  SplitGroups split(const RTree& tree, std::span<const Entry> overflow,
                    int min_fill, int max_fill) override;

  HeuristicId id() const { return id_; }

 private:
  HeuristicId id_;
};

// CLI-visible policy names: guttman-linear, guttman-quadratic, greene, rstar,
// ref (= min-area-enlargement + min-overlap-partition).
HeuristicId heuristic_from_name(const std::string& name);
std::string heuristic_policy_names();

/// The reference-tree rules used during model training and benchmarking.
inline HeuristicId reference_heuristic() {
  return {ChooseRule::kMinAreaEnlargement, SplitRule::kMinOverlapPartition};
}

}  // namespace rlr
