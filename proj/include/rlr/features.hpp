#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rlr/rtree.hpp"

namespace rlr {

// State construction for the two decision points. Used identically at
// training and inference time; everything here is a pure function.

struct CandidateChild {
  int entry_index = 0;
  double delta_area = 0;     // MBR area growth if the object joins this child
  double delta_margin = 0;   // margin growth
  double delta_overlap = 0;  // growth of overlap with all sibling entries
  double occupancy = 0;      // child entry count / M
};

struct CandidateSplit {
  int axis = 0;
  int position = 0;  // group 1 takes the first `position` sorted entries
  Rect mbr1, mbr2;
  double area1 = 0, area2 = 0, margin1 = 0, margin2 = 0;
  double overlap = 0;
  std::vector<int> group1, group2;  // indices into the overflowing entry list

  double total_area() const { return area1 + area2; }
  double total_margin() const { return margin1 + margin2; }
};

struct CandidateSplitSet {
  std::vector<CandidateSplit> zero_overlap;
  std::vector<CandidateSplit> all;
};

/// Fixed-length 4k feature vector; entries beyond 4 * valid_actions are zero
/// padding and an action argmax must be restricted to valid_actions.
struct StateVector {
  std::vector<double> values;
  int valid_actions = 0;
};

/// Top-k children of a non-leaf node in ascending order of area increase
/// (ties by margin increase, then entry index), each carrying all four raw
/// features.
std::vector<CandidateChild> rank_candidate_children(const RTree& tree,
                                                    NodeId node,
                                                    const ObjectRecord& obj,
                                                    int k);

/// Per candidate: [dArea/max, dMargin/max, dOverlap/max, occupancy], maxima
/// over the candidates; a feature whose maximum is 0 maps to 0. Zero-padded
/// to length 4k.
StateVector choose_state(std::span<const CandidateChild> candidates, int k);

/// Child MBR fully containing the object, if any: the containing child with
/// the smallest area (ties by index). Bypasses the model.
std::optional<int> containment_shortcut(const RTree& tree, NodeId node,
                                        const ObjectRecord& obj);

/// All per-dimension sorted-sequence splits at positions m..M+1-m. Both lists
/// are sorted ascending by total area, ties by total margin then (axis,
/// position).
CandidateSplitSet enumerate_candidate_splits(std::span<const Entry> entries,
                                             int min_fill, int max_fill);

/// Per split: [area1/maxArea, area2/maxArea, margin1/maxMargin,
/// margin2/maxMargin], maxima over all listed splits' both groups.
StateVector split_state(std::span<const CandidateSplit> topk, int k);

/// Forced partition when at most one candidate is overlap-free: the
/// minimum-overlap candidate over all candidates (ties by total area, then
/// axis, then position). nullopt when the model should decide.
std::optional<CandidateSplit> split_special_case(const CandidateSplitSet& set);

}  // namespace rlr
