#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>

#include "rlr/dqn.hpp"
#include "rlr/heuristics.hpp"

namespace rlr {

struct TrainConfig {
  int k = 2;   // action-space size
  int p = 5;   // objects per round (reference-sync + reward cadence)
  int epochs_cs = 20;
  int epochs_split = 15;
  int parts = 15;
  double gamma_cs = 0.95;
  double gamma_split = 0.8;
  double lr_cs = 0.003;
  double lr_split = 0.01;
  int batch = 64;
  int memory_cap = 5000;
  int target_sync_every = 30;
  double train_query_area_fraction = 1e-4;  // 0.01% of the unit region
  double aspect_lo = 0.1, aspect_hi = 10.0;
  int max_entries = 50;
  int min_entries = 20;
  int dims = 2;
  uint64_t seed = 0;
  // Test hook: clamp every decision point to a single valid action, which
  // must reproduce the reference tree choice for choice.
  bool clamp_single_action = false;

  void validate() const;
  std::string hyperparameters_json(AgentKind agent) const;
};

/// Line-delimited training log: one JSON record per round
/// {epoch, round, r, epsilon, loss, memory_size} plus per-epoch summaries.
/// Contains no wall-clock so reruns are byte-identical.
class TrainLogger {
 public:
  explicit TrainLogger(std::ostream* out) : out_(out) {}
  void round(int epoch, long round, double reward, double epsilon, double loss,
             size_t memory_size);
  void epoch(int epoch, const std::string& agent, long rounds,
             double mean_reward, double epsilon);
  void warn(const std::string& message);

 private:
  std::ostream* out_;
};

/// Query window of exact area = train_query_area_fraction (of the unit
/// region) centered at `center`, aspect ratio uniform in
/// [aspect_lo, aspect_hi]; never clipped.
Rect make_training_query(std::span<const double> center, const TrainConfig& cfg,
                         std::mt19937_64& rng);

/// r = mean(accesses/height) over the queries on the reference tree minus the
/// same on the trained tree; positive when the trained tree reads fewer
/// (normalized) nodes.
double compute_reward(const RTree& tree_rl, const RTree& tree_ref,
                      std::span<const Rect> queries);

struct SplitPrep {
  RTree base;
  std::vector<ObjectRecord> training;
  size_t fill_count = 0;
};

/// Base tree from the first j/parts of the dataset (reference policies);
/// remaining objects either fill it (no overflow at the reached leaf) or
/// join the training part.
SplitPrep prepare_split_training(const std::vector<ObjectRecord>& dataset,
                                 int j, int parts, const TrainConfig& cfg);

/// Test/inspection hooks; every callback may be empty.
struct TrainHooks {
  std::function<void(int epoch, long round, const RTree& tree_rl,
                     const RTree& tree_ref)>
      after_round;
  std::function<void(int epoch, const QNetwork& net)> after_epoch;
};

QNetwork train_choose_subtree(const std::vector<ObjectRecord>& dataset,
                              const TrainConfig& cfg,
                              TrainLogger* log = nullptr,
                              const TrainHooks* hooks = nullptr);

QNetwork train_split(const std::vector<ObjectRecord>& dataset,
                     const TrainConfig& cfg, TrainLogger* log = nullptr);

/// Alternating schedule: odd epochs advance the ChooseSubtree agent with the
/// split decision supplied by the current split net, even epochs advance the
/// Split agent with subtree choice supplied by the current choose net; the
/// longer schedule finishes solo.
std::pair<QNetwork, QNetwork> train_combined(
    const std::vector<ObjectRecord>& dataset, const TrainConfig& cfg,
    TrainLogger* log = nullptr);

/// Greedy inference policy: containment shortcut else argmax over the choose
/// state; zero-overlap special case else argmax over the split state. A null
/// network falls back to the reference heuristic for that operation.
class RlInsertPolicy : public InsertPolicy {
 public:
  RlInsertPolicy(const QNetwork* net_cs, const QNetwork* net_split, int k);

  int choose_subtree(const RTree& tree, NodeId node,
                     const ObjectRecord& obj) override;
  SplitGroups split(const RTree& tree, std::span<const Entry> overflow,
                    int min_fill, int max_fill) override;

 private:
  const QNetwork* net_cs_;
  const QNetwork* net_split_;
  int k_;
};

/// One-by-one greedy construction; the result supports further incremental
/// inserts with the same policy.
RTree build_rlr_tree(const std::vector<ObjectRecord>& dataset,
                     const QNetwork* net_cs, const QNetwork* net_split,
                     const TrainConfig& cfg);

}  // namespace rlr
