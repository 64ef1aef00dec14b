#include "rlr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "rlr/common.hpp"
#include "rlr/datagen.hpp"

namespace rlr {

void TrainConfig::validate() const {
  if (k < 2) throw std::invalid_argument("TrainConfig: k must be >= 2");
  if (p < 1 || epochs_cs < 1 || epochs_split < 1 || parts < 2 || batch < 1 ||
      memory_cap < 1 || target_sync_every < 1)
    throw std::invalid_argument("TrainConfig: counts must be positive");
  if (!(gamma_cs > 0) || !(gamma_split > 0) || !(lr_cs > 0) || !(lr_split > 0) ||
      !(train_query_area_fraction > 0) || !(aspect_lo > 0) ||
      !(aspect_hi >= aspect_lo))
    throw std::invalid_argument("TrainConfig: rates must be positive");
  if (min_entries < 1 || max_entries < 2 * min_entries)
    throw std::invalid_argument("TrainConfig: need 1 <= m <= M/2");
  if (dims < 1 || dims > Rect::kMaxDims)
    throw std::invalid_argument("TrainConfig: unsupported dims");
}

std::string TrainConfig::hyperparameters_json(AgentKind agent) const {
  nlohmann::json j;
  j["k"] = k;
  j["p"] = p;
  j["epochs_cs"] = epochs_cs;
  j["epochs_split"] = epochs_split;
  j["parts"] = parts;
  j["gamma"] = agent == AgentKind::kChooseSubtree ? gamma_cs : gamma_split;
  j["lr"] = agent == AgentKind::kChooseSubtree ? lr_cs : lr_split;
  j["batch"] = batch;
  j["memory_cap"] = memory_cap;
  j["target_sync_every"] = target_sync_every;
  j["train_query_area_fraction"] = train_query_area_fraction;
  j["aspect_ratio_range"] = {aspect_lo, aspect_hi};
  j["M"] = max_entries;
  j["m"] = min_entries;
  return j.dump();
}

void TrainLogger::round(int epoch, long round, double reward, double epsilon,
                        double loss, size_t memory_size) {
  if (out_ == nullptr) return;
  nlohmann::json j;
  j["epoch"] = epoch;
  j["round"] = round;
  j["r"] = reward;
  j["epsilon"] = epsilon;
  if (std::isfinite(loss))
    j["loss"] = loss;
  else
    j["loss"] = nullptr;
  j["memory_size"] = memory_size;
  *out_ << j.dump() << '\n';
}

void TrainLogger::epoch(int epoch, const std::string& agent, long rounds,
                        double mean_reward, double epsilon) {
  if (out_ == nullptr) return;
  nlohmann::json j;
  j["epoch_summary"] = epoch;
  j["agent"] = agent;
  j["rounds"] = rounds;
  j["mean_r"] = mean_reward;
  j["epsilon"] = epsilon;
  *out_ << j.dump() << '\n';
  out_->flush();
}

void TrainLogger::warn(const std::string& message) {
  if (out_ == nullptr) return;
  nlohmann::json j;
  j["warning"] = message;
  *out_ << j.dump() << '\n';
}

Rect make_training_query(std::span<const double> center,
                         const TrainConfig& cfg, std::mt19937_64& rng) {
  return make_area_query(center, cfg.train_query_area_fraction, cfg.aspect_lo,
                         cfg.aspect_hi, rng);
}

double compute_reward(const RTree& tree_rl, const RTree& tree_ref,
                      std::span<const Rect> queries) {
  if (queries.empty())
    throw std::invalid_argument("compute_reward: no queries");
  const double h_rl = tree_rl.height();
  const double h_ref = tree_ref.height();
  double sum_rl = 0, sum_ref = 0;
  for (const Rect& q : queries) {
    QueryStats s_rl, s_ref;
    tree_rl.range_query(q, &s_rl);
    tree_ref.range_query(q, &s_ref);
    sum_rl += static_cast<double>(s_rl.node_accesses) / h_rl;
    sum_ref += static_cast<double>(s_ref.node_accesses) / h_ref;
  }
  const double n = static_cast<double>(queries.size());
  return sum_ref / n - sum_rl / n;
}

namespace {

int ref_choose(const RTree& tree, NodeId node, const ObjectRecord& obj) {
  return choose_min_area_enlargement(tree.node(node).entries, obj);
}

SplitGroups ref_split(std::span<const Entry> overflow, int min_fill,
                      int max_fill) {
  return split_min_overlap_partition(overflow, min_fill, max_fill);
}

int greedy_choose(const QNetwork& net, int k, const RTree& tree, NodeId node,
                  const ObjectRecord& obj) {
  if (auto idx = containment_shortcut(tree, node, obj)) return *idx;
  const auto cands = rank_candidate_children(tree, node, obj, k);
  const StateVector s = choose_state(cands, k);
  return cands[static_cast<size_t>(greedy_action(net, s))].entry_index;
}

SplitGroups greedy_split(const QNetwork& net, int k,
                         std::span<const Entry> overflow, int min_fill,
                         int max_fill) {
  const CandidateSplitSet set =
      enumerate_candidate_splits(overflow, min_fill, max_fill);
  if (auto forced = split_special_case(set))
    return {forced->group1, forced->group2};
  const size_t t = std::min<size_t>(static_cast<size_t>(k),
                                    set.zero_overlap.size());
  const StateVector s =
      split_state(std::span<const CandidateSplit>(set.zero_overlap.data(), t),
                  k);
  const CandidateSplit& c =
      set.zero_overlap[static_cast<size_t>(greedy_action(net, s))];
  return {c.group1, c.group2};
}

// Mutable per-agent training state.
struct AgentRt {
  QNetwork net;
  QNetwork target;
  ReplayMemory memory;
  ExplorationState eps;
  SyncCounter sync;
  std::mt19937_64 rng;
  TrainScratch scratch;
  double gamma = 0;
  double lr = 0;

  AgentRt(AgentKind kind, const TrainConfig& cfg)
      : net(QNetwork::initialized(
            cfg.k, 4 * cfg.k,
            derive_seed(cfg.seed, kind == AgentKind::kChooseSubtree
                                      ? "init/cs"
                                      : "init/split"))),
        target(net),
        memory(static_cast<size_t>(cfg.memory_cap)),
        rng(derive_seed(cfg.seed, kind == AgentKind::kChooseSubtree
                                      ? "train/cs"
                                      : "train/split")) {
    sync.every = cfg.target_sync_every;
    if (kind == AgentKind::kChooseSubtree) {
      gamma = cfg.gamma_cs;
      lr = cfg.lr_cs;
    } else {
      gamma = cfg.gamma_split;
      lr = cfg.lr_split;
    }
  }
};

using DecisionRecord = std::vector<std::pair<StateVector, int>>;

// All transitions of one round share the reward; s' chains consecutive
// recorded states of the same object's decision sequence, terminal at the
// end of the sequence.
void push_round_transitions(ReplayMemory& memory,
                            std::vector<DecisionRecord>& records,
                            double reward) {
  for (DecisionRecord& rec : records) {
    for (size_t i = 0; i < rec.size(); ++i) {
      Transition t;
      t.s = std::move(rec[i].first);
      t.a = rec[i].second;
      t.r = reward;
      if (i + 1 < rec.size()) {
        t.s_next = rec[i + 1].first;
        t.terminal = false;
      } else {
        t.terminal = true;
      }
      memory.push(std::move(t));
    }
  }
  records.clear();
}

struct RoundOutcome {
  double reward = 0;
  double loss = std::numeric_limits<double>::quiet_NaN();
};

RoundOutcome finish_round(AgentRt& agent, const TrainConfig& cfg,
                          std::vector<DecisionRecord>& records,
                          const std::vector<Rect>& queries, const RTree& t_rl,
                          const RTree& t_ref) {
  RoundOutcome out;
  if (!queries.empty())
    out.reward = compute_reward(t_rl, t_ref, queries);
  push_round_transitions(agent.memory, records, out.reward);
  if (agent.memory.size() > 0) {
    const auto batch =
        agent.memory.sample(static_cast<size_t>(cfg.batch), agent.rng);
    out.loss = train_step(agent.net, agent.target, batch, agent.gamma,
                          agent.lr, agent.scratch);
    if (agent.sync.tick()) sync_target(agent.net, agent.target);
  }
  return out;
}

using SharedSplit =
    std::function<SplitGroups(std::span<const Entry>, int, int)>;
using SharedChoose =
    std::function<int(const RTree&, NodeId, const ObjectRecord&)>;

// One construction pass over the dataset while the ChooseSubtree agent
// learns. `shared_split` is used by both trees (reference rule when training
// solo, greedy split net in combined mode).
void run_cs_epoch(const std::vector<ObjectRecord>& dataset,
                  const TrainConfig& cfg, AgentRt& agent,
                  const SharedSplit& shared_split, int epoch_no,
                  TrainLogger* log, const TrainHooks* hooks = nullptr) {
  agent.memory.clear();
  RTree t_rl(cfg.dims, cfg.max_entries, cfg.min_entries);
  RTree t_ref(cfg.dims, cfg.max_entries, cfg.min_entries);
  t_ref.clone_from(t_rl);

  const SplitFn split_fn = [&](NodeId, std::span<const Entry> overflow) {
    return shared_split(overflow, cfg.min_entries, cfg.max_entries);
  };

  long round_no = 0;
  double reward_sum = 0;
  std::vector<Rect> queries;
  std::vector<DecisionRecord> records;
  for (size_t base = 0; base < dataset.size(); base += static_cast<size_t>(cfg.p)) {
    const size_t end =
        std::min(dataset.size(), base + static_cast<size_t>(cfg.p));
    t_ref.sync_from(t_rl);
    queries.clear();
    records.clear();
    for (size_t i = base; i < end; ++i) {
      const ObjectRecord& obj = dataset[i];

      const NodeId ref_leaf = t_ref.descend([&](NodeId n) {
        return ref_choose(t_ref, n, obj);
      });
      t_ref.add_to_leaf(ref_leaf, obj);
      t_ref.finish_insert(ref_leaf, split_fn);

      DecisionRecord rec;
      NodeId n = t_rl.root();
      while (t_rl.node(n).level > 0) {
        int idx;
        if (auto shortcut = containment_shortcut(t_rl, n, obj)) {
          idx = *shortcut;  // model bypassed, no transition recorded
        } else {
          auto cands = rank_candidate_children(t_rl, n, obj, cfg.k);
          if (cfg.clamp_single_action && cands.size() > 1) cands.resize(1);
          StateVector s = choose_state(cands, cfg.k);
          const int a = select_action(agent.net, s, agent.eps.epsilon, agent.rng);
          idx = cands[static_cast<size_t>(a)].entry_index;
          rec.emplace_back(std::move(s), a);
        }
        n = static_cast<NodeId>(
            t_rl.node(n).entries[static_cast<size_t>(idx)].id);
      }
      t_rl.add_to_leaf(n, obj);
      t_rl.finish_insert(n, split_fn);

      double center[Rect::kMaxDims];
      obj.mbr.center(center);
      queries.push_back(make_training_query(
          std::span<const double>(center, static_cast<size_t>(cfg.dims)), cfg,
          agent.rng));
      records.push_back(std::move(rec));
    }
    const RoundOutcome out =
        finish_round(agent, cfg, records, queries, t_rl, t_ref);
    reward_sum += out.reward;
    if (log != nullptr)
      log->round(epoch_no, round_no, out.reward, agent.eps.epsilon, out.loss,
                 agent.memory.size());
    if (hooks != nullptr && hooks->after_round)
      hooks->after_round(epoch_no, round_no, t_rl, t_ref);
    ++round_no;
  }
  agent.eps.decay_round();
  if (log != nullptr)
    log->epoch(epoch_no, "choosesubtree", round_no,
               round_no > 0 ? reward_sum / static_cast<double>(round_no) : 0.0,
               agent.eps.epsilon);
}

// Lazily built and cached per j: deterministic function of (dataset, cfg).
struct SplitPrepCache {
  const std::vector<ObjectRecord>& dataset;
  const TrainConfig& cfg;
  std::map<int, SplitPrep> by_j;

  SplitPrep& get(int j) {
    auto it = by_j.find(j);
    if (it == by_j.end())
      it = by_j.emplace(j, prepare_split_training(dataset, j, cfg.parts, cfg))
               .first;
    return it->second;
  }
};

// One pass over the part schedule while the Split agent learns.
// `shared_choose` steers the descent on both trees (reference rule solo,
// greedy choose net in combined mode).
void run_split_epoch(const TrainConfig& cfg, AgentRt& agent,
                     SplitPrepCache& prep_cache,
                     const SharedChoose& shared_choose, int epoch_no,
                     TrainLogger* log) {
  agent.memory.clear();
  const SplitFn ref_split_fn = [&](NodeId, std::span<const Entry> overflow) {
    return ref_split(overflow, cfg.min_entries, cfg.max_entries);
  };

  long round_no = 0;
  double reward_sum = 0;
  for (int j = 1; j <= cfg.parts - 1; ++j) {
    SplitPrep& prep = prep_cache.get(j);
    if (prep.training.empty()) {
      if (log != nullptr)
        log->warn("split training part " + std::to_string(j) +
                  " is empty; skipped");
      continue;
    }
    RTree t_rl(cfg.dims, cfg.max_entries, cfg.min_entries);
    RTree t_ref(cfg.dims, cfg.max_entries, cfg.min_entries);
    t_rl.clone_from(prep.base);
    t_ref.clone_from(prep.base);

    std::vector<Rect> queries;
    std::vector<DecisionRecord> records;
    for (size_t base = 0; base < prep.training.size();
         base += static_cast<size_t>(cfg.p)) {
      const size_t end = std::min(prep.training.size(),
                                  base + static_cast<size_t>(cfg.p));
      t_rl.sync_from(prep.base);
      t_ref.sync_from(prep.base);
      queries.clear();
      records.clear();
      for (size_t i = base; i < end; ++i) {
        const ObjectRecord& obj = prep.training[i];

        const NodeId ref_leaf = t_ref.descend([&](NodeId n) {
          return shared_choose(t_ref, n, obj);
        });
        t_ref.add_to_leaf(ref_leaf, obj);
        t_ref.finish_insert(ref_leaf, ref_split_fn);

        const NodeId leaf = t_rl.descend([&](NodeId n) {
          return shared_choose(t_rl, n, obj);
        });
        const bool overflow = t_rl.add_to_leaf(leaf, obj);
        if (overflow) {
          double center[Rect::kMaxDims];
          obj.mbr.center(center);
          queries.push_back(make_training_query(
              std::span<const double>(center, static_cast<size_t>(cfg.dims)),
              cfg, agent.rng));
        }
        DecisionRecord rec;
        t_rl.finish_insert(leaf, [&](NodeId, std::span<const Entry> overflow_entries) {
          const CandidateSplitSet set = enumerate_candidate_splits(
              overflow_entries, cfg.min_entries, cfg.max_entries);
          if (auto forced = split_special_case(set))
            return SplitGroups{forced->group1, forced->group2};
          const size_t t = std::min<size_t>(static_cast<size_t>(cfg.k),
                                            set.zero_overlap.size());
          StateVector s = split_state(
              std::span<const CandidateSplit>(set.zero_overlap.data(), t),
              cfg.k);
          const int a =
              select_action(agent.net, s, agent.eps.epsilon, agent.rng);
          rec.emplace_back(std::move(s), a);
          const CandidateSplit& c = set.zero_overlap[static_cast<size_t>(a)];
          return SplitGroups{c.group1, c.group2};
        });
        if (!rec.empty()) records.push_back(std::move(rec));
      }
      const RoundOutcome out =
          finish_round(agent, cfg, records, queries, t_rl, t_ref);
      reward_sum += out.reward;
      if (log != nullptr)
        log->round(epoch_no, round_no, out.reward, agent.eps.epsilon, out.loss,
                   agent.memory.size());
      ++round_no;
    }
  }
  agent.eps.decay_round();
  if (log != nullptr)
    log->epoch(epoch_no, "split", round_no,
               round_no > 0 ? reward_sum / static_cast<double>(round_no) : 0.0,
               agent.eps.epsilon);
}

}  // namespace

SplitPrep prepare_split_training(const std::vector<ObjectRecord>& dataset,
                                 int j, int parts, const TrainConfig& cfg) {
  if (j < 1 || j > parts - 1)
    throw std::invalid_argument("prepare_split_training: need 1 <= j <= parts-1");
  SplitPrep prep{RTree(cfg.dims, cfg.max_entries, cfg.min_entries), {}, 0};
  const size_t initial =
      dataset.size() * static_cast<size_t>(j) / static_cast<size_t>(parts);
  HeuristicPolicy ref(reference_heuristic());
  for (size_t i = 0; i < initial; ++i) prep.base.insert(dataset[i], ref);
  for (size_t i = initial; i < dataset.size(); ++i) {
    const ObjectRecord& obj = dataset[i];
    const NodeId leaf = prep.base.descend([&](NodeId n) {
      return ref_choose(prep.base, n, obj);
    });
    if (prep.base.node(leaf).entries.size() ==
        static_cast<size_t>(cfg.max_entries)) {
      prep.training.push_back(obj);  // would overflow: reserve for training
    } else {
      prep.base.add_to_leaf(leaf, obj);
      prep.base.finish_insert(leaf, nullptr);  // cannot overflow
      ++prep.fill_count;
    }
  }
  return prep;
}

QNetwork train_choose_subtree(const std::vector<ObjectRecord>& dataset,
                              const TrainConfig& cfg, TrainLogger* log,
                              const TrainHooks* hooks) {
  cfg.validate();
  if (dataset.size() < static_cast<size_t>(cfg.p))
    throw DataError("train_choose_subtree: dataset smaller than round size p");
  AgentRt agent(AgentKind::kChooseSubtree, cfg);
  const SharedSplit shared = [&](std::span<const Entry> overflow, int m, int M) {
    return ref_split(overflow, m, M);
  };
  for (int e = 1; e <= cfg.epochs_cs; ++e) {
    run_cs_epoch(dataset, cfg, agent, shared, e, log, hooks);
    if (hooks != nullptr && hooks->after_epoch) hooks->after_epoch(e, agent.net);
  }
  return agent.net;
}

QNetwork train_split(const std::vector<ObjectRecord>& dataset,
                     const TrainConfig& cfg, TrainLogger* log) {
  cfg.validate();
  if (dataset.size() < static_cast<size_t>(cfg.parts))
    throw DataError("train_split: dataset smaller than parts");
  AgentRt agent(AgentKind::kSplit, cfg);
  SplitPrepCache prep{dataset, cfg, {}};
  const SharedChoose shared = [](const RTree& t, NodeId n,
                                 const ObjectRecord& o) {
    return ref_choose(t, n, o);
  };
  for (int e = 1; e <= cfg.epochs_split; ++e)
    run_split_epoch(cfg, agent, prep, shared, e, log);
  return agent.net;
}

std::pair<QNetwork, QNetwork> train_combined(
    const std::vector<ObjectRecord>& dataset, const TrainConfig& cfg,
    TrainLogger* log) {
  cfg.validate();
  if (dataset.size() < static_cast<size_t>(cfg.p) ||
      dataset.size() < static_cast<size_t>(cfg.parts))
    throw DataError("train_combined: dataset too small");
  AgentRt cs(AgentKind::kChooseSubtree, cfg);
  AgentRt split(AgentKind::kSplit, cfg);
  SplitPrepCache prep{dataset, cfg, {}};

  const SharedSplit split_by_net = [&](std::span<const Entry> overflow, int m,
                                       int M) {
    return greedy_split(split.net, cfg.k, overflow, m, M);
  };
  const SharedChoose choose_by_net = [&](const RTree& t, NodeId n,
                                         const ObjectRecord& o) {
    return greedy_choose(cs.net, cfg.k, t, n, o);
  };

  int cs_done = 0, split_done = 0;
  for (int e = 1; cs_done < cfg.epochs_cs || split_done < cfg.epochs_split;
       ++e) {
    const bool odd = (e % 2) == 1;
    if ((odd && cs_done < cfg.epochs_cs) || split_done >= cfg.epochs_split) {
      run_cs_epoch(dataset, cfg, cs, split_by_net, e, log);
      ++cs_done;
    } else {
      run_split_epoch(cfg, split, prep, choose_by_net, e, log);
      ++split_done;
    }
  }
  return {cs.net, split.net};
}

RlInsertPolicy::RlInsertPolicy(const QNetwork* net_cs, const QNetwork* net_split,
                               int k)
    : net_cs_(net_cs), net_split_(net_split), k_(k) {
  if (net_cs_ != nullptr && (net_cs_->k != k || net_cs_->input != 4 * k))
    throw DataError("RlInsertPolicy: choose model shape does not match k");
  if (net_split_ != nullptr && (net_split_->k != k || net_split_->input != 4 * k))
    throw DataError("RlInsertPolicy: split model shape does not match k");
}

int RlInsertPolicy::choose_subtree(const RTree& tree, NodeId node,
                                   const ObjectRecord& obj) {
  if (net_cs_ == nullptr) return ref_choose(tree, node, obj);
  return greedy_choose(*net_cs_, k_, tree, node, obj);
}

SplitGroups RlInsertPolicy::split(const RTree& tree,
                                  std::span<const Entry> overflow, int min_fill,
                                  int max_fill) {
  (void)tree;
  if (net_split_ == nullptr) return ref_split(overflow, min_fill, max_fill);
  return greedy_split(*net_split_, k_, overflow, min_fill, max_fill);
}

RTree build_rlr_tree(const std::vector<ObjectRecord>& dataset,
                     const QNetwork* net_cs, const QNetwork* net_split,
                     const TrainConfig& cfg) {
  cfg.validate();
  RlInsertPolicy policy(net_cs, net_split, cfg.k);
  RTree tree(cfg.dims, cfg.max_entries, cfg.min_entries);
  for (const ObjectRecord& obj : dataset) tree.insert(obj, policy);
  return tree;
}

}  // namespace rlr
