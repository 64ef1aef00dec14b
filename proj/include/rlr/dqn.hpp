#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rlr/features.hpp"

namespace rlr {

/// Two-layer value network Q(s, a): input 4k, one SELU hidden layer of 64
/// neurons, k outputs. Double precision throughout.
struct QNetwork {
  int k = 0;
  int input = 0;
  int hidden = 64;
  std::vector<double> w1, b1;  // hidden x input, hidden
  std::vector<double> w2, b2;  // k x hidden, k

  /// Uniform init in [-sqrt(1/fan_in), +sqrt(1/fan_in)] per layer, seeded.
  static QNetwork initialized(int k, int input, uint64_t seed);
  static QNetwork zeros(int k, int input);

  void forward(std::span<const double> s, std::span<double> q_out) const;
  std::vector<double> forward(std::span<const double> s) const;

  size_t parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
  bool finite() const;
  bool operator==(const QNetwork& o) const = default;
};

struct Transition {
  StateVector s;
  int a = 0;
  double r = 0;
  StateVector s_next;       // ignored when terminal
  bool terminal = false;
};

/// Bounded FIFO of transitions; insertion beyond capacity evicts the oldest.
class ReplayMemory {
 public:
  explicit ReplayMemory(size_t capacity) : capacity_(capacity) {}

  void push(Transition t);
  void clear();
  size_t size() const { return buffer_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const;  // 0 = oldest

  /// `count` transitions drawn uniformly: without replacement when size >=
  /// count, with replacement otherwise. Requires size >= 1.
  std::vector<const Transition*> sample(size_t count, std::mt19937_64& rng) const;

 private:
  size_t capacity_;
  size_t head_ = 0;  // index of the oldest element once full
  std::vector<Transition> buffer_;
};

struct ExplorationState {
  double epsilon = 1.0;
  double decay = 0.99;
  double floor = 0.1;

  void decay_round() { epsilon = std::max(floor, epsilon * decay); }
};

/// Epsilon-greedy over the valid actions: uniform with probability epsilon,
/// otherwise argmax of the Q-values restricted to valid actions (ties to the
/// lowest index).
int select_action(const QNetwork& net, const StateVector& s, double epsilon,
                  std::mt19937_64& rng);

int greedy_action(const QNetwork& net, const StateVector& s);

struct TrainScratch {
  std::vector<double> z1, h, q, dz1, dh, dq;
  std::vector<double> gw1, gb1, gw2, gb2;
};

/// One gradient-descent step on the mean squared error between Q(s, a) and
/// the bootstrap targets y = r (+ gamma * max over the valid actions of the
/// target network on s' when non-terminal). Targets are constants; only
/// `net` is updated. Returns the pre-step loss. Throws on non-finite loss.
double train_step(QNetwork& net, const QNetwork& target,
                  std::span<const Transition* const> batch, double gamma,
                  double lr, TrainScratch& scratch);

/// Target parameters become bitwise-equal copies of the main parameters.
void sync_target(const QNetwork& net, QNetwork& target);

/// Fires every `every`-th tick.
struct SyncCounter {
  int every = 30;
  long count = 0;
  bool tick() { return ++count % every == 0; }
};

enum class AgentKind { kChooseSubtree, kSplit };
std::string agent_kind_name(AgentKind k);

struct ModelMeta {
  AgentKind agent = AgentKind::kChooseSubtree;
  int k = 0;
  int dims = 0;
  uint64_t seed = 0;
  std::string hyperparameters_json;  // serialized JSON object
};

/// Self-describing JSON model file; load(save(x)) reproduces forward outputs
/// exactly. Loading verifies format, agent kind, and shape consistency.
void save_model(const std::string& path, const QNetwork& net,
                const ModelMeta& meta);
struct LoadedModel {
  QNetwork net;
  ModelMeta meta;
};
LoadedModel load_model(const std::string& path);

}  // namespace rlr
