#pragma once

// Two-armed bandit sanity: a fixed state, arm 1 pays 1 and arm 0 pays 0,
// discount 0. Training with the real replay/epsilon-greedy/train-step loop
// must land on arm 1 as the greedy choice.

#include <random>

#include "rlr/dqn.hpp"

namespace bandit {

inline bool converges(uint64_t seed, int steps = 500) {
  const int k = 2;
  rlr::QNetwork net = rlr::QNetwork::initialized(k, 4 * k, seed);
  rlr::QNetwork target = net;
  rlr::ReplayMemory memory(5000);
  rlr::ExplorationState eps;
  rlr::SyncCounter sync;
  rlr::TrainScratch scratch;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);

  rlr::StateVector s;
  s.valid_actions = 2;
  s.values = {1, 0, 0, 1, 0, 1, 1, 0};

  for (int step = 0; step < steps; ++step) {
    const int a = rlr::select_action(net, s, eps.epsilon, rng);
    rlr::Transition t;
    t.s = s;
    t.a = a;
    t.r = a == 1 ? 1.0 : 0.0;
    t.terminal = true;
    memory.push(std::move(t));
    const auto batch = memory.sample(64, rng);
    rlr::train_step(net, target, batch, 0.0, 0.003, scratch);
    if (sync.tick()) rlr::sync_target(net, target);
    eps.decay_round();
  }
  return rlr::greedy_action(net, s) == 1;
}

}  // namespace bandit
