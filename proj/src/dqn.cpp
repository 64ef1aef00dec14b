#include "rlr/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "rlr/common.hpp"
#include "rlr/kernels.hpp"

namespace rlr {

QNetwork QNetwork::initialized(int k, int input, uint64_t seed) {
  QNetwork n = zeros(k, input);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::vector<double>& v, int fan_in) {
    const double b = std::sqrt(1.0 / fan_in);
    std::uniform_real_distribution<double> dist(-b, b);
    for (double& x : v) x = dist(rng);
  };
  fill(n.w1, input);
  fill(n.b1, input);
  fill(n.w2, n.hidden);
  fill(n.b2, n.hidden);
  return n;
}

QNetwork QNetwork::zeros(int k, int input) {
  if (k < 1 || input < 1) throw std::invalid_argument("QNetwork: bad shape");
  QNetwork n;
  n.k = k;
  n.input = input;
  n.w1.assign(static_cast<size_t>(n.hidden) * input, 0.0);
  n.b1.assign(static_cast<size_t>(n.hidden), 0.0);
  n.w2.assign(static_cast<size_t>(k) * n.hidden, 0.0);
  n.b2.assign(static_cast<size_t>(k), 0.0);
  return n;
}

void QNetwork::forward(std::span<const double> s, std::span<double> q_out) const {
  if (static_cast<int>(s.size()) != input)
    throw std::invalid_argument("QNetwork::forward: state length mismatch");
  if (static_cast<int>(q_out.size()) != k)
    throw std::invalid_argument("QNetwork::forward: output length mismatch");
  thread_local std::vector<double> z1, h;
  z1.resize(static_cast<size_t>(hidden));
  h.resize(static_cast<size_t>(hidden));
  const auto& ops = kernels::ops();
  ops.matvec(hidden, input, w1.data(), s.data(), b1.data(), z1.data());
  ops.selu(hidden, z1.data(), h.data());
  ops.matvec(k, hidden, w2.data(), h.data(), b2.data(), q_out.data());
}

std::vector<double> QNetwork::forward(std::span<const double> s) const {
  std::vector<double> q(static_cast<size_t>(k));
  forward(s, q);
  return q;
}

bool QNetwork::finite() const {
  auto ok = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  return ok(w1) && ok(b1) && ok(w2) && ok(b2);
}

void ReplayMemory::push(Transition t) {
  if (buffer_.size() < capacity_) {
    buffer_.push_back(std::move(t));
  } else {
    buffer_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

void ReplayMemory::clear() {
  buffer_.clear();
  head_ = 0;
}

const Transition& ReplayMemory::at(size_t i) const {
  return buffer_[(head_ + i) % buffer_.size()];
}

std::vector<const Transition*> ReplayMemory::sample(size_t count,
                                                    std::mt19937_64& rng) const {
  if (buffer_.empty()) throw std::logic_error("ReplayMemory::sample: empty");
  std::vector<const Transition*> out;
  out.reserve(count);
  if (buffer_.size() >= count) {
    // Partial Fisher-Yates: first `count` positions of a shuffled index list.
    std::vector<size_t> idx(buffer_.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      out.push_back(&buffer_[idx[i]]);
    }
  } else {
    std::uniform_int_distribution<size_t> pick(0, buffer_.size() - 1);
    for (size_t i = 0; i < count; ++i) out.push_back(&buffer_[pick(rng)]);
  }
  return out;
}

int greedy_action(const QNetwork& net, const StateVector& s) {
  if (s.valid_actions < 1)
    throw std::invalid_argument("greedy_action: no valid actions");
  thread_local std::vector<double> q;
  q.resize(static_cast<size_t>(net.k));
  net.forward(s.values, q);
  int best = 0;
  for (int a = 1; a < s.valid_actions; ++a)
    if (q[static_cast<size_t>(a)] > q[static_cast<size_t>(best)]) best = a;
  return best;
}

int select_action(const QNetwork& net, const StateVector& s, double epsilon,
                  std::mt19937_64& rng) {
  if (s.valid_actions < 1)
    throw std::invalid_argument("select_action: no valid actions");
  if (s.valid_actions == 1) return 0;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, s.valid_actions - 1);
    return pick(rng);
  }
  return greedy_action(net, s);
}

double train_step(QNetwork& net, const QNetwork& target,
                  std::span<const Transition* const> batch, double gamma,
                  double lr, TrainScratch& sc) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const int hidden = net.hidden;
  const int input = net.input;
  const int k = net.k;
  const auto& ops = kernels::ops();

  sc.z1.resize(static_cast<size_t>(hidden));
  sc.h.resize(static_cast<size_t>(hidden));
  sc.q.resize(static_cast<size_t>(k));
  sc.dz1.resize(static_cast<size_t>(hidden));
  sc.dh.resize(static_cast<size_t>(hidden));
  sc.gw1.assign(net.w1.size(), 0.0);
  sc.gb1.assign(net.b1.size(), 0.0);
  sc.gw2.assign(net.w2.size(), 0.0);
  sc.gb2.assign(net.b2.size(), 0.0);

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Transition* t : batch) {
    double y = t->r;
    if (!t->terminal) {
      if (t->s_next.valid_actions < 1)
        throw std::logic_error("train_step: non-terminal without next actions");
      target.forward(t->s_next.values, sc.q);
      double best = sc.q[0];
      for (int a = 1; a < t->s_next.valid_actions; ++a)
        best = std::max(best, sc.q[static_cast<size_t>(a)]);
      y += gamma * best;
    }

    ops.matvec(hidden, input, net.w1.data(), t->s.values.data(), net.b1.data(),
               sc.z1.data());
    ops.selu(hidden, sc.z1.data(), sc.h.data());
    ops.matvec(k, hidden, net.w2.data(), sc.h.data(), net.b2.data(),
               sc.q.data());

    const double diff = sc.q[static_cast<size_t>(t->a)] - y;
    loss += diff * diff;

    const double dqa = 2.0 * diff * inv_batch;
    sc.gb2[static_cast<size_t>(t->a)] += dqa;
    double* gw2_row = sc.gw2.data() + static_cast<size_t>(t->a) * hidden;
    ops.axpy(hidden, dqa, sc.h.data(), gw2_row);
    const double* w2_row = net.w2.data() + static_cast<size_t>(t->a) * hidden;
    for (int i = 0; i < hidden; ++i) sc.dh[static_cast<size_t>(i)] = w2_row[i] * dqa;
    ops.selu_grad(hidden, sc.z1.data(), sc.dh.data(), sc.dz1.data());
    ops.axpy(hidden, 1.0, sc.dz1.data(), sc.gb1.data());
    ops.ger_acc(hidden, input, sc.gw1.data(), sc.dz1.data(),
                t->s.values.data());
  }
  loss *= inv_batch;
  if (!std::isfinite(loss))
    throw std::runtime_error("train_step: non-finite loss, training aborted");

  ops.axpy(static_cast<int>(net.w1.size()), -lr, sc.gw1.data(), net.w1.data());
  ops.axpy(static_cast<int>(net.b1.size()), -lr, sc.gb1.data(), net.b1.data());
  ops.axpy(static_cast<int>(net.w2.size()), -lr, sc.gw2.data(), net.w2.data());
  ops.axpy(static_cast<int>(net.b2.size()), -lr, sc.gb2.data(), net.b2.data());
  return loss;
}

void sync_target(const QNetwork& net, QNetwork& target) { target = net; }

std::string agent_kind_name(AgentKind k) {
  return k == AgentKind::kChooseSubtree ? "choosesubtree" : "split";
}

void save_model(const std::string& path, const QNetwork& net,
                const ModelMeta& meta) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["agent"] = agent_kind_name(meta.agent);
  j["k"] = meta.k;
  j["dims"] = meta.dims;
  j["hidden"] = net.hidden;
  j["activation"] = "selu";
  j["w1"] = net.w1;
  j["b1"] = net.b1;
  j["w2"] = net.w2;
  j["b2"] = net.b2;
  j["hyperparameters"] = meta.hyperparameters_json.empty()
                             ? nlohmann::json::object()
                             : nlohmann::json::parse(meta.hyperparameters_json);
  j["seed"] = meta.seed;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("save_model: cannot open " + path);
  f << j.dump() << '\n';
  if (!f) throw DataError("save_model: write failed for " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("load_model: cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_model: " + path + " is not valid JSON: " + e.what());
  }
  auto need = [&](const char* field) {
    if (!j.contains(field))
      throw DataError("load_model: " + path + " missing field '" + field + "'");
  };
  for (const char* field : {"format_version", "agent", "k", "dims", "hidden",
                            "activation", "w1", "b1", "w2", "b2", "seed"})
    need(field);
  if (j["format_version"].get<int>() != 1)
    throw DataError("load_model: unsupported format_version in " + path);
  if (j["activation"].get<std::string>() != "selu")
    throw DataError("load_model: unsupported activation in " + path);

  LoadedModel m;
  const std::string agent = j["agent"].get<std::string>();
  if (agent == "choosesubtree")
    m.meta.agent = AgentKind::kChooseSubtree;
  else if (agent == "split")
    m.meta.agent = AgentKind::kSplit;
  else
    throw DataError("load_model: unknown agent kind '" + agent + "'");
  m.meta.k = j["k"].get<int>();
  m.meta.dims = j["dims"].get<int>();
  m.meta.seed = j["seed"].get<uint64_t>();
  if (j.contains("hyperparameters"))
    m.meta.hyperparameters_json = j["hyperparameters"].dump();

  m.net.k = m.meta.k;
  m.net.input = 4 * m.meta.k;
  m.net.hidden = j["hidden"].get<int>();
  m.net.w1 = j["w1"].get<std::vector<double>>();
  m.net.b1 = j["b1"].get<std::vector<double>>();
  m.net.w2 = j["w2"].get<std::vector<double>>();
  m.net.b2 = j["b2"].get<std::vector<double>>();
  if (m.meta.k < 1 || m.net.hidden < 1 ||
      m.net.w1.size() != static_cast<size_t>(m.net.hidden) * m.net.input ||
      m.net.b1.size() != static_cast<size_t>(m.net.hidden) ||
      m.net.w2.size() != static_cast<size_t>(m.net.k) * m.net.hidden ||
      m.net.b2.size() != static_cast<size_t>(m.net.k))
    throw DataError("load_model: inconsistent shapes in " + path);
  return m;
}

}  // namespace rlr
