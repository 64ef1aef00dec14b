// Command-line front end: data/query generation, model training, index
// construction, benchmarking, and model inspection.
//
// Exit codes: 0 success, 1 usage, 2 validation/data error, 3 internal
// assertion (including cross-index result mismatches).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlr/bench.hpp"
#include "rlr/common.hpp"
#include "rlr/datagen.hpp"
#include "rlr/dqn.hpp"
#include "rlr/heuristics.hpp"
#include "rlr/snapshot.hpp"
#include "rlr/trainer.hpp"

namespace {

using nlohmann::json;

std::string g_command_line;

int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

uint64_t default_seed() {
  if (const char* env = std::getenv("RLR_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw rlr::DataError("RLR_SEED is not a valid integer");
    }
  }
  return 12345;
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

void write_manifest(const std::string& path, const json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, uint64_t seed,
                    int64_t wall_ms) {
  json j;
  j["command_line"] = g_command_line;
  j["config"] = config;
  j["seeds"] = {seed};
  json hashes = json::object();
  for (const std::string& in : inputs) hashes[in] = rlr::hash_file(in);
  j["input_hashes"] = hashes;
  j["outputs"] = outputs;
  j["wall_clock_ms"] = wall_ms;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw rlr::DataError("cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
  std::string dist;
  int64_t n = 0;
  int dims = 2;
  uint64_t seed = 0;
  std::string out;
  double side = 1e-4;
  double skew_c = 9.0;
  double mu = 0.5;
  double sigma = 0.2;
};

void run_gen_data(const GenDataArgs& a) {
  const int64_t t0 = now_ms();
  rlr::DataGenConfig cfg;
  cfg.distribution = rlr::distribution_from_name(a.dist);
  cfg.n = a.n;
  cfg.dims = a.dims;
  cfg.object_side = a.side;
  cfg.skew_c = a.skew_c;
  cfg.gauss_mu = a.mu;
  cfg.gauss_sigma = a.sigma;
  cfg.seed = a.seed;
  const auto objects = rlr::gen_dataset(cfg);
  rlr::write_dataset_csv(a.out, objects);
  json config = {{"dist", a.dist},   {"n", a.n},         {"dims", a.dims},
                 {"side", a.side},   {"skew_c", a.skew_c}, {"mu", a.mu},
                 {"sigma", a.sigma}};
  write_manifest(a.out + ".manifest.json", config, {}, {a.out}, a.seed,
                 now_ms() - t0);
  std::cout << "wrote " << objects.size() << " objects to " << a.out << "\n";
}

struct GenQueriesArgs {
  int count = 1000;
  double size_fraction = 1e-4;
  int dims = 2;
  uint64_t seed = 0;
  std::string out;
  bool knn = false;
  int k = 1;
};

void run_gen_queries(const GenQueriesArgs& a) {
  const int64_t t0 = now_ms();
  json config = {{"count", a.count}, {"dims", a.dims}, {"knn", a.knn}};
  if (a.knn) {
    const auto points = rlr::gen_knn_workload(a.count, a.dims, a.seed);
    rlr::write_knn_workload_csv(a.out, points, a.k);
    config["k"] = a.k;
  } else {
    const auto queries =
        rlr::gen_test_queries(a.count, a.size_fraction, a.dims, a.seed);
    rlr::write_queries_csv(a.out, queries);
    config["size_fraction"] = a.size_fraction;
  }
  write_manifest(a.out + ".manifest.json", config, {}, {a.out}, a.seed,
                 now_ms() - t0);
  std::cout << "wrote " << a.count << (a.knn ? " knn points to " : " queries to ")
            << a.out << "\n";
}

struct TrainArgs {
  std::string agent;
  std::string data;
  std::string out_model;
  std::string log_path;
  rlr::TrainConfig cfg;
};

void run_train(const TrainArgs& a) {
  const int64_t t0 = now_ms();
  a.cfg.validate();
  const auto dataset = rlr::load_dataset_csv(a.data, a.cfg.dims);
  if (dataset.empty()) throw rlr::DataError("training dataset is empty");

  const std::string log_path =
      a.log_path.empty() ? a.out_model + ".train.log" : a.log_path;
  std::ofstream log_file(log_path, std::ios::binary);
  if (!log_file) throw rlr::DataError("cannot open " + log_path);
  rlr::TrainLogger logger(&log_file);

  std::vector<std::string> outputs;
  auto save = [&](const rlr::QNetwork& net, rlr::AgentKind kind) {
    rlr::ModelMeta meta;
    meta.agent = kind;
    meta.k = a.cfg.k;
    meta.dims = a.cfg.dims;
    meta.seed = a.cfg.seed;
    meta.hyperparameters_json = a.cfg.hyperparameters_json(kind);
    const std::string path =
        a.out_model + (kind == rlr::AgentKind::kChooseSubtree ? ".cs.json"
                                                              : ".split.json");
    rlr::save_model(path, net, meta);
    outputs.push_back(path);
  };

  if (a.agent == "cs") {
    save(rlr::train_choose_subtree(dataset, a.cfg, &logger),
         rlr::AgentKind::kChooseSubtree);
  } else if (a.agent == "split") {
    save(rlr::train_split(dataset, a.cfg, &logger), rlr::AgentKind::kSplit);
  } else if (a.agent == "combined") {
    const auto nets = rlr::train_combined(dataset, a.cfg, &logger);
    save(nets.first, rlr::AgentKind::kChooseSubtree);
    save(nets.second, rlr::AgentKind::kSplit);
  } else {
    throw rlr::DataError("unknown agent '" + a.agent +
                         "' (expected cs, split or combined)");
  }
  outputs.push_back(log_path);

  json config = {{"agent", a.agent},
                 {"hyperparameters_cs",
                  json::parse(a.cfg.hyperparameters_json(
                      rlr::AgentKind::kChooseSubtree))},
                 {"hyperparameters_split",
                  json::parse(a.cfg.hyperparameters_json(rlr::AgentKind::kSplit))},
                 {"dims", a.cfg.dims}};
  write_manifest(a.out_model + ".manifest.json", config, {a.data}, outputs,
                 a.cfg.seed, now_ms() - t0);
  for (const std::string& o : outputs) std::cout << "wrote " << o << "\n";
}

struct BuildArgs {
  std::string data;
  std::string policy;
  std::string model_cs, model_split;
  std::string out_index;
  int dims = 2;
  int max_entries = 50;
  int min_entries = 20;
  uint64_t seed = 0;
};

// Loads a model and insists it matches the expected role and geometry.
rlr::LoadedModel load_checked_model(const std::string& path,
                                    rlr::AgentKind kind, int dims,
                                    std::optional<int> expect_k) {
  rlr::LoadedModel m = rlr::load_model(path);
  if (m.meta.agent != kind)
    throw rlr::DataError(path + ": expected a " + rlr::agent_kind_name(kind) +
                         " model, found " + rlr::agent_kind_name(m.meta.agent));
  if (m.meta.dims != dims)
    throw rlr::DataError(path + ": model dims " + std::to_string(m.meta.dims) +
                         " do not match data dims " + std::to_string(dims));
  if (expect_k.has_value() && m.meta.k != *expect_k)
    throw rlr::DataError(path + ": model k " + std::to_string(m.meta.k) +
                         " does not match expected k " +
                         std::to_string(*expect_k));
  return m;
}

void run_build(const BuildArgs& a) {
  const int64_t t0 = now_ms();
  const auto dataset = rlr::load_dataset_csv(a.data, a.dims);
  if (dataset.empty()) throw rlr::DataError("dataset is empty");

  std::vector<std::string> inputs{a.data};
  rlr::RTree tree(a.dims, a.max_entries, a.min_entries);
  if (a.policy == "rlr") {
    if (a.model_cs.empty() && a.model_split.empty())
      throw rlr::DataError(
          "--policy rlr needs --model-cs and/or --model-split");
    std::optional<rlr::LoadedModel> cs, split;
    std::optional<int> k;
    if (!a.model_cs.empty()) {
      cs = load_checked_model(a.model_cs, rlr::AgentKind::kChooseSubtree,
                              a.dims, k);
      k = cs->meta.k;
      inputs.push_back(a.model_cs);
    }
    if (!a.model_split.empty()) {
      split = load_checked_model(a.model_split, rlr::AgentKind::kSplit, a.dims, k);
      k = split->meta.k;
      inputs.push_back(a.model_split);
    }
    rlr::TrainConfig cfg;
    cfg.k = *k;
    cfg.dims = a.dims;
    cfg.max_entries = a.max_entries;
    cfg.min_entries = a.min_entries;
    cfg.seed = a.seed;
    tree = rlr::build_rlr_tree(dataset, cs ? &cs->net : nullptr,
                               split ? &split->net : nullptr, cfg);
  } else {
    rlr::HeuristicPolicy policy(rlr::heuristic_from_name(a.policy));
    for (const auto& obj : dataset) tree.insert(obj, policy);
  }

  const auto violations = tree.validate();
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "validate: " << v << "\n";
    throw rlr::DataError("index validation failed with " +
                         std::to_string(violations.size()) + " violations");
  }
  rlr::save_index_snapshot(a.out_index, tree);
  json config = {{"policy", a.policy},
                 {"dims", a.dims},
                 {"M", a.max_entries},
                 {"m", a.min_entries},
                 {"objects", dataset.size()},
                 {"nodes", tree.node_count()},
                 {"height", tree.height()}};
  write_manifest(a.out_index + ".manifest.json", config, inputs, {a.out_index},
                 a.seed, now_ms() - t0);
  std::cout << "built " << a.policy << " index: " << dataset.size()
            << " objects, " << tree.node_count() << " nodes, height "
            << tree.height() << " -> " << a.out_index << "\n";
}

struct BenchArgs {
  std::vector<std::string> indices;
  std::string queries;
  std::string baseline;
  std::string report;
  bool knn = false;
  int threads = 1;
  int dims = 2;
  uint64_t seed = 0;
};

void run_bench(const BenchArgs& a) {
  const int64_t t0 = now_ms();
  std::vector<rlr::RTree> trees;
  trees.reserve(a.indices.size());
  std::vector<std::string> names;
  for (const std::string& path : a.indices) {
    trees.push_back(rlr::load_index_snapshot(path));
    names.push_back(stem_of(path));
  }
  std::vector<rlr::RTreeIndex> handles;
  std::vector<const rlr::QueryIndex*> ptrs;
  for (size_t i = 0; i < trees.size(); ++i)
    handles.emplace_back(names[i], &trees[i]);
  for (const auto& h : handles) ptrs.push_back(&h);

  size_t baseline = 0;
  if (!a.baseline.empty()) {
    const std::string want = stem_of(a.baseline);
    bool found = false;
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == want || a.indices[i] == a.baseline) {
        baseline = i;
        found = true;
      }
    if (!found)
      throw rlr::DataError("--baseline " + a.baseline +
                           " is not one of the --indices");
  }

  const int dims = trees.front().dims();
  const std::string label = stem_of(a.queries);
  rlr::BenchReport report;
  if (a.knn) {
    const auto workload = rlr::load_knn_workload_csv(a.queries, dims);
    report = rlr::run_knn_bench(ptrs, workload, baseline, label, a.threads);
  } else {
    const auto queries = rlr::load_queries_csv(a.queries, dims);
    report = rlr::run_range_bench(ptrs, queries, baseline, label, a.threads);
  }

  json metadata = json::object();
  metadata["queries"] = a.queries;
  metadata["query_file_hash"] = rlr::hash_file(a.queries);
  json idx = json::object();
  for (const std::string& path : a.indices) idx[path] = rlr::hash_file(path);
  metadata["index_hashes"] = idx;
  metadata["threads"] = a.threads;
  metadata["knn"] = a.knn;

  const std::string csv_path = a.report + ".csv";
  const std::string json_path = a.report + ".json";
  rlr::write_report_csv(csv_path, {&report, 1});
  rlr::write_report_json(json_path, {&report, 1}, metadata.dump());

  std::vector<std::string> inputs = a.indices;
  inputs.push_back(a.queries);
  write_manifest(a.report + ".manifest.json", metadata, inputs,
                 {csv_path, json_path}, a.seed, now_ms() - t0);

  for (size_t i = 0; i < report.index_names.size(); ++i)
    std::cout << report.index_names[i] << ": mean relative I/O "
              << report.mean_relative_io[i] << "\n";
}

void run_model_info(const std::string& path) {
  const rlr::LoadedModel m = rlr::load_model(path);
  json j;
  j["agent"] = rlr::agent_kind_name(m.meta.agent);
  j["k"] = m.meta.k;
  j["dims"] = m.meta.dims;
  j["hidden"] = m.net.hidden;
  j["activation"] = "selu";
  j["seed"] = m.meta.seed;
  j["parameters"] = m.net.parameter_count();
  j["hyperparameters"] = m.meta.hyperparameters_json.empty()
                             ? json::object()
                             : json::parse(m.meta.hyperparameters_json);
  std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) {
    if (i > 0) g_command_line += ' ';
    g_command_line += argv[i];
  }

  CLI::App app{"R-Tree spatial index with trainable insertion policies"};
  app.require_subcommand(1);
  uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const rlr::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  GenDataArgs gd;
  gd.seed = seed;
  CLI::App* gen_data = app.add_subcommand("gen-data", "Generate a synthetic dataset CSV");
  gen_data->add_option("--dist", gd.dist, "uniform|gaussian|skew")->required();
  gen_data->add_option("--n", gd.n, "object count")->required();
  gen_data->add_option("--dims", gd.dims, "dimensions (default 2)");
  gen_data->add_option("--seed", gd.seed, "random seed");
  gen_data->add_option("--out", gd.out, "output CSV path")->required();
  gen_data->add_option("--side", gd.side, "object side length");
  gen_data->add_option("--skew-c", gd.skew_c, "skew exponent");
  gen_data->add_option("--mu", gd.mu, "gaussian mean");
  gen_data->add_option("--sigma", gd.sigma, "gaussian stddev");

  GenQueriesArgs gq;
  gq.seed = seed;
  CLI::App* gen_queries =
      app.add_subcommand("gen-queries", "Generate range or KNN query workloads");
  gen_queries->add_option("--count", gq.count, "query count");
  gen_queries->add_option("--size-fraction", gq.size_fraction,
                          "query area as a fraction of the region");
  gen_queries->add_option("--dims", gq.dims, "dimensions");
  gen_queries->add_option("--seed", gq.seed, "random seed");
  gen_queries->add_option("--out", gq.out, "output CSV path")->required();
  gen_queries->add_flag("--knn", gq.knn, "emit a KNN point workload instead");
  gen_queries->add_option("--k", gq.k, "K for KNN workloads");

  TrainArgs tr;
  tr.cfg.seed = seed;
  CLI::App* train = app.add_subcommand("train", "Train insertion models");
  train->add_option("--agent", tr.agent, "cs|split|combined")->required();
  train->add_option("--data", tr.data, "training dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out-model", tr.out_model, "output model path prefix")
      ->required();
  train->add_option("--log", tr.log_path, "training log path");
  train->add_option("--dims", tr.cfg.dims, "dimensions");
  train->add_option("--k", tr.cfg.k, "action-space size");
  train->add_option("--p", tr.cfg.p, "objects per round");
  train->add_option("--epochs-cs", tr.cfg.epochs_cs, "ChooseSubtree epochs");
  train->add_option("--epochs-split", tr.cfg.epochs_split, "Split epochs");
  train->add_option("--parts", tr.cfg.parts, "base-tree schedule parts");
  train->add_option("--gamma-cs", tr.cfg.gamma_cs, "discount (ChooseSubtree)");
  train->add_option("--gamma-split", tr.cfg.gamma_split, "discount (Split)");
  train->add_option("--lr-cs", tr.cfg.lr_cs, "learning rate (ChooseSubtree)");
  train->add_option("--lr-split", tr.cfg.lr_split, "learning rate (Split)");
  train->add_option("--batch", tr.cfg.batch, "train batch size");
  train->add_option("--memory-cap", tr.cfg.memory_cap, "replay memory capacity");
  train->add_option("--sync-every", tr.cfg.target_sync_every,
                    "target sync cadence (updates)");
  train->add_option("--query-fraction", tr.cfg.train_query_area_fraction,
                    "training query area fraction");
  train->add_option("--M", tr.cfg.max_entries, "node capacity");
  train->add_option("--m", tr.cfg.min_entries, "node minimum fill");
  train->add_option("--seed", tr.cfg.seed, "random seed");

  BuildArgs bu;
  bu.seed = seed;
  CLI::App* build = app.add_subcommand("build", "Build and snapshot an index");
  build->add_option("--data", bu.data, "dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  build
      ->add_option("--policy", bu.policy,
                   rlr::heuristic_policy_names() + ", rlr")
      ->required();
  build->add_option("--model-cs", bu.model_cs, "ChooseSubtree model (rlr)")
      ->check(CLI::ExistingFile);
  build->add_option("--model-split", bu.model_split, "Split model (rlr)")
      ->check(CLI::ExistingFile);
  build->add_option("--out-index", bu.out_index, "snapshot path")->required();
  build->add_option("--dims", bu.dims, "dimensions");
  build->add_option("--M", bu.max_entries, "node capacity");
  build->add_option("--m", bu.min_entries, "node minimum fill");

  BenchArgs be;
  be.seed = seed;
  CLI::App* bench = app.add_subcommand("bench", "Benchmark indices in lockstep");
  bench->add_option("--indices", be.indices, "index snapshots")
      ->required()
      ->check(CLI::ExistingFile);
  bench->add_option("--queries", be.queries, "query workload CSV")
      ->required()
      ->check(CLI::ExistingFile);
  bench->add_option("--baseline", be.baseline,
                    "baseline index (defaults to the first)");
  bench->add_option("--report", be.report, "report path prefix")->required();
  bench->add_flag("--knn", be.knn, "workload is KNN points");
  bench->add_option("--threads", be.threads, "parallel query workers");

  std::string model_info_path;
  CLI::App* model_info = app.add_subcommand("model-info", "Print model metadata");
  model_info->add_option("--model", model_info_path, "model file")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
    if (gen_data->parsed()) run_gen_data(gd);
    if (gen_queries->parsed()) run_gen_queries(gq);
    if (train->parsed()) run_train(tr);
    if (build->parsed()) run_build(bu);
    if (bench->parsed()) run_bench(be);
    if (model_info->parsed()) run_model_info(model_info_path);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const rlr::MismatchError& e) {
    std::cerr << "mismatch: " << e.what() << "\n";
    return 3;
  } catch (const rlr::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
