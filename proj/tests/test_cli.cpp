#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rlr/snapshot.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = RLR_CLI_PATH;

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / "rlr_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string run_capture(const std::string& args, const std::string& out_file) {
  const std::string cmd = kCli + " " + args + " > " + out_file + " 2>&1";
  std::system(cmd.c_str());
  std::ifstream f(out_file);
  return std::string(std::istreambuf_iterator<char>(f),
                     std::istreambuf_iterator<char>());
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  nlohmann::json j;
  f >> j;
  return j;
}

}  // namespace

TEST_CASE("gen-data is deterministic and writes a manifest") {
  Sandbox sb;
  const std::string a = sb.path("a.csv"), b = sb.path("b.csv"),
                    c = sb.path("c.csv");
  CHECK(run("gen-data --dist uniform --n 1000 --seed 7 --out " + a) == 0);
  CHECK(run("gen-data --dist uniform --n 1000 --seed 7 --out " + b) == 0);
  CHECK(run("gen-data --dist uniform --n 1000 --seed 8 --out " + c) == 0);
  CHECK(rlr::hash_file(a) == rlr::hash_file(b));
  CHECK(rlr::hash_file(a) != rlr::hash_file(c));

  std::ifstream f(a);
  size_t lines = 0;
  std::string line;
  while (std::getline(f, line)) ++lines;
  CHECK(lines == 1000);

  const auto manifest = read_json(a + ".manifest.json");
  CHECK(manifest.contains("command_line"));
  CHECK(manifest["outputs"][0] == a);
  CHECK(manifest["seeds"][0] == 7);
}

TEST_CASE("gen-data rejects bad flag combinations") {
  Sandbox sb;
  CHECK(run("gen-data --dist skew --n 10 --dims 3 --out " + sb.path("x.csv")) ==
        2);
  CHECK(run("gen-data --n 10 --out " + sb.path("x.csv")) == 1);  // missing dist
  CHECK(run("frobnicate") == 1);
}

TEST_CASE("full pipeline: generate, train, build, bench") {
  Sandbox sb;
  const std::string data = sb.path("data.csv");
  const std::string queries = sb.path("queries.csv");
  const std::string knn = sb.path("knn.csv");
  REQUIRE(run("gen-data --dist gaussian --n 1500 --seed 5 --out " + data) == 0);
  REQUIRE(run("gen-queries --count 60 --size-fraction 0.001 --seed 6 --out " +
              queries) == 0);
  REQUIRE(run("gen-queries --count 20 --knn --k 5 --seed 7 --out " + knn) == 0);

  // quick combined training on a small tree geometry
  const std::string model = sb.path("model");
  REQUIRE(run("train --agent combined --data " + data + " --out-model " + model +
              " --epochs-cs 1 --epochs-split 1 --parts 4 --M 16 --m 6 --p 50 "
              "--seed 9") == 0);
  CHECK(fs::exists(model + ".cs.json"));
  CHECK(fs::exists(model + ".split.json"));
  CHECK(fs::exists(model + ".train.log"));
  CHECK(fs::exists(model + ".manifest.json"));

  const std::string info = run_capture("model-info --model " + model + ".cs.json",
                                       sb.path("info.txt"));
  const nlohmann::json meta = nlohmann::json::parse(info);
  CHECK(meta["agent"] == "choosesubtree");
  CHECK(meta["k"] == 2);
  CHECK(meta["hidden"] == 64);

  // heuristic build + snapshot round trip
  const std::string ref_idx = sb.path("ref.idx");
  REQUIRE(run("build --data " + data + " --policy ref --M 16 --m 6 --out-index " +
              ref_idx) == 0);
  const rlr::RTree loaded = rlr::load_index_snapshot(ref_idx);
  CHECK(loaded.size() == 1500);
  CHECK(loaded.validate().empty());

  // learned build
  const std::string rlr_idx = sb.path("rlr.idx");
  REQUIRE(run("build --data " + data + " --policy rlr --M 16 --m 6 " +
              "--model-cs " + model + ".cs.json --model-split " + model +
              ".split.json --out-index " + rlr_idx) == 0);

  // rlr policy without any model is an error
  CHECK(run("build --data " + data + " --policy rlr --out-index " +
            sb.path("no.idx")) == 2);
  CHECK(run("build --data " + data + " --policy nonsense --out-index " +
            sb.path("no.idx")) == 2);

  // bench: self-baseline ratios are exactly 1, reports appear
  const std::string rep = sb.path("rep");
  REQUIRE(run("bench --indices " + ref_idx + " " + rlr_idx + " --queries " +
              queries + " --baseline " + ref_idx + " --report " + rep) == 0);
  const auto summary = read_json(rep + ".json");
  CHECK(summary["summary"]["ref"]["queries"].get<double>() == 1.0);
  CHECK(summary["summary"]["rlr"]["queries"].get<double>() > 0.0);
  CHECK(fs::exists(rep + ".csv"));
  CHECK(fs::exists(rep + ".manifest.json"));

  // benching the same snapshot twice yields identical counts
  const std::string rep2 = sb.path("rep2");
  REQUIRE(run("bench --indices " + ref_idx + " " + rlr_idx + " --queries " +
              queries + " --baseline " + ref_idx + " --report " + rep2) == 0);
  const auto summary2 = read_json(rep2 + ".json");
  CHECK(summary["summary"] == summary2["summary"]);

  // knn workload summary
  const std::string krep = sb.path("krep");
  REQUIRE(run("bench --indices " + ref_idx + " " + rlr_idx + " --queries " + knn +
              " --knn --baseline " + ref_idx + " --report " + krep) == 0);
  const auto ksummary = read_json(krep + ".json");
  CHECK(ksummary["summary"]["ref"]["knn"].get<double>() == 1.0);

  // missing query file is a usage error
  CHECK(run("bench --indices " + ref_idx + " --queries " + sb.path("nope.csv") +
            " --report " + sb.path("r")) == 1);
}

TEST_CASE("training determinism through the CLI") {
  Sandbox sb;
  const std::string data = sb.path("data.csv");
  REQUIRE(run("gen-data --dist gaussian --n 1200 --seed 15 --out " + data) == 0);
  const std::string m1 = sb.path("m1"), m2 = sb.path("m2");
  const std::string flags = " --epochs-cs 1 --epochs-split 1 --parts 4 --M 16 "
                            "--m 6 --p 50 --seed 77";
  REQUIRE(run("train --agent combined --data " + data + " --out-model " + m1 +
              flags) == 0);
  REQUIRE(run("train --agent combined --data " + data + " --out-model " + m2 +
              flags) == 0);
  CHECK(rlr::hash_file(m1 + ".cs.json") == rlr::hash_file(m2 + ".cs.json"));
  CHECK(rlr::hash_file(m1 + ".split.json") == rlr::hash_file(m2 + ".split.json"));
  CHECK(rlr::hash_file(m1 + ".train.log") == rlr::hash_file(m2 + ".train.log"));
}

TEST_CASE("model mismatch is rejected at build time") {
  Sandbox sb;
  const std::string data = sb.path("data.csv");
  REQUIRE(run("gen-data --dist uniform --n 800 --seed 3 --out " + data) == 0);
  const std::string m2 = sb.path("k2"), m3 = sb.path("k3");
  const std::string flags = " --epochs-cs 1 --M 16 --m 6 --p 50 --seed 4";
  REQUIRE(run("train --agent cs --data " + data + " --out-model " + m2 + flags) ==
          0);
  REQUIRE(run("train --agent cs --data " + data + " --out-model " + m3 + flags +
              " --k 3") == 0);
  // split slot fed with a choose model
  CHECK(run("build --data " + data + " --policy rlr --M 16 --m 6 --model-split " +
            m2 + ".cs.json --out-index " + sb.path("x.idx")) == 2);
  // mixed k between the two models: train a k=3 split model quickly
  const std::string s3 = sb.path("s3");
  REQUIRE(run("train --agent split --data " + data + " --out-model " + s3 +
              " --epochs-split 1 --parts 4 --M 16 --m 6 --p 50 --seed 5 --k 3") ==
          0);
  CHECK(run("build --data " + data + " --policy rlr --M 16 --m 6 --model-cs " +
            m2 + ".cs.json --model-split " + s3 + ".split.json --out-index " +
            sb.path("y.idx")) == 2);
  // matching k works
  CHECK(run("build --data " + data + " --policy rlr --M 16 --m 6 --model-cs " +
            m3 + ".cs.json --model-split " + s3 + ".split.json --out-index " +
            sb.path("z.idx")) == 0);
}

TEST_CASE("corrupt snapshots are rejected") {
  Sandbox sb;
  const std::string data = sb.path("data.csv");
  REQUIRE(run("gen-data --dist uniform --n 500 --seed 2 --out " + data) == 0);
  const std::string idx = sb.path("ref.idx");
  REQUIRE(run("build --data " + data + " --policy ref --M 16 --m 6 "
              "--out-index " + idx) == 0);
  // flip one byte in the middle
  {
    std::fstream f(idx, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(100);
    char c;
    f.seekg(100);
    f.get(c);
    f.seekp(100);
    f.put(static_cast<char>(c ^ 0x40));
  }
  const std::string queries = sb.path("q.csv");
  REQUIRE(run("gen-queries --count 5 --size-fraction 0.001 --out " + queries) ==
          0);
  CHECK(run("bench --indices " + idx + " --queries " + queries + " --report " +
            sb.path("r")) == 2);
}
