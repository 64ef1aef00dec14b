#pragma once

#include <span>
#include <string>
#include <vector>

#include "rlr/datagen.hpp"
#include "rlr/rtree.hpp"

namespace rlr {

/// Read-only query surface the benchmark drives. Every index in one run must
/// hold the same object set; the harness hard-asserts identical results.
class QueryIndex {
 public:
  virtual ~QueryIndex() = default;
  virtual std::string name() const = 0;
  virtual std::vector<int64_t> range(const Rect& window,
                                     QueryStats* stats) const = 0;
  virtual KnnResult knn(std::span<const double> q, int k,
                        QueryStats* stats) const = 0;
};

class RTreeIndex : public QueryIndex {
 public:
  RTreeIndex(std::string name, const RTree* tree)
      : name_(std::move(name)), tree_(tree) {}
  std::string name() const override { return name_; }
  std::vector<int64_t> range(const Rect& window,
                             QueryStats* stats) const override {
    return tree_->range_query(window, stats);
  }
  KnnResult knn(std::span<const double> q, int k,
                QueryStats* stats) const override {
    return tree_->knn_query(q, k, stats);
  }

 private:
  std::string name_;
  const RTree* tree_;
};

struct QueryRow {
  uint64_t node_accesses = 0;
  uint64_t result_count = 0;
  int64_t elapsed_ns = 0;
  double relative_io = 0;  // accesses / baseline accesses for the same query
};

struct BenchReport {
  std::string workload_label;
  std::vector<std::string> index_names;
  size_t baseline = 0;
  std::vector<std::vector<QueryRow>> rows;  // [index][query]
  std::vector<double> mean_relative_io;     // [index], mean of per-query ratios
};

/// Runs every query on every index in lockstep. Per query the result-id sets
/// must match across indices (MismatchError otherwise). Relative I/O of the
/// baseline against itself is exactly 1. Queries may be fanned out over
/// `threads` workers; all counts are independent of the thread count.
BenchReport run_range_bench(std::span<const QueryIndex* const> indices,
                            const std::vector<Rect>& queries, size_t baseline,
                            const std::string& label, int threads = 1);

BenchReport run_knn_bench(std::span<const QueryIndex* const> indices,
                          const std::vector<KnnQuerySpec>& workload,
                          size_t baseline, const std::string& label,
                          int threads = 1);

struct RankingResult {
  std::vector<std::string> names;
  std::vector<size_t> best_counts;  // queries where the variant ranks first
  size_t query_count = 0;           // ties share rank 1

  bool has_full_dominator() const {
    for (size_t c : best_counts)
      if (c == query_count) return true;
    return false;
  }
  double fraction_best(size_t i) const {
    return static_cast<double>(best_counts[i]) /
           static_cast<double>(query_count);
  }
};

/// Ranks the variants per query by node accesses; used to reproduce the
/// motivating no-dominant-heuristic measurement.
RankingResult ranking_experiment(std::span<const QueryIndex* const> variants,
                                 const std::vector<Rect>& queries,
                                 int threads = 1);

/// Per-query CSV rows: workload,qid,index,node_accesses,result_count,
/// elapsed_ns,relative_io. Field order fixed.
void write_report_csv(const std::string& path,
                      std::span<const BenchReport> reports);

/// JSON summary {index -> {workload -> mean_relative_io}} plus metadata.
void write_report_json(const std::string& path,
                       std::span<const BenchReport> reports,
                       const std::string& metadata_json);

}  // namespace rlr
