#include "rlr/bench.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "rlr/common.hpp"

namespace rlr {
namespace {

// Runs fn(query_index) over [0, count) on `threads` workers; the partition is
// by contiguous chunks so writes into per-query slots never contend.
template <typename Fn>
void parallel_for(size_t count, int threads, const Fn& fn) {
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (size_t q = 0; q < count; ++q) fn(q);
    return;
  }
  std::vector<std::thread> pool;
  std::mutex error_mutex;
  std::exception_ptr error;
  const size_t chunk = (count + static_cast<size_t>(workers) - 1) /
                       static_cast<size_t>(workers);
  for (int w = 0; w < workers; ++w) {
    const size_t begin = static_cast<size_t>(w) * chunk;
    const size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        for (size_t q = begin; q < end; ++q) fn(q);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void finalize_means(BenchReport& report) {
  report.mean_relative_io.assign(report.index_names.size(), 0.0);
  const size_t nq = report.rows.empty() ? 0 : report.rows.front().size();
  if (nq == 0) return;
  for (size_t i = 0; i < report.index_names.size(); ++i) {
    double sum = 0;
    for (const QueryRow& row : report.rows[i]) sum += row.relative_io;
    report.mean_relative_io[i] = sum / static_cast<double>(nq);
  }
}

}  // namespace

BenchReport run_range_bench(std::span<const QueryIndex* const> indices,
                            const std::vector<Rect>& queries, size_t baseline,
                            const std::string& label, int threads) {
  if (indices.empty()) throw std::invalid_argument("bench: no indices");
  if (baseline >= indices.size())
    throw std::invalid_argument("bench: baseline index out of range");
  BenchReport report;
  report.workload_label = label;
  for (const QueryIndex* idx : indices) report.index_names.push_back(idx->name());
  report.baseline = baseline;
  report.rows.assign(indices.size(), std::vector<QueryRow>(queries.size()));

  parallel_for(queries.size(), threads, [&](size_t q) {
    QueryStats base_stats;
    const std::vector<int64_t> expected =
        indices[baseline]->range(queries[q], &base_stats);
    for (size_t i = 0; i < indices.size(); ++i) {
      QueryStats stats = base_stats;
      std::vector<int64_t> got = expected;
      if (i != baseline) {
        got = indices[i]->range(queries[q], &stats);
        if (got != expected)
          throw MismatchError("range result mismatch on query " +
                              std::to_string(q) + ": " + indices[i]->name() +
                              " vs " + indices[baseline]->name());
      }
      QueryRow& row = report.rows[i][q];
      row.node_accesses = stats.node_accesses;
      row.result_count = stats.result_count;
      row.elapsed_ns = stats.elapsed_ns;
      row.relative_io = static_cast<double>(stats.node_accesses) /
                        static_cast<double>(base_stats.node_accesses);
    }
  });
  finalize_means(report);
  return report;
}

BenchReport run_knn_bench(std::span<const QueryIndex* const> indices,
                          const std::vector<KnnQuerySpec>& workload,
                          size_t baseline, const std::string& label,
                          int threads) {
  if (indices.empty()) throw std::invalid_argument("bench: no indices");
  if (baseline >= indices.size())
    throw std::invalid_argument("bench: baseline index out of range");
  BenchReport report;
  report.workload_label = label;
  for (const QueryIndex* idx : indices) report.index_names.push_back(idx->name());
  report.baseline = baseline;
  report.rows.assign(indices.size(), std::vector<QueryRow>(workload.size()));

  parallel_for(workload.size(), threads, [&](size_t q) {
    QueryStats base_stats;
    const KnnResult expected =
        indices[baseline]->knn(workload[q].point, workload[q].k, &base_stats);
    for (size_t i = 0; i < indices.size(); ++i) {
      QueryStats stats = base_stats;
      if (i != baseline) {
        const KnnResult got =
            indices[i]->knn(workload[q].point, workload[q].k, &stats);
        if (got.ids != expected.ids)
          throw MismatchError("knn result mismatch on query " +
                              std::to_string(q) + ": " + indices[i]->name() +
                              " vs " + indices[baseline]->name());
      }
      QueryRow& row = report.rows[i][q];
      row.node_accesses = stats.node_accesses;
      row.result_count = stats.result_count;
      row.elapsed_ns = stats.elapsed_ns;
      row.relative_io = static_cast<double>(stats.node_accesses) /
                        static_cast<double>(base_stats.node_accesses);
    }
  });
  finalize_means(report);
  return report;
}

RankingResult ranking_experiment(std::span<const QueryIndex* const> variants,
                                 const std::vector<Rect>& queries,
                                 int threads) {
  if (variants.empty()) throw std::invalid_argument("ranking: no variants");
  RankingResult res;
  for (const QueryIndex* v : variants) res.names.push_back(v->name());
  res.best_counts.assign(variants.size(), 0);
  res.query_count = queries.size();

  std::vector<std::vector<uint64_t>> accesses(
      variants.size(), std::vector<uint64_t>(queries.size(), 0));
  parallel_for(queries.size(), threads, [&](size_t q) {
    std::vector<int64_t> expected;
    for (size_t i = 0; i < variants.size(); ++i) {
      QueryStats stats;
      std::vector<int64_t> got = variants[i]->range(queries[q], &stats);
      accesses[i][q] = stats.node_accesses;
      if (i == 0)
        expected = std::move(got);
      else if (got != expected)
        throw MismatchError("ranking: result mismatch on query " +
                            std::to_string(q));
    }
  });
  for (size_t q = 0; q < queries.size(); ++q) {
    uint64_t best = accesses[0][q];
    for (size_t i = 1; i < variants.size(); ++i)
      best = std::min(best, accesses[i][q]);
    for (size_t i = 0; i < variants.size(); ++i)
      if (accesses[i][q] == best) ++res.best_counts[i];  // ties share rank 1
  }
  return res;
}

void write_report_csv(const std::string& path,
                      std::span<const BenchReport> reports) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << "workload,qid,index,node_accesses,result_count,elapsed_ns,relative_io\n";
  char num[64];
  for (const BenchReport& r : reports) {
    for (size_t i = 0; i < r.index_names.size(); ++i) {
      for (size_t q = 0; q < r.rows[i].size(); ++q) {
        const QueryRow& row = r.rows[i][q];
        std::snprintf(num, sizeof(num), "%.17g", row.relative_io);
        f << r.workload_label << ',' << q << ',' << r.index_names[i] << ','
          << row.node_accesses << ',' << row.result_count << ','
          << row.elapsed_ns << ',' << num << '\n';
      }
    }
  }
  if (!f) throw DataError("write failed for " + path);
}

void write_report_json(const std::string& path,
                       std::span<const BenchReport> reports,
                       const std::string& metadata_json) {
  nlohmann::json summary = nlohmann::json::object();
  for (const BenchReport& r : reports)
    for (size_t i = 0; i < r.index_names.size(); ++i)
      summary[r.index_names[i]][r.workload_label] = r.mean_relative_io[i];
  nlohmann::json j;
  j["summary"] = summary;
  if (!reports.empty())
    j["baseline"] = reports.front().index_names[reports.front().baseline];
  j["metadata"] = metadata_json.empty()
                      ? nlohmann::json::object()
                      : nlohmann::json::parse(metadata_json);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
  if (!f) throw DataError("write failed for " + path);
}

}  // namespace rlr
