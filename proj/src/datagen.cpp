#include "rlr/datagen.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "rlr/common.hpp"

namespace rlr {
namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

struct CsvReader {
  std::ifstream file;
  std::string path;
  size_t line_no = 0;
  std::string line;

  explicit CsvReader(const std::string& p) : file(p), path(p) {
    if (!file) throw DataError("cannot open " + p);
  }

  bool next() {
    while (std::getline(file, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + msg);
  }

  std::vector<std::string_view> fields() const {
    std::vector<std::string_view> out;
    size_t start = 0;
    const std::string_view sv(line);
    while (true) {
      const size_t comma = sv.find(',', start);
      if (comma == std::string_view::npos) {
        out.push_back(sv.substr(start));
        break;
      }
      out.push_back(sv.substr(start, comma - start));
      start = comma + 1;
    }
    return out;
  }
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double* out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, *out);
  return res.ec == std::errc() && res.ptr == end;
}

bool parse_int(std::string_view s, int64_t* out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, *out);
  return res.ec == std::errc() && res.ptr == end;
}

// Shared row layout for datasets and ingestion: id plus d (point) or 2d (box)
// coordinate columns, optional header detected by a non-numeric first field.
std::vector<ObjectRecord> read_records(const std::string& path, int dims) {
  CsvReader r(path);
  std::vector<ObjectRecord> out;
  bool first = true;
  size_t expect_cols = 0;
  while (r.next()) {
    const auto fields = r.fields();
    if (first) {
      first = false;
      double probe;
      if (!parse_double(fields[0], &probe)) continue;  // header line
    }
    if (expect_cols == 0) {
      if (fields.size() == static_cast<size_t>(1 + dims) ||
          fields.size() == static_cast<size_t>(1 + 2 * dims))
        expect_cols = fields.size();
      else
        r.fail("expected " + std::to_string(1 + dims) + " or " +
               std::to_string(1 + 2 * dims) + " columns, got " +
               std::to_string(fields.size()));
    }
    if (fields.size() != expect_cols)
      r.fail("ragged row: expected " + std::to_string(expect_cols) +
             " columns, got " + std::to_string(fields.size()));
    ObjectRecord rec;
    if (!parse_int(fields[0], &rec.id)) r.fail("non-numeric id field");
    double coords[2 * Rect::kMaxDims];
    for (size_t i = 1; i < fields.size(); ++i)
      if (!parse_double(fields[i], &coords[i - 1]))
        r.fail("non-numeric field " + std::to_string(i + 1));
    rec.mbr.dims = dims;
    const bool is_point = expect_cols == static_cast<size_t>(1 + dims);
    for (int d = 0; d < dims; ++d) {
      rec.mbr.lo(d) = coords[d];
      rec.mbr.hi(d) = is_point ? coords[d] : coords[dims + d];
      if (!(rec.mbr.lo(d) <= rec.mbr.hi(d))) r.fail("box with lo > hi");
    }
    out.push_back(rec);
  }
  return out;
}

}  // namespace

Distribution distribution_from_name(const std::string& name) {
  if (name == "uniform") return Distribution::kUniform;
  if (name == "gaussian") return Distribution::kGaussian;
  if (name == "skew") return Distribution::kSkew;
  throw DataError("unknown distribution '" + name +
                  "' (expected uniform, gaussian or skew)");
}

std::string distribution_name(Distribution d) {
  switch (d) {
    case Distribution::kUniform:
      return "uniform";
    case Distribution::kGaussian:
      return "gaussian";
    case Distribution::kSkew:
      return "skew";
  }
  return "?";
}

std::vector<ObjectRecord> gen_dataset(const DataGenConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("gen_dataset: n must be >= 1");
  if (cfg.dims < 1 || cfg.dims > Rect::kMaxDims)
    throw std::invalid_argument("gen_dataset: unsupported dims");
  if (cfg.distribution == Distribution::kSkew && cfg.dims != 2)
    throw DataError("skew datasets are 2-D only");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(cfg.gauss_mu, cfg.gauss_sigma);

  std::vector<ObjectRecord> out;
  out.reserve(static_cast<size_t>(cfg.n));
  double center[Rect::kMaxDims];
  const double half = 0.5 * cfg.object_side;
  for (int64_t i = 0; i < cfg.n; ++i) {
    switch (cfg.distribution) {
      case Distribution::kUniform:
        for (int d = 0; d < cfg.dims; ++d) center[d] = uni(rng);
        break;
      case Distribution::kGaussian:
        for (int d = 0; d < cfg.dims; ++d) {
          double v = gauss(rng);
          while (v < 0.0 || v > 1.0) v = gauss(rng);
          center[d] = v;
        }
        break;
      case Distribution::kSkew:
        center[0] = uni(rng);
        center[1] = uni(rng);
        if (cfg.skew_c != 1.0) center[1] = std::pow(center[1], cfg.skew_c);
        break;
    }
    ObjectRecord rec;
    rec.id = i;
    rec.mbr.dims = cfg.dims;
    for (int d = 0; d < cfg.dims; ++d) {
      rec.mbr.lo(d) = center[d] - half;
      rec.mbr.hi(d) = center[d] + half;
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<ObjectRecord> load_dataset_csv(const std::string& path, int dims) {
  return read_records(path, dims);
}

std::vector<ObjectRecord> ingest_points_csv(const std::string& path, int dims,
                                            RescaleInfo* rescale) {
  std::vector<ObjectRecord> recs = read_records(path, dims);
  RescaleInfo info;
  info.offset.assign(static_cast<size_t>(dims),
                     std::numeric_limits<double>::infinity());
  std::vector<double> maxv(static_cast<size_t>(dims),
                           -std::numeric_limits<double>::infinity());
  for (const ObjectRecord& r : recs)
    for (int d = 0; d < dims; ++d) {
      info.offset[static_cast<size_t>(d)] =
          std::min(info.offset[static_cast<size_t>(d)], r.mbr.lo(d));
      maxv[static_cast<size_t>(d)] =
          std::max(maxv[static_cast<size_t>(d)], r.mbr.hi(d));
    }
  info.scale.resize(static_cast<size_t>(dims));
  for (int d = 0; d < dims; ++d) {
    const double span = maxv[static_cast<size_t>(d)] - info.offset[static_cast<size_t>(d)];
    info.scale[static_cast<size_t>(d)] = span > 0 ? span : 1.0;
  }
  for (ObjectRecord& r : recs)
    for (int d = 0; d < dims; ++d) {
      r.mbr.lo(d) = (r.mbr.lo(d) - info.offset[static_cast<size_t>(d)]) /
                    info.scale[static_cast<size_t>(d)];
      r.mbr.hi(d) = (r.mbr.hi(d) - info.offset[static_cast<size_t>(d)]) /
                    info.scale[static_cast<size_t>(d)];
    }
  if (rescale != nullptr) *rescale = std::move(info);
  return recs;
}

void write_dataset_csv(const std::string& path,
                       const std::vector<ObjectRecord>& objects) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  std::string line;
  for (const ObjectRecord& r : objects) {
    line.clear();
    line += std::to_string(r.id);
    for (int d = 0; d < r.mbr.dims; ++d) {
      line += ',';
      append_double(line, r.mbr.lo(d));
    }
    for (int d = 0; d < r.mbr.dims; ++d) {
      line += ',';
      append_double(line, r.mbr.hi(d));
    }
    line += '\n';
    f << line;
  }
  if (!f) throw DataError("write failed for " + path);
}

Rect make_area_query(std::span<const double> center, double area,
                     double ratio_lo, double ratio_hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ratio_dist(ratio_lo, ratio_hi);
  const double ratio = ratio_dist(rng);
  const int d = static_cast<int>(center.size());
  const double base_side = std::pow(area, 1.0 / static_cast<double>(d));
  Rect q;
  q.dims = d;
  for (int i = 0; i < d; ++i) {
    double side = base_side;
    if (i == 0) side = base_side * std::sqrt(ratio);
    if (i == 1) side = base_side / std::sqrt(ratio);
    q.lo(i) = center[static_cast<size_t>(i)] - 0.5 * side;
    q.hi(i) = center[static_cast<size_t>(i)] + 0.5 * side;
  }
  return q;
}

std::vector<Rect> gen_test_queries(int count, double size_fraction, int dims,
                                   uint64_t seed) {
  if (count < 1) throw std::invalid_argument("gen_test_queries: count >= 1");
  if (!(size_fraction > 0))
    throw std::invalid_argument("gen_test_queries: size fraction > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Rect> out;
  out.reserve(static_cast<size_t>(count));
  double center[Rect::kMaxDims];
  for (int i = 0; i < count; ++i) {
    for (int d = 0; d < dims; ++d) center[d] = uni(rng);
    out.push_back(make_area_query(
        std::span<const double>(center, static_cast<size_t>(dims)),
        size_fraction, 0.1, 10.0, rng));
  }
  return out;
}

std::vector<std::vector<double>> gen_knn_workload(int count, int dims,
                                                  uint64_t seed) {
  if (count < 1) throw std::invalid_argument("gen_knn_workload: count >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::vector<double> p(static_cast<size_t>(dims));
    for (double& v : p) v = uni(rng);
    out.push_back(std::move(p));
  }
  return out;
}

void write_queries_csv(const std::string& path, const std::vector<Rect>& qs) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  std::string line;
  for (size_t i = 0; i < qs.size(); ++i) {
    line.clear();
    line += std::to_string(i);
    for (int d = 0; d < qs[i].dims; ++d) {
      line += ',';
      append_double(line, qs[i].lo(d));
    }
    for (int d = 0; d < qs[i].dims; ++d) {
      line += ',';
      append_double(line, qs[i].hi(d));
    }
    line += '\n';
    f << line;
  }
  if (!f) throw DataError("write failed for " + path);
}

std::vector<Rect> load_queries_csv(const std::string& path, int dims) {
  const auto recs = read_records(path, dims);
  std::vector<Rect> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back(r.mbr);
  return out;
}

void write_knn_workload_csv(const std::string& path,
                            const std::vector<std::vector<double>>& points,
                            int k) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  std::string line;
  for (size_t i = 0; i < points.size(); ++i) {
    line.clear();
    line += std::to_string(i);
    for (double v : points[i]) {
      line += ',';
      append_double(line, v);
    }
    line += ',';
    line += std::to_string(k);
    line += '\n';
    f << line;
  }
  if (!f) throw DataError("write failed for " + path);
}

std::vector<KnnQuerySpec> load_knn_workload_csv(const std::string& path,
                                                int dims) {
  CsvReader r(path);
  std::vector<KnnQuerySpec> out;
  bool first = true;
  while (r.next()) {
    const auto fields = r.fields();
    if (first) {
      first = false;
      double probe;
      if (!parse_double(fields[0], &probe)) continue;
    }
    if (fields.size() != static_cast<size_t>(dims + 2))
      r.fail("expected " + std::to_string(dims + 2) + " columns, got " +
             std::to_string(fields.size()));
    KnnQuerySpec spec;
    spec.point.resize(static_cast<size_t>(dims));
    int64_t qid, k;
    if (!parse_int(fields[0], &qid)) r.fail("non-numeric qid");
    for (int d = 0; d < dims; ++d)
      if (!parse_double(fields[static_cast<size_t>(d + 1)],
                        &spec.point[static_cast<size_t>(d)]))
        r.fail("non-numeric coordinate");
    if (!parse_int(fields.back(), &k) || k < 1) r.fail("bad K field");
    spec.k = static_cast<int>(k);
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace rlr
