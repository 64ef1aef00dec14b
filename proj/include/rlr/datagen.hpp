#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rlr/geometry.hpp"

namespace rlr {

enum class Distribution { kUniform, kGaussian, kSkew };

Distribution distribution_from_name(const std::string& name);
std::string distribution_name(Distribution d);

struct DataGenConfig {
  Distribution distribution = Distribution::kUniform;
  int64_t n = 0;
  int dims = 2;
  double object_side = 1e-4;
  double skew_c = 9.0;
  double gauss_mu = 0.5;
  double gauss_sigma = 0.2;
  uint64_t seed = 0;
};

/// Synthetic objects: fixed-size axis-aligned squares/cubes whose centers lie
/// in the unit hypercube. uniform: iid U[0,1]^d; gaussian: per-coordinate
/// N(mu, sigma) redrawn until inside [0,1]; skew (2-D only): uniform then
/// y -> y^c. Ids run 0..n-1.
std::vector<ObjectRecord> gen_dataset(const DataGenConfig& cfg);

struct RescaleInfo {
  std::vector<double> offset;  // subtracted per dimension
  std::vector<double> scale;   // divided per dimension
};

/// Point/box CSV loader with min-max rescaling of all coordinates to
/// [0,1]^d. Rows are id,coord... with either d (points) or 2d (boxes)
/// coordinate columns; an optional header is auto-detected.
std::vector<ObjectRecord> ingest_points_csv(const std::string& path, int dims,
                                            RescaleInfo* rescale = nullptr);

/// Dataset CSV without rescaling: id, lo_1..lo_d, hi_1..hi_d (or d point
/// columns). Header auto-detected by a non-numeric first field.
std::vector<ObjectRecord> load_dataset_csv(const std::string& path, int dims);
void write_dataset_csv(const std::string& path,
                       const std::vector<ObjectRecord>& objects);

/// Test range queries: centers uniform in the unit region, aspect ratio
/// uniform in [0.1, 10], exact area = size_fraction of the region. Not
/// clipped to the region.
std::vector<Rect> gen_test_queries(int count, double size_fraction, int dims,
                                   uint64_t seed);

std::vector<std::vector<double>> gen_knn_workload(int count, int dims,
                                                  uint64_t seed);

// Query files: qid, lo_1..lo_d, hi_1..hi_d.
void write_queries_csv(const std::string& path, const std::vector<Rect>& qs);
std::vector<Rect> load_queries_csv(const std::string& path, int dims);

// KNN workload files: qid, coord_1..coord_d, K.
struct KnnQuerySpec {
  std::vector<double> point;
  int k = 1;
};
void write_knn_workload_csv(const std::string& path,
                            const std::vector<std::vector<double>>& points,
                            int k);
std::vector<KnnQuerySpec> load_knn_workload_csv(const std::string& path,
                                                int dims);

/// Range window with the given exact area and an aspect ratio drawn uniformly
/// from [ratio_lo, ratio_hi], centered at `center`; dims beyond the first two
/// share one side length so the area stays exact.
Rect make_area_query(std::span<const double> center, double area,
                     double ratio_lo, double ratio_hi, std::mt19937_64& rng);

}  // namespace rlr
