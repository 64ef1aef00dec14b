#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rlr {

// Data/validation problems caused by user input: bad files, mismatched
// models, failed index validation. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Cross-index disagreement detected by the benchmark harness (an index bug).
class MismatchError : public std::runtime_error {
 public:
  explicit MismatchError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

inline uint64_t fnv1a(const void* data, size_t len, uint64_t h = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline uint64_t fnv1a(std::string_view s, uint64_t h = kFnvOffset) {
  return fnv1a(s.data(), s.size(), h);
}

// Stable sub-seed for a named random stream ("train/cs", "test-queries", ...).
inline uint64_t derive_seed(uint64_t master, std::string_view domain) {
  uint64_t h = fnv1a(&master, sizeof(master));
  return fnv1a(domain, h);
}

}  // namespace rlr
