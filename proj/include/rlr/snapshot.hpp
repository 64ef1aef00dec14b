#pragma once

#include <string>

#include "rlr/rtree.hpp"

namespace rlr {

/// Versioned binary index snapshot (magic, version, M, m, dims, node count,
/// arena dump, FNV-1a checksum). Native endianness; loading verifies the
/// checksum and structural consistency.
void save_index_snapshot(const std::string& path, const RTree& tree);
RTree load_index_snapshot(const std::string& path);

/// FNV-1a 64 hash of a file's bytes (hex string); used by manifests and
/// determinism checks.
std::string hash_file(const std::string& path);

}  // namespace rlr
