#include "rlr/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "rlr/common.hpp"

namespace rlr {
namespace {

constexpr uint64_t kMagic = 0x315045455254524cull;  // "LRTREEP1"
constexpr uint32_t kVersion = 1;

struct Writer {
  std::string buf;

  template <typename T>
  void put(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
};

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    if (pos + sizeof(T) > buf.size())
      throw DataError("snapshot: truncated file");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
};

}  // namespace

void save_index_snapshot(const std::string& path, const RTree& tree) {
  Writer w;
  w.put(kMagic);
  w.put(kVersion);
  w.put(static_cast<uint32_t>(tree.max_entries()));
  w.put(static_cast<uint32_t>(tree.min_entries()));
  w.put(static_cast<uint32_t>(tree.dims()));
  w.put(static_cast<uint64_t>(tree.node_count()));
  w.put(static_cast<int32_t>(tree.root()));
  w.put(static_cast<uint64_t>(tree.size()));
  const int dims = tree.dims();
  for (size_t i = 0; i < tree.node_count(); ++i) {
    const Node& n = tree.node(static_cast<NodeId>(i));
    w.put(n.level);
    w.put(n.parent);
    w.put(static_cast<uint32_t>(n.entries.size()));
    for (const Entry& e : n.entries) {
      w.put(e.id);
      for (int d = 0; d < 2 * dims; ++d)
        w.put(e.rect.c[static_cast<size_t>(d)]);
    }
  }
  const uint64_t checksum = fnv1a(w.buf.data(), w.buf.size());
  w.put(checksum);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  if (!f) throw DataError("write failed for " + path);
}

RTree load_index_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(uint64_t)) throw DataError("snapshot: file too small");

  uint64_t stored_checksum;
  std::memcpy(&stored_checksum, buf.data() + buf.size() - sizeof(uint64_t),
              sizeof(uint64_t));
  const uint64_t actual =
      fnv1a(buf.data(), buf.size() - sizeof(uint64_t));
  if (stored_checksum != actual)
    throw DataError("snapshot: checksum mismatch in " + path);

  Reader r{buf};
  if (r.get<uint64_t>() != kMagic)
    throw DataError("snapshot: bad magic in " + path);
  if (r.get<uint32_t>() != kVersion)
    throw DataError("snapshot: unsupported version in " + path);
  const uint32_t max_entries = r.get<uint32_t>();
  const uint32_t min_entries = r.get<uint32_t>();
  const uint32_t dims = r.get<uint32_t>();
  const uint64_t node_count = r.get<uint64_t>();
  const int32_t root = r.get<int32_t>();
  const uint64_t object_count = r.get<uint64_t>();
  if (dims < 1 || dims > static_cast<uint32_t>(Rect::kMaxDims))
    throw DataError("snapshot: bad dims in " + path);

  std::vector<Node> nodes(node_count);
  for (uint64_t i = 0; i < node_count; ++i) {
    Node& n = nodes[i];
    n.level = r.get<int32_t>();
    n.parent = r.get<int32_t>();
    const uint32_t entry_count = r.get<uint32_t>();
    n.entries.resize(entry_count);
    for (uint32_t e = 0; e < entry_count; ++e) {
      n.entries[e].id = r.get<int64_t>();
      n.entries[e].rect.dims = static_cast<int32_t>(dims);
      for (uint32_t d = 0; d < 2 * dims; ++d)
        n.entries[e].rect.c[d] = r.get<double>();
    }
  }
  return RTree::from_nodes(static_cast<int>(dims),
                           static_cast<int>(max_entries),
                           static_cast<int>(min_entries), std::move(nodes),
                           root, object_count);
}

std::string hash_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path);
  uint64_t h = kFnvOffset;
  char buf[65536];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0)
    h = fnv1a(buf, static_cast<size_t>(f.gcount()), h);
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(h));
  return out;
}

}  // namespace rlr
