#include "rlr/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace rlr::kernels {
namespace {

struct Selection {
  const Ops* ops;
  const char* name;
};

Selection select() {
  const char* env = std::getenv("RLR_KERNELS");
  if (env != nullptr) {
    const std::string_view want(env);
    if (want == "scalar") return {&scalar_ops(), "scalar"};
    if (want == "avx2") {
      if (const Ops* a = avx2_ops()) return {a, "avx2"};
      throw std::runtime_error("RLR_KERNELS=avx2 but AVX2 is unavailable");
    }
    throw std::runtime_error("unknown RLR_KERNELS value (use scalar|avx2)");
  }
  if (const Ops* a = avx2_ops()) return {a, "avx2"};
  return {&scalar_ops(), "scalar"};
}

const Selection& selection() {
  static const Selection s = select();
  return s;
}

}  // namespace

const Ops& ops() { return *selection().ops; }
const char* active_name() { return selection().name; }

}  // namespace rlr::kernels
