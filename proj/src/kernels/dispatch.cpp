#include <cstdlib>
#include <string_view>

#include "eedc/kernels.hpp"

namespace eedc::kernels {

#ifndef EEDC_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

const KernelTable& active() {
  static const KernelTable& table = [] () -> const KernelTable& {
    const char* env = std::getenv("EEDC_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar_table();
    if (const KernelTable* fast = avx2_table()) return *fast;
    return scalar_table();
  }();
  return table;
}

}  // namespace eedc::kernels
