#include <cstdlib>
#include <string_view>

#include "ccgnn/kernels.hpp"

namespace ccgnn::kernels {

bool cpu_has_avx2_fma() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& choose() noexcept {
  const char* forced = std::getenv("CCGNN_KERNELS");
  if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_table();
  if (const KernelTable* t = avx2_table(); t != nullptr && cpu_has_avx2_fma()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = choose();
  return table;
}

}  // namespace ccgnn::kernels
