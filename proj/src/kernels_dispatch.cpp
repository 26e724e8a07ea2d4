#include <cstdlib>
#include <cstring>

#include "anisomt/kernels.hpp"

namespace anisomt::kernels {

#if defined(ANISOMT_HAVE_AVX2)
const Table& avx2_table();
#endif

const Table* avx2() {
#if defined(ANISOMT_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Table& active() {
  static const Table* chosen = [] {
    const char* force = std::getenv("ANISOMT_FORCE_SCALAR");
    if (force && std::strcmp(force, "1") == 0) return &scalar();
    const Table* t = avx2();
    return t ? t : &scalar();
  }();
  return *chosen;
}

}  // namespace anisomt::kernels
