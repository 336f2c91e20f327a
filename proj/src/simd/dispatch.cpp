#include <cstdlib>
#include <string_view>

#include "decomposer/simd/kernels.hpp"

namespace decomposer::simd {
namespace {

bool cpu_has_avx2() {
#if defined(DECOMPOSER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelTable& select_table() {
  const char* forced = std::getenv("DECOMPOSER_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") return detail::scalar_table();
  if (const KernelTable* avx2 = kernels_for(Isa::avx2)) return *avx2;
  return detail::scalar_table();
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable* kernels_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table();
    case Isa::avx2:
#if defined(DECOMPOSER_HAVE_AVX2)
      if (cpu_has_avx2()) return &detail::avx2_table();
#endif
      return nullptr;
  }
  return nullptr;
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out{Isa::scalar};
  if (kernels_for(Isa::avx2) != nullptr) out.push_back(Isa::avx2);
  return out;
}

const KernelTable& kernels() {
  static const KernelTable& active = select_table();
  return active;
}

}  // namespace decomposer::simd
