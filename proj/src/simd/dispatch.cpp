// Runtime backend selection. Built without SIMD target flags.

#include <atomic>

#include "kernel_defs.hpp"

namespace biosim::simd {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(BIOSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return &detail::kScalarTable;
    case Backend::Avx2: return cpu_has_avx2() ? avx2_kernels() : nullptr;
    case Backend::Neon: return neon_kernels();
  }
  return nullptr;
}

std::atomic<const KernelTable*>& active_table() noexcept {
  static std::atomic<const KernelTable*> table{table_for(best_available_backend())};
  return table;
}

}  // namespace

const KernelTable& scalar_kernels() noexcept { return detail::kScalarTable; }

const KernelTable* avx2_kernels() noexcept {
#if defined(BIOSIM_HAVE_AVX2)
  return &detail::kAvx2Table;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() noexcept {
#if defined(BIOSIM_HAVE_NEON)
  return &detail::kNeonTable;
#else
  return nullptr;
#endif
}

bool backend_available(Backend b) noexcept { return table_for(b) != nullptr; }

Backend best_available_backend() noexcept {
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  if (backend_available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& kernels() noexcept { return *active_table().load(std::memory_order_relaxed); }

Backend active_backend() noexcept { return kernels().backend; }

bool set_backend(Backend b) noexcept {
  const KernelTable* t = table_for(b);
  if (t == nullptr) return false;
  active_table().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace biosim::simd
