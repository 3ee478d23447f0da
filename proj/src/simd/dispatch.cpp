#include <atomic>
#include <cstdlib>
#include <string>

#include "gnnpool/simd/kernels.hpp"

namespace gnnpool::simd {

#if defined(GNNPOOL_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(GNNPOOL_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  const char* env = std::getenv("GNNPOOL_ISA");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(GNNPOOL_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  return *active_slot().load(std::memory_order_acquire);
}

bool set_active_isa(Isa isa) {
  const KernelTable* t = isa == Isa::scalar ? &scalar_kernels() : avx2_kernels();
  if (t == nullptr) return false;
  active_slot().store(t, std::memory_order_release);
  return true;
}

std::string_view isa_name(Isa isa) {
  return isa == Isa::scalar ? "scalar" : "avx2";
}

}  // namespace gnnpool::simd
