#include <atomic>

#include "scanalr/error.hpp"
#include "tables.hpp"

namespace scanalr::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SCANALR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend best_backend() noexcept { return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar; }

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> backend{best_backend()};
  return backend;
}

}  // namespace

bool backend_supported(Backend b) noexcept {
  return b == Backend::Scalar || (b == Backend::Avx2 && cpu_has_avx2());
}

std::string_view backend_name(Backend b) noexcept {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_supported(b)) throw InputError("SIMD backend not supported on this CPU: " + std::string(backend_name(b)));
  current().store(b, std::memory_order_relaxed);
}

const KernelTable& kernels(Backend b) {
  if (!backend_supported(b)) throw InputError("SIMD backend not supported on this CPU: " + std::string(backend_name(b)));
#if defined(SCANALR_HAVE_AVX2)
  if (b == Backend::Avx2) return avx2::table;
#endif
  return scalar::table;
}

const KernelTable& kernels() noexcept {
#if defined(SCANALR_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::table;
#endif
  return scalar::table;
}

}  // namespace scanalr::simd
