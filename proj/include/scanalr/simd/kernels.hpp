#pragma once

// Data-parallel inner loops used by the scoring and aggregation code.
//
// Every kernel has a scalar reference implementation; on x86-64 an AVX2/FMA
// variant is compiled separately and selected at runtime when the CPU
// supports it. The two are kept numerically equivalent (see
// tests/test_kernels.cpp), not bit-identical: the AVX2 variant uses its own
// polynomial exp/log.

#include <cstddef>
#include <string_view>

namespace scanalr::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  /// Largest element; -inf for an empty range.
  double (*max_value)(const double* x, std::size_t n);
  /// sum_i exp(x[i] - shift).
  double (*sum_exp_shifted)(const double* x, std::size_t n, double shift);
  /// Binomial GLR scores from window counts. `sided` is 1 or 2.
  /// Requires 0 < cases < subjects and 0 <= m[i] <= n[i] <= subjects.
  void (*glr_scores)(const double* n, const double* m, std::size_t count,
                     double cases, double subjects, int sided, double* out);
  /// out[i] = z[i]^2 / 2, or max(z[i], 0)^2 / 2 when sided == 1.
  void (*half_squares)(const double* z, std::size_t n, int sided, double* out);
};

bool backend_supported(Backend b) noexcept;
std::string_view backend_name(Backend b) noexcept;

/// Backend currently used by kernels(). Defaults to the best supported one.
Backend active_backend() noexcept;
/// Force a backend (tests, benchmarking). Throws InputError if unsupported.
void set_backend(Backend b);

const KernelTable& kernels() noexcept;
const KernelTable& kernels(Backend b);

}  // namespace scanalr::simd
