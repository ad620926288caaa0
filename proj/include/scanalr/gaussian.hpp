#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scanalr/likelihood.hpp"
#include "scanalr/windows.hpp"

namespace scanalr {

/// Standardized window sums of one replicate of n i.i.d. N(0,1) values:
///   Z_C = sum_{i in C} (Y_i - Ybar) / sqrt(#C (1 - #C/n)).
struct ZField {
  std::vector<double> z;  // aligned with the window set
  std::size_t n = 0;
};

/// Precomputed window structure for repeated Z-field draws. Each subject of
/// the window set is one location. Throws InputError if some window holds
/// no location or all n of them.
class ZFieldSampler {
 public:
  explicit ZFieldSampler(const WindowSet& ws);

  std::size_t locations() const noexcept { return ws_->subjects(); }
  std::size_t windows() const noexcept { return ws_->size(); }

  /// Draws replicate `replicate` of the stream `seed`.
  ZField draw(std::uint64_t seed, std::uint64_t replicate) const;
  /// Z field for the given location values.
  ZField field(const std::vector<double>& y) const;

 private:
  const WindowSet* ws_;
  std::vector<double> scale_;  // 1 / sqrt(#C (1 - #C/n))
};

/// One-off convenience wrapper around ZFieldSampler.
ZField simulate_z_field(const WindowSet& ws, std::uint64_t seed, std::uint64_t replicate);

/// U_Z = 2 log(N^-1 sum_C e^{Z_C^2 / 2}); positive parts of Z for Sided::One.
double uz_statistic(const ZField& z, Sided k);

}  // namespace scanalr
