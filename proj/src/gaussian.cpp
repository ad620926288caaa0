#include "scanalr/gaussian.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "scanalr/error.hpp"
#include "scanalr/rng.hpp"
#include "scanalr/simd/kernels.hpp"
#include "scanalr/stats.hpp"

namespace scanalr {

ZFieldSampler::ZFieldSampler(const WindowSet& ws) : ws_(&ws), scale_(ws.size()) {
  const double n = static_cast<double>(ws.subjects());
  const auto counts = ws.subject_counts();
  for (std::size_t w = 0; w < ws.size(); ++w) {
    const double c = counts[w];
    if (!(c > 0.0 && c < n))
      throw InputError("window " + std::to_string(w) + " holds " + std::to_string(static_cast<long long>(c)) +
                       " of " + std::to_string(ws.subjects()) + " locations; Z needs 0 < #C < n");
    scale_[w] = 1.0 / std::sqrt(c * (1.0 - c / n));
  }
}

ZField ZFieldSampler::draw(std::uint64_t seed, std::uint64_t replicate) const {
  Engine rng = make_stream(seed, {replicate});
  std::normal_distribution<double> normal;
  std::vector<double> y(locations());
  for (double& v : y) v = normal(rng);
  return field(y);
}

ZField ZFieldSampler::field(const std::vector<double>& y) const {
  if (y.size() != locations()) throw InputError("Z field: one value per location expected");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  std::vector<double> centred(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) centred[i] = y[i] - mean;
  ZField out;
  out.n = locations();
  out.z = ws_->window_sums(ws_->cell_totals(centred));
  for (std::size_t w = 0; w < out.z.size(); ++w) out.z[w] *= scale_[w];
  return out;
}

ZField simulate_z_field(const WindowSet& ws, std::uint64_t seed, std::uint64_t replicate) {
  return ZFieldSampler(ws).draw(seed, replicate);
}

double uz_statistic(const ZField& z, Sided k) {
  if (z.z.empty()) throw InputError("U_Z over an empty field");
  std::vector<double> half(z.z.size());
  simd::kernels().half_squares(z.z.data(), z.z.size(), as_int(k), half.data());
  return 2.0 * log_mean_exp(half);
}

}  // namespace scanalr
