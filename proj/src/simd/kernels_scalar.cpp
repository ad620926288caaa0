#include <algorithm>
#include <cmath>
#include <limits>

#include "tables.hpp"

namespace scanalr::simd::scalar {
namespace {

double max_value(const double* x, std::size_t n) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, x[i]);
  return best;
}

double sum_exp_shifted(const double* x, std::size_t n, double shift) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += std::exp(x[i] - shift);
  return total;
}

// count * log(count * scale_num / (base * scale_den)), zero when count == 0.
inline double xlogx_ratio(double count, double base, double num, double den) {
  if (count <= 0.0) return 0.0;
  return count * std::log((count * num) / (base * den));
}

void glr_scores(const double* n, const double* m, std::size_t count,
                double cases, double subjects, int sided, double* out) {
  const double controls = subjects - cases;
  for (std::size_t i = 0; i < count; ++i) {
    const double nb = n[i];
    const double mb = m[i];
    const double rest = subjects - nb;
    // Ratios are formed from integer-valued products so that m/n == I/J
    // gives log(1) == 0 exactly.
    const double inside = xlogx_ratio(mb, nb, subjects, cases) +
                          xlogx_ratio(nb - mb, nb, subjects, controls);
    const double outside = xlogx_ratio(cases - mb, rest, subjects, cases) +
                           xlogx_ratio(rest - cases + mb, rest, subjects, controls);
    double s = std::max(inside + outside, 0.0);
    if (sided == 1 && !(mb * subjects > nb * cases)) s = 0.0;
    out[i] = s;
  }
}

void half_squares(const double* z, std::size_t n, int sided, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = sided == 1 ? std::max(z[i], 0.0) : z[i];
    out[i] = 0.5 * v * v;
  }
}

}  // namespace

const KernelTable table{&max_value, &sum_exp_shifted, &glr_scores, &half_squares};

}  // namespace scanalr::simd::scalar
