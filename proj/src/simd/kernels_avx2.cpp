// AVX2/FMA variants of the kernels in kernels_scalar.cpp.
// This translation unit is compiled with -mavx2 -mfma and must only be
// entered after a runtime CPU check (see dispatch.cpp).

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "tables.hpp"

namespace scanalr::simd::avx2 {
namespace {

constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kLog2e = 1.44269504088896338700e+00;

inline __m256d horner(__m256d x, const double* c, int degree) {
  __m256d acc = _mm256_set1_pd(c[degree]);
  for (int i = degree - 1; i >= 0; --i) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[i]));
  return acc;
}

// 2^k for integral k in [-2044, 2046], split in two factors so subnormal
// results come out right.
inline __m256d pow2(__m256d k) {
  const __m256d half = _mm256_floor_pd(_mm256_mul_pd(k, _mm256_set1_pd(0.5)));
  const __m256d other = _mm256_sub_pd(k, half);
  auto build = [](__m256d e) {
    const __m128i e32 = _mm256_cvtpd_epi32(e);
    const __m256i e64 = _mm256_cvtepi32_epi64(e32);
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(e64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_castsi256_pd(bits);
  };
  return _mm256_mul_pd(build(half), build(other));
}

// exp(x) to ~1 ulp on [-745, 709]; 0 below, +inf above.
inline __m256d exp_pd(__m256d x) {
  static constexpr double kTaylor[] = {
      1.0,
      1.0,
      1.0 / 2,
      1.0 / 6,
      1.0 / 24,
      1.0 / 120,
      1.0 / 720,
      1.0 / 5040,
      1.0 / 40320,
      1.0 / 362880,
      1.0 / 3628800,
      1.0 / 39916800,
      1.0 / 479001600,
      1.0 / 6227020800.0,
  };
  const __m256d lo = _mm256_set1_pd(-745.2);
  const __m256d hi = _mm256_set1_pd(709.78);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  const __m256d overflow = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Hi), xc);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Lo), r);
  __m256d result = _mm256_mul_pd(horner(r, kTaylor, 13), pow2(k));
  result = _mm256_blendv_pd(result, _mm256_setzero_pd(), underflow);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::infinity()), overflow);
  return result;
}

// Natural log for positive normal inputs.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  const __m256i mant_bits = _mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
      _mm256_set1_epi64x(0x3FF0000000000000LL));
  __m256d mant = _mm256_castsi256_pd(mant_bits);  // [1, 2)

  // exponent as double: unbiased value fits in 11 bits
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(exp_bits, magic)),
                            _mm256_set1_pd(4503599627370496.0 + 1023.0));

  const __m256d big = _mm256_cmp_pd(mant, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  mant = _mm256_blendv_pd(mant, _mm256_mul_pd(mant, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d f = _mm256_sub_pd(mant, _mm256_set1_pd(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(f, _mm256_set1_pd(2.0)));
  const __m256d s2 = _mm256_mul_pd(s, s);
  static constexpr double kAtanh[] = {1.0,        1.0 / 3,  1.0 / 5,  1.0 / 7,
                                      1.0 / 9,    1.0 / 11, 1.0 / 13, 1.0 / 15,
                                      1.0 / 17,   1.0 / 19, 1.0 / 21, 1.0 / 23};
  const __m256d series = horner(s2, kAtanh, 11);
  const __m256d log_mant = _mm256_mul_pd(_mm256_add_pd(s, s), series);
  return _mm256_add_pd(_mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Hi), log_mant),
                       _mm256_mul_pd(e, _mm256_set1_pd(kLn2Lo)));
}

double hmax(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
}

double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double max_value(const double* x, std::size_t n) {
  __m256d best = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) best = _mm256_max_pd(best, _mm256_loadu_pd(x + i));
  double result = hmax(best);
  for (; i < n; ++i) result = std::max(result, x[i]);
  return result;
}

double sum_exp_shifted(const double* x, std::size_t n, double shift) {
  const __m256d sh = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), sh)));
  double total = hsum(acc);
  if (i < n) {
    alignas(32) double tail[4] = {-1e300, -1e300, -1e300, -1e300};
    for (std::size_t j = 0; i + j < n; ++j) tail[j] = x[i + j] - shift;
    total += hsum(exp_pd(_mm256_load_pd(tail)));
  }
  return total;
}

// count * log(count * num / (base * den)) with 0 for count == 0.
inline __m256d xlogx_ratio(__m256d count, __m256d base, __m256d num, __m256d den) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d active = _mm256_cmp_pd(count, _mm256_setzero_pd(), _CMP_GT_OQ);
  __m256d ratio = _mm256_div_pd(_mm256_mul_pd(count, num), _mm256_mul_pd(base, den));
  ratio = _mm256_blendv_pd(one, ratio, active);
  return _mm256_and_pd(active, _mm256_mul_pd(count, log_pd(ratio)));
}

void glr_block(const double* n, const double* m, double cases, double subjects, int sided,
               double* out) {
  const __m256d vI = _mm256_set1_pd(cases);
  const __m256d vJ = _mm256_set1_pd(subjects);
  const __m256d vC = _mm256_set1_pd(subjects - cases);
  const __m256d nb = _mm256_loadu_pd(n);
  const __m256d mb = _mm256_loadu_pd(m);
  const __m256d rest = _mm256_sub_pd(vJ, nb);
  const __m256d inside = _mm256_add_pd(xlogx_ratio(mb, nb, vJ, vI),
                                       xlogx_ratio(_mm256_sub_pd(nb, mb), nb, vJ, vC));
  const __m256d outside = _mm256_add_pd(
      xlogx_ratio(_mm256_sub_pd(vI, mb), rest, vJ, vI),
      xlogx_ratio(_mm256_add_pd(_mm256_sub_pd(rest, vI), mb), rest, vJ, vC));
  __m256d s = _mm256_max_pd(_mm256_add_pd(inside, outside), _mm256_setzero_pd());
  if (sided == 1) {
    const __m256d elevated = _mm256_cmp_pd(_mm256_mul_pd(mb, vJ), _mm256_mul_pd(nb, vI), _CMP_GT_OQ);
    s = _mm256_and_pd(elevated, s);
  }
  _mm256_storeu_pd(out, s);
}

void glr_scores(const double* n, const double* m, std::size_t count, double cases,
                double subjects, int sided, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) glr_block(n + i, m + i, cases, subjects, sided, out + i);
  if (i < count) {
    double tn[4] = {0, 0, 0, 0}, tm[4] = {0, 0, 0, 0}, to[4];
    for (std::size_t j = 0; i + j < count; ++j) {
      tn[j] = n[i + j];
      tm[j] = m[i + j];
    }
    glr_block(tn, tm, cases, subjects, sided, to);
    for (std::size_t j = 0; i + j < count; ++j) out[i + j] = to[j];
  }
}

void half_squares(const double* z, std::size_t n, int sided, double* out) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(z + i);
    if (sided == 1) v = _mm256_max_pd(v, zero);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(half, _mm256_mul_pd(v, v)));
  }
  for (; i < n; ++i) {
    const double v = sided == 1 ? std::max(z[i], 0.0) : z[i];
    out[i] = 0.5 * v * v;
  }
}

}  // namespace

const KernelTable table{&max_value, &sum_exp_shifted, &glr_scores, &half_squares};

}  // namespace scanalr::simd::avx2
