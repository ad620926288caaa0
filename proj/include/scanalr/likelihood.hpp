#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scanalr/windows.hpp"

namespace scanalr {

/// Alternative hypothesis: elevated rate inside the window (one-sided) or
/// any difference (two-sided).
enum class Sided : int { One = 1, Two = 2 };

inline int as_int(Sided k) noexcept { return static_cast<int>(k); }
/// Throws InputError unless k is 1 or 2.
Sided sided_from_int(int k);

enum class WindowStatus : std::uint8_t {
  Ok,
  /// Per-window refit failed to converge; the quadratic score was used.
  QuadraticFallback,
  /// Window indicator lies in the covariate span; score set to 0.
  Degenerate,
};

/// Per-window log-likelihood-ratio scores aligned with a WindowSet.
struct ScoreVector {
  std::vector<double> scores;
  Sided sided = Sided::Two;
  /// Human-readable null baseline, e.g. "p0=0.056".
  std::string baseline;
  /// Empty when every window is Ok.
  std::vector<WindowStatus> status;

  std::size_t size() const noexcept { return scores.size(); }
  std::size_t count(WindowStatus s) const noexcept;
};

/// Binomial KL term p log(p/p0) + (1-p) log((1-p)/(1-p0)), with 0 log 0 = 0.
/// Throws InputError unless 0 < p0 < 1 and 0 <= p <= 1.
double phi(double p, double p0);

/// GLR scores S(B) from window counts under the constant-rate null with
/// p0 = I/J. Throws InputError when I == 0 or I == J.
ScoreVector glr_scores(const WindowSet& ws, std::size_t cases, std::size_t subjects, Sided k);
/// Same, from explicit counts, into `out` (hot path for resampling).
void glr_scores(std::span<const double> n, std::span<const double> m, std::size_t cases,
                std::size_t subjects, Sided k, std::span<double> out);

/// Risk-adjusted score m log(m/eta) + (I-m) log((I-m)/(I-eta)).
/// Throws NumericError when eta is 0 or I while the matching count is not.
double adjusted_score(double m, double eta, double cases);

/// Risk-adjusted scores for every window. `cell_risks` holds the expected
/// case count of each cell of `ws` (e.g. summed fitted probabilities);
/// `case_counts` are the window m_B. Throws InputError if the risks do not
/// sum to I within 1e-6 * I.
ScoreVector adjusted_scores(const WindowSet& ws, std::span<const double> cell_risks,
                            std::span<const double> case_counts, std::size_t cases);

}  // namespace scanalr
