#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scanalr/data.hpp"
#include "scanalr/likelihood.hpp"
#include "scanalr/logistic.hpp"
#include "scanalr/stats.hpp"
#include "scanalr/windows.hpp"

namespace scanalr {

/// P{chi^2_1 >= c} = erfc(sqrt(c / 2)).
double chi2_tail(double c);
/// Upper quantile: the c with P{chi^2_1 >= c} = tail.
double chi2_upper_quantile(double tail);

/// Root of 2 e^{-x} = pi x, below which 1 - G is taken as 1.
double g_threshold() noexcept;
/// 1 - G(x) = sqrt(2 e^{-x} / (pi x)) for x >= x0, else 1.
double g_tail(double x);
/// The x >= x0 with 1 - G(x) = tail, by bisection on [x0, 200] to 1e-10.
double g_upper_quantile(double tail);

enum class PValueMethod { Chi2, Gdist, Perm, Risk, Exact };
std::string_view method_name(PValueMethod m) noexcept;

struct PValueResult {
  PValueMethod method = PValueMethod::Chi2;
  double p = 1.0;
  double statistic = 0.0;  // observed value the p-value refers to
  // Monte Carlo methods only.
  std::size_t mc_L = 0;
  std::size_t mc_exceed = 0;
  std::uint64_t seed = 0;
  double se = 0.0;  // sqrt(p (1 - p) / L)

  bool monte_carlo() const noexcept { return method == PValueMethod::Perm || method == PValueMethod::Risk; }
};

/// p = k P{chi^2_1 >= c} / 2, capped at 1. Throws InputError for c < 0 or NaN.
PValueResult chi2_pvalue(double c, Sided k);
/// p = k (1 - G(c)) / 2, capped at 1.
PValueResult gdist_pvalue(double c, Sided k);

enum class CovariateMode { Off, Refit, Quadratic };
std::string_view covariate_mode_name(CovariateMode m) noexcept;

/// How window scores and the summary statistic are computed from labels.
struct StatPipeline {
  StatKind kind = StatKind::Alr;
  Sided sided = Sided::Two;
  std::vector<double> weights;  // WeightedAlr only, one per window
  CovariateMode covariates = CovariateMode::Off;

  /// Scores for the given labels (covariates, if used, stay with subjects).
  ScoreVector scores(const PointDataset& data, const WindowSet& ws, std::span<const std::uint8_t> labels,
                     unsigned threads = 1) const;
  TestStatistic summarize(const ScoreVector& scores) const;
  double value(const ScoreVector& scores) const;
  /// Throws InputError on an inconsistent pipeline for this window set.
  void validate(const PointDataset& data, const WindowSet& ws) const;
};

/// Replicate value >= observed, with relative slack 1e-10 for rounding.
bool reaches(double replicate, double observed) noexcept;

/// Conditional permutation p-value (1 + #{T_l >= T}) / (1 + L). Replicate l
/// draws its labels from its own stream of `seed`, so the result does not
/// depend on `threads`.
PValueResult permutation_pvalue(const PointDataset& data, const WindowSet& ws, const StatPipeline& pipeline,
                                std::size_t L, std::uint64_t seed, unsigned threads = 1);

/// Exact permutation tail by enumerating all C(J, I) case placements:
/// #{T >= observed} / C(J, I), with no +1 term. Throws InputError when
/// C(J, I) exceeds `max_placements`.
struct ExactPValue {
  double p = 1.0;
  std::uint64_t at_least = 0;
  std::uint64_t placements = 0;
};
ExactPValue exact_permutation_oracle(const PointDataset& data, const WindowSet& ws, const StatPipeline& pipeline,
                                     double observed, std::uint64_t max_placements = 1'000'000);

/// Expected case count of each cell of `ws` under the fitted null model.
std::vector<double> cell_risks(const WindowSet& ws, const LogisticFit& fit);

/// sup_B of the risk-adjusted score for window case counts `m`.
double adjusted_scan_value(const WindowSet& ws, std::span<const double> window_risks, std::span<const double> m,
                           double cases);

/// Risk-adjusted Monte Carlo p-value of the adjusted scan statistic: per
/// replicate the cell case counts are multinomial with I trials and
/// probabilities eta_j / I.
PValueResult risk_adjusted_mc_pvalue(const PointDataset& data, const WindowSet& ws, const LogisticFit& fit0,
                                     std::size_t L, std::uint64_t seed, unsigned threads = 1);

}  // namespace scanalr
