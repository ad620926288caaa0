#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "scanalr/data.hpp"
#include "scanalr/likelihood.hpp"
#include "scanalr/windows.hpp"

namespace scanalr {

/// Null-model logistic fit P(X_i = 1) = 1 / (1 + exp(-beta'u_i)).
struct LogisticFit {
  std::vector<double> beta;     // length r, intercept first
  std::vector<double> fitted;   // p_i
  std::vector<double> weights;  // p_i (1 - p_i)
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;  // max-norm of the score vector at beta
};

/// Fitting constants: damped Newton from beta = 0, converged when the
/// score max-norm drops below kGradientTolerance * J.
inline constexpr int kMaxNewtonIterations = 50;
inline constexpr double kGradientTolerance = 1e-9;
inline constexpr double kDivergenceBound = 30.0;

/// Fits the covariate-only null model. Throws InputError without
/// covariates or when I is 0 or J, NumericError on separation
/// (|beta_k| > 30) or non-convergence.
LogisticFit fit_logistic_null(const PointDataset& data);

/// Null fit with the given labels in place of data.cases().
LogisticFit fit_logistic_null(const PointDataset& data, std::span<const std::uint8_t> labels);

/// Result of maximizing the likelihood with an extra window effect theta.
struct WindowRefit {
  double score = 0.0;  // log LR against the null fit, >= 0
  double theta = 0.0;  // +-inf when every subject in the window has the same label
  std::vector<double> beta;
  bool converged = false;
  int iterations = 0;
};

/// Fits (beta, theta) for a single window given as a subject indicator.
/// For Sided::One the constraint theta >= 0 is applied (score 0 when the
/// unconstrained estimate is negative). Throws NumericError if the fit
/// diverges or does not converge.
WindowRefit refit_window(const PointDataset& data, std::span<const std::uint8_t> labels,
                         const LogisticFit& null_fit, std::span<const std::uint8_t> indicator, Sided k);

/// max over beta of the log-likelihood with theta held fixed.
double profile_log_likelihood(const PointDataset& data, std::span<const std::uint8_t> labels,
                              std::span<const std::uint8_t> indicator, double theta,
                              std::span<const double> beta_start = {});

/// Covariate-adjusted GLR scores by refitting every window. Windows whose
/// indicator lies in the covariate span score 0 (Degenerate); windows whose
/// refit fails get the quadratic score (QuadraticFallback). Windows with
/// identical membership are fitted once.
ScoreVector refit_window_scores(const PointDataset& data, const WindowSet& ws, const LogisticFit& null_fit,
                                Sided k, unsigned threads = 1);
ScoreVector refit_window_scores(const PointDataset& data, std::span<const std::uint8_t> labels,
                                const WindowSet& ws, const LogisticFit& null_fit, Sided k,
                                unsigned threads = 1);

/// Efficient-score approximation of the refit scores built from a weighted
/// Gram-Schmidt basis of the covariates:
///   S(B) ~ (sum_i r_iB (X_i - p_i))^2 / (2 v_B^2),  v_B^2 = sum_i w_i r_iB^2,
/// where r_iB is the window indicator with its weighted projection on the
/// covariate columns removed. Sided::One keeps the score only when the
/// inner sum is positive. Windows with v_B^2 <= 1e-10 * sum_{i in B} w_i
/// are marked Degenerate and score 0.
ScoreVector quadratic_window_scores(const PointDataset& data, const WindowSet& ws, const LogisticFit& null_fit,
                                    Sided k = Sided::Two);
ScoreVector quadratic_window_scores(const PointDataset& data, std::span<const std::uint8_t> labels,
                                    const WindowSet& ws, const LogisticFit& null_fit, Sided k = Sided::Two);

/// Weighted Gram-Schmidt basis of the covariate columns: columns are
/// mutually orthogonal under (a.b)_w = sum_i a_i b_i w_i.
struct WeightedBasis {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> columns;       // row-major rows x cols
  std::vector<double> norms_sq;      // ||u~_k||_w^2
  static WeightedBasis build(std::span<const double> covariates, std::size_t cols, std::span<const double> weights);
  double weighted_dot(std::size_t a, std::size_t b, std::span<const double> weights) const;
};

}  // namespace scanalr
