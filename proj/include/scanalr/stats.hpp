#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scanalr/likelihood.hpp"

namespace scanalr {

enum class StatKind { Scan, Alr, WeightedAlr };

std::string_view stat_name(StatKind kind) noexcept;

/// Summary of a ScoreVector. ALR values are on the 2 log scale so that
/// chi-square and G thresholds apply directly.
struct TestStatistic {
  StatKind kind = StatKind::Scan;
  Sided sided = Sided::Two;
  double value = 0.0;
  std::optional<std::size_t> argmax;  // scan only: first window attaining the max
  std::size_t windows = 0;            // N
  std::string weights;                // weighted ALR: where the weights came from
};

/// M = max S(B). Ties go to the lowest window index. Throws InputError on
/// an empty vector.
TestStatistic scan_statistic(const ScoreVector& scores);

/// U = 2 log sum_B w_B e^{S(B)} with w_B = 1/N when `weights` is empty.
/// Weighted input must be positive and sum to 1 within 1e-12, else
/// InputError. The result kind is WeightedAlr iff weights are given.
TestStatistic alr_statistic(const ScoreVector& scores, std::span<const double> weights = {},
                            std::string weights_source = {});

/// Raw reductions used by the resampling loops.
double max_score(std::span<const double> scores);
double log_mean_exp(std::span<const double> scores);
double log_weighted_sum_exp(std::span<const double> scores, std::span<const double> weights);

/// Throws InputError unless there are `windows` positive finite weights
/// summing to 1 within 1e-12.
void validate_weights(std::span<const double> weights, std::size_t windows);

/// One weight per line (blank lines and `#` comments skipped).
std::vector<double> load_weights(const std::filesystem::path& path);

}  // namespace scanalr
