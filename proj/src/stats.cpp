#include "scanalr/stats.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "scanalr/error.hpp"
#include "scanalr/simd/kernels.hpp"

namespace scanalr {

std::string_view stat_name(StatKind kind) noexcept {
  switch (kind) {
    case StatKind::Scan:
      return "scan";
    case StatKind::Alr:
      return "alr";
    case StatKind::WeightedAlr:
      return "walr";
  }
  return "?";
}

double max_score(std::span<const double> scores) {
  if (scores.empty()) throw InputError("statistic over an empty window family");
  return simd::kernels().max_value(scores.data(), scores.size());
}

double log_mean_exp(std::span<const double> scores) {
  const double top = max_score(scores);
  const double sum = simd::kernels().sum_exp_shifted(scores.data(), scores.size(), top);
  return top + std::log(sum) - std::log(static_cast<double>(scores.size()));
}

double log_weighted_sum_exp(std::span<const double> scores, std::span<const double> weights) {
  const double top = max_score(scores);
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) sum += weights[i] * std::exp(scores[i] - top);
  return top + std::log(sum);
}

void validate_weights(std::span<const double> weights, std::size_t windows) {
  if (weights.size() != windows)
    throw InputError("window weights: got " + std::to_string(weights.size()) + " weights for " +
                     std::to_string(windows) + " windows");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw InputError("window weights: weight " + std::to_string(i) + " is not positive");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "window weights must be normalized to sum to 1 (sum = " << total << ")";
    throw InputError(msg.str());
  }
}

TestStatistic scan_statistic(const ScoreVector& scores) {
  TestStatistic t;
  t.kind = StatKind::Scan;
  t.sided = scores.sided;
  t.windows = scores.size();
  t.value = max_score(scores.scores);
  for (std::size_t w = 0; w < scores.size(); ++w) {
    if (scores.scores[w] == t.value) {
      t.argmax = w;
      break;
    }
  }
  return t;
}

TestStatistic alr_statistic(const ScoreVector& scores, std::span<const double> weights, std::string weights_source) {
  TestStatistic t;
  t.sided = scores.sided;
  t.windows = scores.size();
  if (weights.empty()) {
    t.kind = StatKind::Alr;
    t.value = 2.0 * log_mean_exp(scores.scores);
  } else {
    validate_weights(weights, scores.size());
    t.kind = StatKind::WeightedAlr;
    t.value = 2.0 * log_weighted_sum_exp(scores.scores, weights);
    t.weights = std::move(weights_source);
  }
  if (!std::isfinite(t.value)) throw NumericError("ALR statistic is not finite");
  return t;
}

std::vector<double> load_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open weight file " + path.string());
  std::vector<double> weights;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream fields(line);
    double w = 0.0;
    std::string rest;
    if (!(fields >> w) || (fields >> rest))
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected one number per line");
    weights.push_back(w);
  }
  return weights;
}

}  // namespace scanalr
