#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scanalr/pvalues.hpp"
#include "scanalr/stats.hpp"
#include "scanalr/windows.hpp"

namespace scanalr {

inline constexpr int kReportSchema = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Everything `analyze` reports. Serialized as JSON with "schema": 1.
struct TestReport {
  // Resolved options, enough to re-run the analysis (thread count and output
  // path excluded so reports compare equal across them).
  std::map<std::string, std::string> options;

  std::string data_path;
  std::string data_layout;  // "point" or "aggregated"
  std::size_t subjects = 0;
  std::size_t cases = 0;
  std::vector<std::string> covariate_names;

  std::string window_spec;
  std::size_t windows = 0;
  std::size_t cells = 0;

  CovariateMode covariates = CovariateMode::Off;
  bool standardized = false;
  std::size_t fallback_windows = 0;
  std::size_t degenerate_windows = 0;

  TestStatistic statistic;
  std::optional<WindowOrigin> argmax_origin;
  double argmax_n = 0.0;
  double argmax_m = 0.0;

  std::vector<PValueResult> pvalues;
  std::uint64_t seed = 0;
  std::optional<std::map<std::string, double>> timing;  // seconds per phase
};

std::string report_json(const TestReport& report);

}  // namespace scanalr
