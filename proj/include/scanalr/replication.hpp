#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scanalr/config.hpp"
#include "scanalr/likelihood.hpp"
#include "scanalr/pvalues.hpp"
#include "scanalr/windows.hpp"

namespace scanalr {

/// Rejection rates of the risk-adjusted MC scan and the chi-square ALR,
/// one row per value of the effect parameter.
struct RateTable {
  std::string parameter;  // "theta" or "p1"
  std::vector<double> alphas;
  struct Row {
    double value = 0.0;
    std::vector<double> mc;   // per alpha
    std::vector<double> alr;  // per alpha
    std::size_t replicates = 0;  // successful
    std::size_t failures = 0;    // fit failures, excluded from the rates
    std::size_t fallbacks = 0;   // windows scored by the quadratic fallback
  };
  std::vector<Row> rows;

  /// Columns: parameter, then mc/alr pairs per alpha.
  void write_tsv(std::ostream& out) const;
};

/// Binomial standard error sqrt(rate (1 - rate) / reps).
double rate_se(double rate, std::size_t reps);

/// Three blocks of subjects; covariate N(shift, 1) in block 1 and N(0, 1)
/// elsewhere, drawn once per study. Labels from logit P = beta1 + theta 1{B1}.
struct Example1Config {
  std::size_t replicates = 1000;
  std::size_t mc_L = 999;
  std::vector<double> alphas{0.05, 0.01};
  std::vector<double> thetas{0.0, 0.2, 0.4, 0.6};
  std::size_t block_size = 1000;
  double beta1 = -3.0;
  double covariate_shift = 1.0;
  CovariateMode scores = CovariateMode::Refit;

  static Example1Config from(const Config& cfg);
  void validate() const;
};
RateTable run_example1(const Example1Config& cfg, std::uint64_t seed, unsigned threads = 1);

/// Locations uniform on the unit square (new ones every replicate), a fixed
/// number of subjects per location, cases with probability p1 inside the
/// circle C0 and p0 outside; covariate N(shift, 1) inside, N(0, 1) outside.
/// Windows: knn circles through the jmax nearest locations.
struct Example2Config {
  std::size_t replicates = 1000;
  std::size_t mc_L = 999;
  std::vector<double> alphas{0.05, 0.01};
  std::vector<double> p1{0.05, 0.2, 0.4, 0.6};
  double p0 = 0.05;
  std::size_t locations = 20;
  std::size_t per_location = 50;
  std::vector<double> center{0.5, 0.5};
  double radius = 0.3;
  std::size_t jmax = 10;
  bool dedup = false;
  double covariate_shift = 1.0;
  CovariateMode scores = CovariateMode::Refit;

  static Example2Config from(const Config& cfg);
  void validate() const;
};
RateTable run_example2(const Example2Config& cfg, std::uint64_t seed, unsigned threads = 1);

/// Null ALR values for qq plots against chi-square and G.
/// gaussian: U_Z over all-pairs windows on n uniform locations.
/// bernoulli: U over all-pairs windows of an aggregated dataset (file or
/// synthetic), cases drawn Binomial(n_j, p0) per location.
struct QqConfig {
  enum class Mode { Gaussian, Bernoulli };
  Mode mode = Mode::Gaussian;
  std::size_t n = 100;   // locations (gaussian, synthetic bernoulli)
  double w1 = 0.2;       // all-pairs radius
  std::size_t replicates = 10000;
  Sided sided = Sided::Two;
  std::string data;              // bernoulli: aggregated CSV; empty for synthetic
  std::size_t population = 100;  // synthetic bernoulli: subjects per location
  std::optional<double> p0;      // bernoulli: defaults to I/J of the data file

  static QqConfig from(const Config& cfg);
  void validate() const;
};

struct QqResult {
  std::vector<double> values;  // sorted ascending
  std::vector<double> chi2;    // chi-square quantile at (l - 0.5) / L
  std::vector<double> g;       // G quantile at (l - 0.5) / L
  std::size_t windows = 0;
  std::size_t dropped_windows = 0;  // holding no location or all of them

  void write_tsv(std::ostream& out) const;
  /// Mean absolute quantile error over plotting positions in [lo, hi].
  double chi2_error(double lo, double hi) const;
  double g_error(double lo, double hi) const;
};
QqResult run_qq_experiment(const QqConfig& cfg, std::uint64_t seed, unsigned threads = 1);

/// U_Z for k = 1 and k = 2 from the same replicates.
struct UzSample {
  std::vector<double> one;
  std::vector<double> two;
};
UzSample simulate_uz(const WindowSet& ws, std::size_t replicates, std::uint64_t seed, unsigned threads = 1);

/// Windows with 0 < #C < n subjects.
WindowSet proper_windows(const WindowSet& ws);

/// Power of U and M (one-sided) against a single circular cluster with
/// relative risk RR, total case count held at I by rejection sampling.
struct PowerConfig {
  std::string data;  // point CSV
  std::string windows = "grid:w=40,s=10,o=5,min=2";
  std::vector<double> center;
  double radius = 40.0;
  std::vector<double> rr{1.0};
  std::size_t replicates = 1000;
  double alpha = 0.01;
  std::optional<double> crit_u;  // estimated by a null permutation run when absent
  std::optional<double> crit_m;
  std::size_t null_replicates = 1000;

  static PowerConfig from(const Config& cfg);
  void validate() const;
};

struct PowerRow {
  double rr = 1.0;
  std::size_t inside = 0;  // n
  double p = 0.0;          // inside
  double p_tilde = 0.0;    // outside
  double power_u = 0.0;
  double power_m = 0.0;
  std::size_t replicates = 0;
};

struct PowerResult {
  double crit_u = 0.0;
  double crit_m = 0.0;
  bool critical_from_permutation = false;
  std::size_t windows = 0;
  std::vector<PowerRow> rows;

  void write_tsv(std::ostream& out) const;
};

/// Solves n p + (J - n) p~ = I with p = RR p~. Throws InputError if p > 1.
std::pair<double, double> solve_cluster_risks(std::size_t inside, std::size_t subjects, std::size_t cases, double rr);

/// Upper-alpha critical value of null replicate values: the
/// ceil(alpha R)-th largest of the R values.
double upper_critical_value(std::vector<double> values, double alpha);

PowerResult run_power_study(const PowerConfig& cfg, const PointDataset& data, std::uint64_t seed,
                            unsigned threads = 1);

/// Runs experiment `name` from `cfg`, writing <name>.tsv and <name>.json
/// into `out_dir`. Returns the JSON summary text. Throws InputError for an
/// unknown experiment or bad config.
std::string run_experiment(const std::string& name, const Config& cfg, std::uint64_t seed, unsigned threads,
                           const std::filesystem::path& out_dir);

}  // namespace scanalr
