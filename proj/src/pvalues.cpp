#include "scanalr/pvalues.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "scanalr/error.hpp"
#include "scanalr/parallel.hpp"
#include "scanalr/rng.hpp"

namespace scanalr {
namespace {

constexpr double kTieSlack = 1e-10;

double solve_g_threshold() {
  // Newton on f(x) = log 2 - x - log(pi x)
  double x = 0.4;
  for (int i = 0; i < 100; ++i) {
    const double f = std::log(2.0) - x - std::log(std::numbers::pi * x);
    const double step = f / (-1.0 - 1.0 / x);
    x -= step;
    if (std::abs(step) < 1e-16) break;
  }
  return x;
}

void check_threshold(double c) {
  if (!(c >= 0.0)) throw InputError("p-value threshold must be >= 0");
}

void finish_mc(PValueResult& r) {
  const double L = static_cast<double>(r.mc_L);
  r.p = (1.0 + static_cast<double>(r.mc_exceed)) / (1.0 + L);
  r.se = std::sqrt(r.p * (1.0 - r.p) / L);
}

// Unadjusted pipelines only need per-cell case counts.
struct CountEvaluator {
  const StatPipeline& pipeline;
  const WindowSet& ws;
  std::size_t cases;
  std::vector<double> m;
  std::vector<double> s;

  CountEvaluator(const StatPipeline& p, const WindowSet& w, std::size_t I)
      : pipeline(p), ws(w), cases(I), m(w.size()), s(w.size()) {}

  double operator()(std::span<const double> cell_cases) {
    ws.window_sums(cell_cases, m);
    glr_scores(ws.subject_counts(), m, cases, ws.subjects(), pipeline.sided, s);
    switch (pipeline.kind) {
      case StatKind::Scan:
        return max_score(s);
      case StatKind::Alr:
        return 2.0 * log_mean_exp(s);
      case StatKind::WeightedAlr:
        return 2.0 * log_weighted_sum_exp(s, pipeline.weights);
    }
    return 0.0;
  }
};

std::vector<double> cell_sizes(const WindowSet& ws) {
  std::vector<double> sizes(ws.cells());
  for (std::size_t c = 0; c < ws.cells(); ++c) sizes[c] = static_cast<double>(ws.cell_subjects(c).size());
  return sizes;
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  k = std::min(k, n - k);
  long double value = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    value = value * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (value > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(value));
}

}  // namespace

double chi2_tail(double c) {
  check_threshold(c);
  return std::erfc(std::sqrt(0.5 * c));
}

double chi2_upper_quantile(double tail) {
  if (!(tail > 0.0 && tail <= 1.0)) throw InputError("chi-square quantile: tail probability must lie in (0, 1]");
  if (tail == 1.0) return 0.0;
  const boost::math::chi_squared dist(1.0);
  return boost::math::quantile(boost::math::complement(dist, tail));
}

double g_threshold() noexcept {
  static const double x0 = solve_g_threshold();
  return x0;
}

double g_tail(double x) {
  check_threshold(x);
  if (x <= g_threshold()) return 1.0;
  return std::sqrt(2.0 * std::exp(-x) / (std::numbers::pi * x));
}

double g_upper_quantile(double tail) {
  if (!(tail > 0.0 && tail <= 1.0)) throw InputError("G quantile: tail probability must lie in (0, 1]");
  double lo = g_threshold();
  double hi = 200.0;
  if (tail >= 1.0) return lo;
  if (g_tail(hi) >= tail) return hi;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (g_tail(mid) > tail ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string_view method_name(PValueMethod m) noexcept {
  switch (m) {
    case PValueMethod::Chi2:
      return "chi2";
    case PValueMethod::Gdist:
      return "gdist";
    case PValueMethod::Perm:
      return "mc_perm";
    case PValueMethod::Risk:
      return "mc_risk";
    case PValueMethod::Exact:
      return "exact_enum";
  }
  return "?";
}

PValueResult chi2_pvalue(double c, Sided k) {
  PValueResult r;
  r.method = PValueMethod::Chi2;
  r.statistic = c;
  r.p = std::min(1.0, as_int(k) * chi2_tail(c) / 2.0);
  return r;
}

PValueResult gdist_pvalue(double c, Sided k) {
  PValueResult r;
  r.method = PValueMethod::Gdist;
  r.statistic = c;
  r.p = std::min(1.0, as_int(k) * g_tail(c) / 2.0);
  return r;
}

std::string_view covariate_mode_name(CovariateMode m) noexcept {
  switch (m) {
    case CovariateMode::Off:
      return "off";
    case CovariateMode::Refit:
      return "refit";
    case CovariateMode::Quadratic:
      return "quadratic";
  }
  return "?";
}

void StatPipeline::validate(const PointDataset& data, const WindowSet& ws) const {
  if (ws.subjects() != data.subjects()) throw InputError("window set was built for a different dataset");
  if (kind == StatKind::WeightedAlr) validate_weights(weights, ws.size());
  if (kind != StatKind::WeightedAlr && !weights.empty()) throw InputError("weights given for an unweighted statistic");
  if (covariates != CovariateMode::Off && !data.has_covariates())
    throw InputError("covariate adjustment requested but the data has no covariate columns");
}

ScoreVector StatPipeline::scores(const PointDataset& data, const WindowSet& ws, std::span<const std::uint8_t> labels,
                                 unsigned threads) const {
  if (covariates == CovariateMode::Off) {
    const std::size_t I = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
    ScoreVector sv;
    sv.sided = sided;
    sv.scores.resize(ws.size());
    const auto m = ws.recount_cases(labels);
    glr_scores(ws.subject_counts(), m, I, ws.subjects(), sided, sv.scores);
    sv.baseline = "p0=" + std::to_string(static_cast<double>(I) / static_cast<double>(ws.subjects()));
    return sv;
  }
  const LogisticFit fit = fit_logistic_null(data, labels);
  if (covariates == CovariateMode::Refit) return refit_window_scores(data, labels, ws, fit, sided, threads);
  return quadratic_window_scores(data, labels, ws, fit, sided);
}

TestStatistic StatPipeline::summarize(const ScoreVector& s) const {
  if (kind == StatKind::Scan) return scan_statistic(s);
  if (kind == StatKind::Alr) return alr_statistic(s);
  return alr_statistic(s, weights, "user weights");
}

double StatPipeline::value(const ScoreVector& s) const {
  switch (kind) {
    case StatKind::Scan:
      return max_score(s.scores);
    case StatKind::Alr:
      return 2.0 * log_mean_exp(s.scores);
    case StatKind::WeightedAlr:
      return 2.0 * log_weighted_sum_exp(s.scores, weights);
  }
  return 0.0;
}

bool reaches(double replicate, double observed) noexcept {
  return replicate >= observed - kTieSlack * std::max(1.0, std::abs(observed));
}

PValueResult permutation_pvalue(const PointDataset& data, const WindowSet& ws, const StatPipeline& pipeline,
                                std::size_t L, std::uint64_t seed, unsigned threads) {
  if (L == 0) throw InputError("Monte Carlo replicate count L must be >= 1");
  pipeline.validate(data, ws);
  const std::size_t J = data.subjects();
  const std::size_t I = data.case_count();
  const bool choose_cases = I <= J - I;
  const std::size_t draw = choose_cases ? I : J - I;

  PValueResult r;
  r.method = PValueMethod::Perm;
  r.mc_L = L;
  r.seed = seed;
  r.statistic = pipeline.value(pipeline.scores(data, ws, data.cases(), threads));

  std::vector<std::uint8_t> hit(L, 0);
  if (pipeline.covariates == CovariateMode::Off) {
    const auto sizes = cell_sizes(ws);
    parallel_for(L, threads, [&](std::size_t l) {
      Engine rng = make_stream(seed, {l});
      std::vector<std::size_t> scratch, chosen;
      sample_subset(rng, J, draw, scratch, chosen);
      std::vector<double> counts(ws.cells(), 0.0);
      for (std::size_t i : chosen) counts[ws.cell_of(i)] += 1.0;
      if (!choose_cases)
        for (std::size_t c = 0; c < counts.size(); ++c) counts[c] = sizes[c] - counts[c];
      CountEvaluator eval(pipeline, ws, I);
      hit[l] = reaches(eval(counts), r.statistic);
    });
  } else {
    parallel_for(L, threads, [&](std::size_t l) {
      Engine rng = make_stream(seed, {l});
      std::vector<std::size_t> scratch, chosen;
      sample_subset(rng, J, draw, scratch, chosen);
      std::vector<std::uint8_t> labels(J, choose_cases ? 0 : 1);
      for (std::size_t i : chosen) labels[i] = choose_cases ? 1 : 0;
      hit[l] = reaches(pipeline.value(pipeline.scores(data, ws, labels, 1)), r.statistic);
    });
  }
  r.mc_exceed = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), std::uint8_t{1}));
  finish_mc(r);
  return r;
}

ExactPValue exact_permutation_oracle(const PointDataset& data, const WindowSet& ws, const StatPipeline& pipeline,
                                     double observed, std::uint64_t max_placements) {
  pipeline.validate(data, ws);
  const std::size_t J = data.subjects();
  const std::size_t I = data.case_count();
  ExactPValue out;
  out.placements = binomial_capped(J, I, max_placements);
  if (out.placements > max_placements)
    throw InputError("exact enumeration needs C(J, I) <= " + std::to_string(max_placements) + " placements");

  // lexicographic walk over I-subsets
  std::vector<std::size_t> idx(I);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<double> counts(ws.cells());
  std::vector<std::uint8_t> labels(J);
  CountEvaluator eval(pipeline, ws, I);
  while (true) {
    double value = 0.0;
    if (pipeline.covariates == CovariateMode::Off) {
      std::fill(counts.begin(), counts.end(), 0.0);
      for (std::size_t i : idx) counts[ws.cell_of(i)] += 1.0;
      value = eval(counts);
    } else {
      std::fill(labels.begin(), labels.end(), std::uint8_t{0});
      for (std::size_t i : idx) labels[i] = 1;
      value = pipeline.value(pipeline.scores(data, ws, labels));
    }
    out.at_least += reaches(value, observed);

    std::size_t pos = I;
    while (pos > 0 && idx[pos - 1] == J - I + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t t = pos; t < I; ++t) idx[t] = idx[t - 1] + 1;
  }
  out.p = static_cast<double>(out.at_least) / static_cast<double>(out.placements);
  return out;
}

std::vector<double> cell_risks(const WindowSet& ws, const LogisticFit& fit) {
  if (fit.fitted.size() != ws.subjects()) throw InputError("fitted risks do not match the window set");
  return ws.cell_totals(fit.fitted);
}

double adjusted_scan_value(const WindowSet& ws, std::span<const double> window_risks, std::span<const double> m,
                           double cases) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < ws.size(); ++w) best = std::max(best, adjusted_score(m[w], window_risks[w], cases));
  return best;
}

PValueResult risk_adjusted_mc_pvalue(const PointDataset& data, const WindowSet& ws, const LogisticFit& fit0,
                                     std::size_t L, std::uint64_t seed, unsigned threads) {
  if (L == 0) throw InputError("Monte Carlo replicate count L must be >= 1");
  if (!fit0.converged) throw InputError("risk-adjusted Monte Carlo needs a converged null fit");
  if (ws.subjects() != data.subjects()) throw InputError("window set was built for a different dataset");
  const std::size_t I = data.case_count();
  const double cases = static_cast<double>(I);
  const auto risks = cell_risks(ws, fit0);
  const double total = std::accumulate(risks.begin(), risks.end(), 0.0);
  if (std::abs(total - cases) > 1e-6 * cases)
    throw InputError("fitted risks sum to " + std::to_string(total) + ", not I = " + std::to_string(I));
  const auto eta = ws.window_sums(risks);

  PValueResult r;
  r.method = PValueMethod::Risk;
  r.mc_L = L;
  r.seed = seed;
  r.statistic = adjusted_scan_value(ws, eta, ws.recount_cases(data.cases()), cases);

  std::vector<std::uint8_t> hit(L, 0);
  parallel_for(L, threads, [&](std::size_t l) {
    Engine rng = make_stream(seed, {l});
    std::vector<double> counts(ws.cells());
    multinomial(rng, I, risks, counts);
    const auto m = ws.window_sums(counts);
    hit[l] = reaches(adjusted_scan_value(ws, eta, m, cases), r.statistic);
  });
  r.mc_exceed = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), std::uint8_t{1}));
  finish_mc(r);
  return r;
}

}  // namespace scanalr
