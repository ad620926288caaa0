#include "scanalr/replication.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <functional>
#include <random>
#include <sstream>
#include <tuple>

#include "scanalr/error.hpp"
#include "scanalr/gaussian.hpp"
#include "scanalr/logistic.hpp"
#include "scanalr/parallel.hpp"
#include "scanalr/rng.hpp"
#include "scanalr/stats.hpp"

namespace scanalr {
namespace {

using nlohmann::ordered_json;

// Stream ids for the parts of a study.
constexpr std::uint64_t kSetupStream = 0;
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kMonteCarloStream = 2;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

CovariateMode score_mode(const Config& cfg, CovariateMode fallback) {
  const std::string v = cfg.text("scores", std::string(covariate_mode_name(fallback)));
  if (v == "refit") return CovariateMode::Refit;
  if (v == "quadratic") return CovariateMode::Quadratic;
  throw InputError(cfg.origin() + ": key 'scores': expected refit or quadratic, got '" + v + "'");
}

void check_alphas(const std::vector<double>& alphas) {
  if (alphas.empty()) throw InputError("at least one significance level is required");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw InputError("significance levels must lie in (0, 1)");
}

void check_probability(double p, const std::string& name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError(name + " must lie in [0, 1]");
}

struct Outcome {
  bool ok = false;
  double p_mc = 1.0;
  double p_alr = 1.0;
  std::size_t fallbacks = 0;
};

// One replicate of the MC-vs-ALR comparison on labelled data.
Outcome compare_tests(const PointDataset& data, const WindowSet& ws, CovariateMode mode, std::size_t L,
                      std::uint64_t mc_seed) {
  Outcome out;
  if (data.case_count() == 0 || data.case_count() == data.subjects()) return out;
  try {
    const LogisticFit fit = fit_logistic_null(data);
    const ScoreVector s = mode == CovariateMode::Quadratic ? quadratic_window_scores(data, ws, fit, Sided::Two)
                                                           : refit_window_scores(data, ws, fit, Sided::Two, 1);
    out.fallbacks = s.count(WindowStatus::QuadraticFallback);
    out.p_alr = chi2_pvalue(alr_statistic(s).value, Sided::Two).p;
    out.p_mc = risk_adjusted_mc_pvalue(data, ws, fit, L, mc_seed, 1).p;
    out.ok = true;
  } catch (const NumericError&) {
    out.ok = false;
  }
  return out;
}

RateTable::Row summarize(double value, const std::vector<Outcome>& outcomes, const std::vector<double>& alphas) {
  RateTable::Row row;
  row.value = value;
  row.mc.assign(alphas.size(), 0.0);
  row.alr.assign(alphas.size(), 0.0);
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++row.failures;
      continue;
    }
    ++row.replicates;
    row.fallbacks += o.fallbacks;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      row.mc[a] += o.p_mc <= alphas[a];
      row.alr[a] += o.p_alr <= alphas[a];
    }
  }
  const double reps = static_cast<double>(std::max<std::size_t>(row.replicates, 1));
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    row.mc[a] /= reps;
    row.alr[a] /= reps;
  }
  return row;
}

std::string fmt_alpha(double a) {
  std::ostringstream s;
  s << a;
  return s.str();
}

// U and M (one-sided) from per-cell case counts.
struct OneSidedStats {
  const WindowSet& ws;
  std::size_t cases;
  std::vector<double> m, s;
  OneSidedStats(const WindowSet& w, std::size_t I) : ws(w), cases(I), m(w.size()), s(w.size()) {}
  std::pair<double, double> operator()(std::span<const double> cell_cases) {
    ws.window_sums(cell_cases, m);
    glr_scores(ws.subject_counts(), m, cases, ws.subjects(), Sided::One, s);
    return {2.0 * log_mean_exp(s), max_score(s)};
  }
};

ordered_json rate_table_json(const RateTable& t) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : t.rows) {
    ordered_json row;
    row[t.parameter] = r.value;
    row["replicates"] = r.replicates;
    row["failures"] = r.failures;
    row["quadratic_fallback_windows"] = r.fallbacks;
    for (std::size_t a = 0; a < t.alphas.size(); ++a) {
      const std::string key = "alpha=" + fmt_alpha(t.alphas[a]);
      row[key] = {{"mc", r.mc[a]},
                  {"mc_se", rate_se(r.mc[a], r.replicates)},
                  {"alr", r.alr[a]},
                  {"alr_se", rate_se(r.alr[a], r.replicates)}};
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

double rate_se(double rate, std::size_t reps) {
  if (reps == 0) return 0.0;
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
}

void RateTable::write_tsv(std::ostream& out) const {
  out << parameter;
  for (double a : alphas) out << "\tmc_" << fmt_alpha(a) << "\talr_" << fmt_alpha(a);
  out << '\n';
  for (const auto& r : rows) {
    out << r.value;
    for (std::size_t a = 0; a < alphas.size(); ++a) out << '\t' << r.mc[a] << '\t' << r.alr[a];
    out << '\n';
  }
}

// ---- Example 1 -------------------------------------------------------------

Example1Config Example1Config::from(const Config& cfg) {
  Example1Config c;
  c.replicates = cfg.count("replicates", c.replicates);
  c.mc_L = cfg.count("mc_L", c.mc_L);
  c.alphas = cfg.numbers("alphas", c.alphas);
  c.thetas = cfg.numbers("theta", c.thetas);
  c.block_size = cfg.count("block_size", c.block_size);
  c.beta1 = cfg.number("beta1", c.beta1);
  c.covariate_shift = cfg.number("covariate_shift", c.covariate_shift);
  c.scores = score_mode(cfg, c.scores);
  c.validate();
  return c;
}

void Example1Config::validate() const {
  if (replicates < 1 || mc_L < 1 || block_size < 1) throw InputError("example1: counts must be >= 1");
  if (thetas.empty()) throw InputError("example1: theta grid is empty");
  check_alphas(alphas);
}

RateTable run_example1(const Example1Config& cfg, std::uint64_t seed, unsigned threads) {
  cfg.validate();
  const std::size_t J = 3 * cfg.block_size;
  Engine setup = make_stream(seed, {kSetupStream});
  std::normal_distribution<double> normal;
  std::vector<double> coords(2 * J), cov(2 * J);
  ExplicitWindows blocks;
  blocks.sets.resize(3);
  for (std::size_t i = 0; i < J; ++i) {
    const std::size_t b = i / cfg.block_size;
    coords[2 * i] = static_cast<double>(b);
    coords[2 * i + 1] = static_cast<double>(i % cfg.block_size);
    cov[2 * i] = 1.0;
    cov[2 * i + 1] = normal(setup) + (b == 0 ? cfg.covariate_shift : 0.0);
    blocks.sets[b].push_back(i);
  }
  const PointDataset base(2, coords, std::vector<std::uint8_t>(J, 0), cov, 2, {}, {"u"});
  const WindowSet ws = build_windows(base, WindowSpec{blocks, false});

  RateTable table;
  table.parameter = "theta";
  table.alphas = cfg.alphas;
  for (std::size_t t = 0; t < cfg.thetas.size(); ++t) {
    const double theta = cfg.thetas[t];
    std::vector<Outcome> outcomes(cfg.replicates);
    parallel_for(cfg.replicates, threads, [&](std::size_t r) {
      Engine rng = make_stream(seed, {kDataStream, t, r});
      std::uniform_real_distribution<double> unif;
      std::vector<std::uint8_t> labels(J);
      for (std::size_t i = 0; i < J; ++i)
        labels[i] = unif(rng) < sigmoid(cfg.beta1 + (i < cfg.block_size ? theta : 0.0));
      outcomes[r] = compare_tests(base.with_cases(std::move(labels)), ws, cfg.scores, cfg.mc_L,
                                  derive_seed(seed, {kMonteCarloStream, t, r}));
    });
    table.rows.push_back(summarize(theta, outcomes, cfg.alphas));
  }
  return table;
}

// ---- Example 2 -------------------------------------------------------------

Example2Config Example2Config::from(const Config& cfg) {
  Example2Config c;
  c.replicates = cfg.count("replicates", c.replicates);
  c.mc_L = cfg.count("mc_L", c.mc_L);
  c.alphas = cfg.numbers("alphas", c.alphas);
  c.p1 = cfg.numbers("p1", c.p1);
  c.p0 = cfg.number("p0", c.p0);
  c.locations = cfg.count("locations", c.locations);
  c.per_location = cfg.count("per_location", c.per_location);
  c.center = cfg.numbers("center", c.center);
  c.radius = cfg.number("radius", c.radius);
  c.jmax = cfg.count("jmax", c.jmax);
  c.dedup = cfg.flag("dedup", c.dedup);
  c.covariate_shift = cfg.number("covariate_shift", c.covariate_shift);
  c.scores = score_mode(cfg, c.scores);
  c.validate();
  return c;
}

void Example2Config::validate() const {
  if (replicates < 1 || mc_L < 1 || locations < 2 || per_location < 1 || jmax < 1)
    throw InputError("example2: counts must be >= 1 (and at least 2 locations)");
  if (center.size() != 2) throw InputError("example2: center needs two coordinates");
  if (!(radius >= 0.0)) throw InputError("example2: radius must be >= 0");
  if (p1.empty()) throw InputError("example2: p1 grid is empty");
  check_probability(p0, "example2: p0");
  for (double p : p1) check_probability(p, "example2: p1");
  check_alphas(alphas);
}

RateTable run_example2(const Example2Config& cfg, std::uint64_t seed, unsigned threads) {
  cfg.validate();
  const std::size_t q = cfg.locations;
  const std::size_t J = q * cfg.per_location;
  WindowSpec spec{KnnWindows{cfg.jmax, 1, std::nullopt}, cfg.dedup};

  RateTable table;
  table.parameter = "p1";
  table.alphas = cfg.alphas;
  for (std::size_t t = 0; t < cfg.p1.size(); ++t) {
    std::vector<Outcome> outcomes(cfg.replicates);
    parallel_for(cfg.replicates, threads, [&](std::size_t r) {
      Engine rng = make_stream(seed, {kDataStream, t, r});
      std::uniform_real_distribution<double> unif;
      std::normal_distribution<double> normal;
      std::vector<double> loc(2 * q);
      std::vector<std::uint8_t> inside(q);
      for (std::size_t j = 0; j < q; ++j) {
        loc[2 * j] = unif(rng);
        loc[2 * j + 1] = unif(rng);
        const double dx = loc[2 * j] - cfg.center[0];
        const double dy = loc[2 * j + 1] - cfg.center[1];
        inside[j] = dx * dx + dy * dy <= cfg.radius * cfg.radius;
      }
      std::vector<double> coords(2 * J), cov(2 * J);
      std::vector<std::uint8_t> labels(J);
      for (std::size_t i = 0; i < J; ++i) {
        const std::size_t j = i / cfg.per_location;
        coords[2 * i] = loc[2 * j];
        coords[2 * i + 1] = loc[2 * j + 1];
        labels[i] = unif(rng) < (inside[j] ? cfg.p1[t] : cfg.p0);
        cov[2 * i] = 1.0;
        cov[2 * i + 1] = normal(rng) + (inside[j] ? cfg.covariate_shift : 0.0);
      }
      const PointDataset data(2, std::move(coords), std::move(labels), std::move(cov), 2, {}, {"u"});
      const WindowSet ws = build_windows(data, spec);
      outcomes[r] = compare_tests(data, ws, cfg.scores, cfg.mc_L, derive_seed(seed, {kMonteCarloStream, t, r}));
    });
    table.rows.push_back(summarize(cfg.p1[t], outcomes, cfg.alphas));
  }
  return table;
}

// ---- qq experiments --------------------------------------------------------

QqConfig QqConfig::from(const Config& cfg) {
  QqConfig c;
  const std::string mode = cfg.text("mode");
  if (mode == "gaussian") {
    c.mode = Mode::Gaussian;
  } else if (mode == "bernoulli") {
    c.mode = Mode::Bernoulli;
  } else {
    throw InputError(cfg.origin() + ": key 'mode': expected gaussian or bernoulli, got '" + mode + "'");
  }
  c.n = cfg.count("n", c.n);
  c.w1 = cfg.number("w1", c.w1);
  c.replicates = cfg.count("replicates", c.replicates);
  c.sided = sided_from_int(static_cast<int>(cfg.count("k", 2)));
  c.data = cfg.text("data", "");
  c.population = cfg.count("population", c.population);
  c.p0 = cfg.maybe_number("p0");
  c.validate();
  return c;
}

void QqConfig::validate() const {
  if (replicates < 1) throw InputError("qq: replicates must be >= 1");
  if (data.empty() && n < 2) throw InputError("qq: need at least 2 locations");
  if (!(w1 >= 0.0)) throw InputError("qq: w1 must be >= 0");
  if (mode == Mode::Gaussian && !data.empty()) throw InputError("qq: 'data' applies to bernoulli mode only");
  if (mode == Mode::Bernoulli && data.empty() && population < 1) throw InputError("qq: population must be >= 1");
  if (p0 && !(*p0 > 0.0 && *p0 < 1.0)) throw InputError("qq: p0 must lie in (0, 1)");
}

WindowSet proper_windows(const WindowSet& ws) {
  std::vector<std::size_t> keep;
  const auto n = ws.subject_counts();
  for (std::size_t w = 0; w < ws.size(); ++w)
    if (n[w] > 0.0 && n[w] < static_cast<double>(ws.subjects())) keep.push_back(w);
  if (keep.empty()) throw InputError("no window holds a proper subset of the locations");
  return ws.select(keep);
}

UzSample simulate_uz(const WindowSet& ws, std::size_t replicates, std::uint64_t seed, unsigned threads) {
  const ZFieldSampler sampler(ws);
  UzSample out;
  out.one.resize(replicates);
  out.two.resize(replicates);
  parallel_for(replicates, threads, [&](std::size_t l) {
    const ZField z = sampler.draw(seed, l);
    out.one[l] = uz_statistic(z, Sided::One);
    out.two[l] = uz_statistic(z, Sided::Two);
  });
  return out;
}

void QqResult::write_tsv(std::ostream& out) const {
  out.precision(10);
  out << "u\tchi2_quantile\tg_quantile\n";
  for (std::size_t l = 0; l < values.size(); ++l) out << values[l] << '\t' << chi2[l] << '\t' << g[l] << '\n';
}

namespace {
double quantile_error(const std::vector<double>& values, const std::vector<double>& theory, double lo, double hi) {
  const double L = static_cast<double>(values.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t l = 0; l < values.size(); ++l) {
    const double q = (static_cast<double>(l) + 0.5) / L;
    if (q < lo || q > hi) continue;
    sum += std::abs(values[l] - theory[l]);
    ++count;
  }
  if (count == 0) throw InputError("qq: no plotting positions in the requested band");
  return sum / static_cast<double>(count);
}
}  // namespace

double QqResult::chi2_error(double lo, double hi) const { return quantile_error(values, chi2, lo, hi); }
double QqResult::g_error(double lo, double hi) const { return quantile_error(values, g, lo, hi); }

QqResult run_qq_experiment(const QqConfig& cfg, std::uint64_t seed, unsigned threads) {
  cfg.validate();
  QqResult res;
  const WindowSpec spec{AllPairsWindows{cfg.w1}, false};
  Engine setup = make_stream(seed, {kSetupStream});
  std::uniform_real_distribution<double> unif;

  if (cfg.mode == QqConfig::Mode::Gaussian) {
    std::vector<double> coords(2 * cfg.n);
    for (double& c : coords) c = unif(setup);
    const PointDataset locations(2, coords, std::vector<std::uint8_t>(cfg.n, 0));
    const WindowSet all = build_windows(locations, spec, threads);
    const WindowSet ws = proper_windows(all);
    res.windows = ws.size();
    res.dropped_windows = all.size() - ws.size();
    UzSample u = simulate_uz(ws, cfg.replicates, derive_seed(seed, {kDataStream}), threads);
    res.values = cfg.sided == Sided::One ? std::move(u.one) : std::move(u.two);
  } else {
    AggregatedDataset agg;
    if (!cfg.data.empty()) {
      agg = load_aggregated_csv(cfg.data);
    } else {
      agg.dim = 2;
      agg.centroids.resize(2 * cfg.n);
      for (double& c : agg.centroids) c = unif(setup);
      agg.populations.assign(cfg.n, cfg.population);
      agg.case_counts.assign(cfg.n, 0);
    }
    const std::size_t q = agg.locations();
    const double J = static_cast<double>(agg.total_population());
    double p0 = 0.05;
    if (cfg.p0) {
      p0 = *cfg.p0;
    } else if (!cfg.data.empty()) {
      p0 = static_cast<double>(agg.total_cases()) / J;
      if (!(p0 > 0.0 && p0 < 1.0)) throw InputError("qq: data file needs 0 < I < J to default p0");
    }
    const PointDataset locations(agg.dim, agg.centroids, std::vector<std::uint8_t>(q, 0));
    const WindowSet ws = build_windows(locations, spec, threads);
    res.windows = ws.size();
    std::vector<double> pop(q);
    for (std::size_t j = 0; j < q; ++j) pop[j] = static_cast<double>(agg.populations[j]);
    const auto n_B = ws.window_sums(ws.cell_totals(pop));
    const std::uint64_t sim_seed = derive_seed(seed, {kDataStream});
    res.values.resize(cfg.replicates);
    parallel_for(cfg.replicates, threads, [&](std::size_t l) {
      Engine rng = make_stream(sim_seed, {l});
      std::vector<double> m(q);
      std::uint64_t I = 0;
      for (std::size_t j = 0; j < q; ++j) {
        std::binomial_distribution<std::uint64_t> bin(agg.populations[j], p0);
        const auto x = bin(rng);
        m[j] = static_cast<double>(x);
        I += x;
      }
      if (I == 0 || static_cast<double>(I) == J) {
        res.values[l] = 0.0;
        return;
      }
      const auto m_B = ws.window_sums(ws.cell_totals(m));
      std::vector<double> s(ws.size());
      glr_scores(n_B, m_B, I, static_cast<std::size_t>(J), cfg.sided, s);
      res.values[l] = 2.0 * log_mean_exp(s);
    });
  }

  std::sort(res.values.begin(), res.values.end());
  const std::size_t L = res.values.size();
  res.chi2.resize(L);
  res.g.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const double tail = 1.0 - (static_cast<double>(l) + 0.5) / static_cast<double>(L);
    res.chi2[l] = chi2_upper_quantile(tail);
    res.g[l] = g_upper_quantile(tail);
  }
  return res;
}

// ---- power study -----------------------------------------------------------

PowerConfig PowerConfig::from(const Config& cfg) {
  PowerConfig c;
  c.data = cfg.text("data");
  c.windows = cfg.text("windows", c.windows);
  c.center = cfg.numbers("center", {});
  if (c.center.empty()) throw InputError(cfg.origin() + ": missing required key 'center'");
  c.radius = cfg.number("radius", c.radius);
  c.rr = cfg.numbers("rr", {});
  if (c.rr.empty()) throw InputError(cfg.origin() + ": missing required key 'rr'");
  c.replicates = cfg.count("replicates", c.replicates);
  c.alpha = cfg.number("alpha", c.alpha);
  c.crit_u = cfg.maybe_number("crit_u");
  c.crit_m = cfg.maybe_number("crit_m");
  c.null_replicates = cfg.count("null_replicates", c.null_replicates);
  c.validate();
  return c;
}

void PowerConfig::validate() const {
  if (replicates < 1 || null_replicates < 1) throw InputError("power: replicate counts must be >= 1");
  if (!(radius >= 0.0)) throw InputError("power: radius must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("power: alpha must lie in (0, 1)");
  for (double r : rr)
    if (!(r > 0.0) || !std::isfinite(r)) throw InputError("power: relative risks must be positive");
}

std::pair<double, double> solve_cluster_risks(std::size_t inside, std::size_t subjects, std::size_t cases, double rr) {
  if (inside > subjects || cases > subjects) throw InputError("power: inconsistent counts");
  const double n = static_cast<double>(inside);
  const double p_tilde = static_cast<double>(cases) / (n * rr + static_cast<double>(subjects - inside));
  const double p = rr * p_tilde;
  if (p > 1.0 || p_tilde > 1.0)
    throw InputError("power: RR = " + std::to_string(rr) + " with n = " + std::to_string(inside) +
                     " needs an inside case probability above 1");
  return {p, p_tilde};
}

double upper_critical_value(std::vector<double> values, double alpha) {
  if (values.empty()) throw InputError("critical value from an empty sample");
  std::sort(values.begin(), values.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(k, 1, values.size()) - 1];
}

void PowerResult::write_tsv(std::ostream& out) const {
  out << "rr\tn\tp\tp_tilde\tpower_u\tse_u\tpower_m\tse_m\n";
  for (const auto& r : rows)
    out << r.rr << '\t' << r.inside << '\t' << r.p << '\t' << r.p_tilde << '\t' << r.power_u << '\t'
        << rate_se(r.power_u, r.replicates) << '\t' << r.power_m << '\t' << rate_se(r.power_m, r.replicates) << '\n';
}

PowerResult run_power_study(const PowerConfig& cfg, const PointDataset& data, std::uint64_t seed, unsigned threads) {
  cfg.validate();
  if (cfg.center.size() != data.dim()) throw InputError("power: center dimension does not match the data");
  const WindowSet ws = build_windows(data, parse_window_spec(cfg.windows), threads);
  const std::size_t J = data.subjects();
  const std::size_t I = data.case_count();
  if (I == 0 || I == J) throw InputError("power: data needs both cases and controls");

  std::vector<std::uint8_t> in_circle(J);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < J; ++i) {
    const auto loc = data.location(i);
    double d2 = 0.0;
    for (std::size_t k = 0; k < loc.size(); ++k) d2 += (loc[k] - cfg.center[k]) * (loc[k] - cfg.center[k]);
    in_circle[i] = d2 <= cfg.radius * cfg.radius;
    inside += in_circle[i];
  }

  PowerResult res;
  res.windows = ws.size();
  if (cfg.crit_u && cfg.crit_m) {
    res.crit_u = *cfg.crit_u;
    res.crit_m = *cfg.crit_m;
  } else {
    std::vector<double> u(cfg.null_replicates), m(cfg.null_replicates);
    const std::uint64_t null_seed = derive_seed(seed, {kSetupStream});
    parallel_for(cfg.null_replicates, threads, [&](std::size_t l) {
      Engine rng = make_stream(null_seed, {l});
      std::vector<std::size_t> scratch, chosen;
      sample_subset(rng, J, I, scratch, chosen);
      std::vector<double> counts(ws.cells(), 0.0);
      for (std::size_t i : chosen) counts[ws.cell_of(i)] += 1.0;
      OneSidedStats stats(ws, I);
      std::tie(u[l], m[l]) = stats(counts);
    });
    res.crit_u = cfg.crit_u ? *cfg.crit_u : upper_critical_value(u, cfg.alpha);
    res.crit_m = cfg.crit_m ? *cfg.crit_m : upper_critical_value(m, cfg.alpha);
    res.critical_from_permutation = true;
  }

  constexpr std::size_t kMaxAttempts = 1'000'000;
  for (std::size_t row = 0; row < cfg.rr.size(); ++row) {
    PowerRow pr;
    pr.rr = cfg.rr[row];
    pr.inside = inside;
    std::tie(pr.p, pr.p_tilde) = solve_cluster_risks(inside, J, I, pr.rr);
    pr.replicates = cfg.replicates;
    std::vector<std::uint8_t> hit_u(cfg.replicates), hit_m(cfg.replicates);
    parallel_for(cfg.replicates, threads, [&](std::size_t l) {
      Engine rng = make_stream(seed, {kDataStream, row, l});
      std::uniform_real_distribution<double> unif;
      std::vector<double> counts(ws.cells());
      for (std::size_t attempt = 0;; ++attempt) {
        if (attempt == kMaxAttempts)
          throw NumericError("power: no label draw with I = " + std::to_string(I) + " cases in " +
                             std::to_string(kMaxAttempts) + " attempts");
        std::fill(counts.begin(), counts.end(), 0.0);
        std::size_t total = 0;
        for (std::size_t i = 0; i < J; ++i) {
          if (unif(rng) < (in_circle[i] ? pr.p : pr.p_tilde)) {
            counts[ws.cell_of(i)] += 1.0;
            ++total;
          }
        }
        if (total == I) break;
      }
      OneSidedStats stats(ws, I);
      const auto [u, m] = stats(counts);
      hit_u[l] = reaches(u, res.crit_u);
      hit_m[l] = reaches(m, res.crit_m);
    });
    const double reps = static_cast<double>(cfg.replicates);
    pr.power_u = static_cast<double>(std::count(hit_u.begin(), hit_u.end(), 1)) / reps;
    pr.power_m = static_cast<double>(std::count(hit_m.begin(), hit_m.end(), 1)) / reps;
    res.rows.push_back(pr);
  }
  return res;
}

// ---- driver ----------------------------------------------------------------

std::string run_experiment(const std::string& name, const Config& cfg, std::uint64_t seed, unsigned threads,
                           const std::filesystem::path& out_dir) {
  ordered_json summary;
  summary["schema"] = 1;
  summary["experiment"] = name;
  summary["seed"] = seed;
  summary["config"] = cfg.values();
  std::ostringstream tsv;

  if (name == "example1") {
    const auto c = Example1Config::from(cfg);
    cfg.check_consumed();
    const RateTable t = run_example1(c, seed, threads);
    t.write_tsv(tsv);
    summary["rows"] = rate_table_json(t);
  } else if (name == "example2") {
    const auto c = Example2Config::from(cfg);
    cfg.check_consumed();
    const RateTable t = run_example2(c, seed, threads);
    t.write_tsv(tsv);
    summary["rows"] = rate_table_json(t);
  } else if (name == "qq") {
    const auto c = QqConfig::from(cfg);
    cfg.check_consumed();
    const QqResult r = run_qq_experiment(c, seed, threads);
    r.write_tsv(tsv);
    summary["windows"] = r.windows;
    summary["dropped_windows"] = r.dropped_windows;
    summary["replicates"] = r.values.size();
    if (r.values.size() >= 10) {
      summary["mean_abs_error_0.9_0.999"] = {{"chi2", r.chi2_error(0.9, 0.999)}, {"g", r.g_error(0.9, 0.999)}};
    }
  } else if (name == "power") {
    const auto c = PowerConfig::from(cfg);
    cfg.check_consumed();
    const PointDataset data = load_point_csv(c.data);
    const PowerResult r = run_power_study(c, data, seed, threads);
    r.write_tsv(tsv);
    summary["windows"] = r.windows;
    summary["crit_u"] = r.crit_u;
    summary["crit_m"] = r.crit_m;
    summary["critical_values"] = r.critical_from_permutation ? "null permutation run" : "config";
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows)
      rows.push_back({{"rr", row.rr},
                      {"n", row.inside},
                      {"p", row.p},
                      {"p_tilde", row.p_tilde},
                      {"power_u", row.power_u},
                      {"se_u", rate_se(row.power_u, row.replicates)},
                      {"power_m", row.power_m},
                      {"se_m", rate_se(row.power_m, row.replicates)}});
    summary["rows"] = rows;
  } else {
    throw InputError("unknown experiment '" + name + "' (expected example1, example2, qq or power)");
  }

  std::filesystem::create_directories(out_dir);
  const auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
  };
  const std::string json = summary.dump(2) + "\n";
  write(out_dir / (name + ".tsv"), tsv.str());
  write(out_dir / (name + ".json"), json);
  return json;
}

}  // namespace scanalr
