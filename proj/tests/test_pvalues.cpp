#include <doctest.h>

#include <cmath>
#include <vector>

#include "scanalr/error.hpp"
#include "scanalr/pvalues.hpp"
#include "support.hpp"

using namespace scanalr;

namespace {

double observed(const PointDataset& d, const WindowSet& ws, const StatPipeline& pl) {
  return pl.value(pl.scores(d, ws, d.cases()));
}

WindowSet explicit_windows(const PointDataset& d, std::vector<std::vector<std::size_t>> sets) {
  ExplicitWindows ex;
  ex.sets = std::move(sets);
  return build_windows(d, WindowSpec{ex, false});
}

PointDataset on_line(std::vector<std::uint8_t> cases) {
  std::vector<double> coords(cases.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = static_cast<double>(i);
  return PointDataset(1, coords, std::move(cases));
}

}  // namespace

TEST_CASE("chi-square tail against a high-precision oracle") {
  const double table[][2] = {{0.5, 0.47950012218695346232},     {1, 0.31731050786291410283},
                             {3.8414588, 0.05000000061708768815}, {10, 0.0015654022580025496775},
                             {25, 5.7330314375838782335e-7},     {50, 1.5374597944280348502e-12},
                             {100, 1.5239706048321052132e-23},   {150, 1.7336432457178263627e-34},
                             {200, 2.088487583762544757e-45}};
  for (const auto& row : table) CHECK(chi2_tail(row[0]) == doctest::Approx(row[1]).epsilon(1e-12));
  CHECK(chi2_tail(0.0) == 1.0);
  CHECK(chi2_upper_quantile(0.05) == doctest::Approx(3.841458820694124).epsilon(1e-10));
  CHECK(chi2_upper_quantile(chi2_tail(17.0)) == doctest::Approx(17.0).epsilon(1e-9));
}

TEST_CASE("chi-square p-values") {
  CHECK(chi2_pvalue(0.0, Sided::Two).p == 1.0);
  CHECK(chi2_pvalue(3.8414588, Sided::Two).p == doctest::Approx(0.05).epsilon(1e-7));
  CHECK(chi2_pvalue(3.8414588, Sided::One).p == doctest::Approx(0.025).epsilon(1e-7));
  CHECK(chi2_pvalue(0.0, Sided::One).p == 0.5);
  const auto r = chi2_pvalue(5.0, Sided::Two);
  CHECK(r.method == PValueMethod::Chi2);
  CHECK(r.statistic == 5.0);
  CHECK(!r.monte_carlo());
  CHECK_THROWS_AS(chi2_pvalue(-1.0, Sided::Two), InputError);
  CHECK_THROWS_AS(chi2_pvalue(NAN, Sided::Two), InputError);
}

TEST_CASE("chi-square tail is decreasing and matches its asymptote") {
  double previous = 2.0;
  for (double c = 0.0; c <= 200.0; c += 0.25) {
    const double t = chi2_tail(c);
    CHECK(t < previous);
    previous = t;
    if (c >= 40.0) {
      // leading term of the series sqrt(2/(pi c)) e^{-c/2} (1 - 1/c + 3/c^2 - ...)
      const double approx = std::sqrt(2.0 / (M_PI * c)) * std::exp(-c / 2.0);
      CHECK(std::fabs(t / approx - 1.0) <= 1.0 / c);
      CHECK(std::fabs(t / (approx * (1.0 - 1.0 / c)) - 1.0) <= 3.0 / (c * c));
      if (c >= 101.0) CHECK(std::fabs(t / approx - 1.0) <= 0.01);
    }
  }
}

TEST_CASE("G distribution tail") {
  CHECK(g_threshold() == doctest::Approx(0.41879382922488895).epsilon(1e-10));
  CHECK(2.0 * std::exp(-g_threshold()) == doctest::Approx(M_PI * g_threshold()).epsilon(1e-12));
  CHECK(gdist_pvalue(g_threshold(), Sided::Two).p == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(gdist_pvalue(0.1, Sided::Two).p == 1.0);
  CHECK(gdist_pvalue(0.1, Sided::One).p == 0.5);
  CHECK(gdist_pvalue(3.8414588, Sided::Two).p == doctest::Approx(0.05963892298858618).epsilon(1e-12));
  CHECK(g_upper_quantile(g_tail(9.0)) == doctest::Approx(9.0).epsilon(1e-9));
  for (double c = 0.0; c <= 50.0 + 1e-9; c += 0.01)
    for (Sided k : {Sided::One, Sided::Two}) CHECK(gdist_pvalue(c, k).p >= chi2_pvalue(c, k).p);
}

TEST_CASE("method and mode names") {
  CHECK(method_name(PValueMethod::Chi2) == "chi2");
  CHECK(method_name(PValueMethod::Gdist) == "gdist");
  CHECK(method_name(PValueMethod::Perm) == "mc_perm");
  CHECK(method_name(PValueMethod::Risk) == "mc_risk");
  CHECK(method_name(PValueMethod::Exact) == "exact_enum");
  CHECK(covariate_mode_name(CovariateMode::Off) == "off");
  CHECK(covariate_mode_name(CovariateMode::Refit) == "refit");
  CHECK(covariate_mode_name(CovariateMode::Quadratic) == "quadratic");
}

TEST_CASE("reaches tolerates rounding only") {
  CHECK(reaches(1.0, 1.0));
  CHECK(reaches(1.0 - 1e-13, 1.0));
  CHECK(!reaches(1.0 - 1e-6, 1.0));
  CHECK(reaches(0.0, 0.0));
}

TEST_CASE("exact enumeration oracles") {
  const auto d = on_line({1, 1, 0, 0});
  StatPipeline scan{StatKind::Scan, Sided::Two, {}, CovariateMode::Off};
  const auto ws = explicit_windows(d, {{0, 1}});
  const auto e = exact_permutation_oracle(d, ws, scan, observed(d, ws, scan));
  CHECK(e.placements == 6);
  CHECK(e.at_least == 2);
  CHECK(e.p == doctest::Approx(2.0 / 6.0));

  const auto all = explicit_windows(d, {{0, 1, 2, 3}});
  CHECK(exact_permutation_oracle(d, all, scan, observed(d, all, scan)).p == 1.0);

  const auto big = testing::random_points(60, 0.5, 1);
  const auto wb = build_windows(big, parse_window_spec("knn:jmax=2"));
  CHECK_THROWS_AS(exact_permutation_oracle(big, wb, scan, 0.0), InputError);
}

TEST_CASE("permutation p-value formula edge cases") {
  // every subject in the only window: statistic is constant, all replicates tie
  const auto d = on_line({1, 0, 0, 1, 0, 0});
  StatPipeline alr{StatKind::Alr, Sided::Two, {}, CovariateMode::Off};
  const auto all = explicit_windows(d, {{0, 1, 2, 3, 4, 5}});
  const auto r = permutation_pvalue(d, all, alr, 99, 3);
  CHECK(r.p == 1.0);
  CHECK(r.mc_exceed == 99);

  // a tight cluster of every case beats every replicate
  std::vector<std::uint8_t> cases(300, 0);
  for (std::size_t i = 0; i < 15; ++i) cases[i] = 1;
  const auto c = on_line(cases);
  const auto ws = build_windows(c, parse_window_spec("knn:jmax=20"));
  const auto q = permutation_pvalue(c, ws, alr, 99, 4);
  CHECK(q.mc_exceed == 0);
  CHECK(q.p == doctest::Approx(0.01));
  CHECK(q.method == PValueMethod::Perm);
  CHECK(q.monte_carlo());
  CHECK(q.mc_L == 99);
  CHECK(q.seed == 4);
}

TEST_CASE("Monte Carlo agrees with exact enumeration") {
  struct Case {
    std::size_t J;
    double p;
    std::uint64_t seed;
    StatPipeline pipeline;
    const char* windows;
  };
  const std::vector<Case> cases{
      {6, 0.34, 2, {StatKind::Alr, Sided::Two, {}, CovariateMode::Off}, "knn:jmax=3"},
      {16, 0.3, 3, {StatKind::Scan, Sided::One, {}, CovariateMode::Off}, "knn:jmax=4"},
      {20, 0.2, 4, {StatKind::Alr, Sided::One, {}, CovariateMode::Off}, "allpairs:wmax=30"},
      {14, 0.4, 5, {StatKind::Scan, Sided::Two, {}, CovariateMode::Off}, "knn:jmax=6"},
  };
  for (const auto& c : cases) {
    const auto d = testing::random_points(c.J, c.p, c.seed);
    const auto ws = build_windows(d, parse_window_spec(c.windows));
    const double obs = observed(d, ws, c.pipeline);
    const auto exact = exact_permutation_oracle(d, ws, c.pipeline, obs);
    REQUIRE(exact.placements <= 10000);
    const std::size_t L = 10000;
    const auto mc = permutation_pvalue(d, ws, c.pipeline, L, 100 + c.seed, 4);
    CHECK(mc.p == (1.0 + static_cast<double>(mc.mc_exceed)) / (1.0 + static_cast<double>(L)));
    const double se = std::sqrt(exact.p * (1.0 - exact.p) / static_cast<double>(L));
    CAPTURE(exact.p);
    CAPTURE(mc.p);
    CHECK(std::fabs(mc.p - exact.p) <= 3.0 * se + 1.0 / static_cast<double>(L + 1));
  }
}

TEST_CASE("Monte Carlo p-values do not depend on the thread count") {
  const auto d = testing::random_points(250, 0.2, 9, 2);
  const auto ws = build_windows(d, parse_window_spec("knn:jmax=12"));
  for (const StatPipeline& pl :
       {StatPipeline{StatKind::Alr, Sided::Two, {}, CovariateMode::Off},
        StatPipeline{StatKind::Scan, Sided::One, {}, CovariateMode::Off},
        StatPipeline{StatKind::Alr, Sided::Two, {}, CovariateMode::Quadratic}}) {
    const auto a = permutation_pvalue(d, ws, pl, 199, 42, 1);
    const auto b = permutation_pvalue(d, ws, pl, 199, 42, 2);
    const auto c = permutation_pvalue(d, ws, pl, 199, 42, 8);
    CHECK(a.mc_exceed == b.mc_exceed);
    CHECK(a.mc_exceed == c.mc_exceed);
    CHECK(a.statistic == c.statistic);
    CHECK(permutation_pvalue(d, ws, pl, 199, 43, 2).seed == 43);
  }
  const auto fit = fit_logistic_null(d);
  const auto r1 = risk_adjusted_mc_pvalue(d, ws, fit, 199, 7, 1);
  const auto r8 = risk_adjusted_mc_pvalue(d, ws, fit, 199, 7, 8);
  CHECK(r1.mc_exceed == r8.mc_exceed);
  CHECK(r1.method == PValueMethod::Risk);
  CHECK(r1.se == doctest::Approx(std::sqrt(r1.p * (1 - r1.p) / 199.0)));
}

TEST_CASE("weighted ALR pipeline with uniform weights matches the ALR") {
  const auto d = testing::random_points(150, 0.2, 10);
  const auto ws = build_windows(d, parse_window_spec("knn:jmax=8"));
  StatPipeline alr{StatKind::Alr, Sided::Two, {}, CovariateMode::Off};
  StatPipeline walr{StatKind::WeightedAlr, Sided::Two, std::vector<double>(ws.size(), 1.0 / static_cast<double>(ws.size())),
                    CovariateMode::Off};
  CHECK(observed(d, ws, walr) == doctest::Approx(observed(d, ws, alr)).epsilon(1e-12));
  CHECK(permutation_pvalue(d, ws, walr, 99, 5).mc_exceed == permutation_pvalue(d, ws, alr, 99, 5).mc_exceed);
  StatPipeline short_weights{StatKind::WeightedAlr, Sided::Two, {1.0}, CovariateMode::Off};
  CHECK_THROWS_AS(short_weights.validate(d, ws), InputError);
}

TEST_CASE("risk-adjusted Monte Carlo at expected counts gives p = 1") {
  // ten locations of ten subjects, two cases each: eta_j = m_j everywhere
  std::vector<double> coords, cov;
  std::vector<std::uint8_t> cases;
  for (int j = 0; j < 10; ++j)
    for (int s = 0; s < 10; ++s) {
      coords.push_back(j);
      cases.push_back(s < 2);
      cov.push_back(1.0);
    }
  const PointDataset d(1, coords, cases, cov, 1);
  const auto ws = build_windows(d, parse_window_spec("knn:jmax=4"));
  const auto fit = fit_logistic_null(d);
  const auto risks = cell_risks(ws, fit);
  double total = 0.0;
  for (double r : risks) total += r;
  CHECK(total == doctest::Approx(20.0).epsilon(1e-9));
  const auto r = risk_adjusted_mc_pvalue(d, ws, fit, 99, 1);
  CHECK(r.statistic == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(r.p == 1.0);
}

TEST_CASE("adjusted scan value with constant risks equals the GLR scan") {
  const auto d = testing::random_points(200, 0.2, 12, 0, 100.0, 4.0);
  const auto ws = build_windows(d, parse_window_spec("knn:jmax=10"));
  std::vector<double> risks(ws.cells());
  for (std::size_t c = 0; c < ws.cells(); ++c)
    risks[c] = d.case_fraction() * static_cast<double>(ws.cell_subjects(c).size());
  const auto eta = ws.window_sums(risks);
  const double m = adjusted_scan_value(ws, eta, ws.case_counts(), static_cast<double>(d.case_count()));
  double expect = 0.0;
  for (std::size_t w = 0; w < ws.size(); ++w)
    expect = std::max(expect, adjusted_score(ws.case_counts()[w], eta[w], static_cast<double>(d.case_count())));
  CHECK(m == doctest::Approx(expect).epsilon(1e-12));
}
