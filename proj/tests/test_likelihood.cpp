#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "scanalr/error.hpp"
#include "scanalr/likelihood.hpp"
#include "scanalr/simd/kernels.hpp"
#include "support.hpp"

using namespace scanalr;

namespace {

double score(double n, double m, std::size_t I, std::size_t J, Sided k) {
  std::vector<double> nn{n}, mm{m}, out(1);
  glr_scores(nn, mm, I, J, k, out);
  return out[0];
}

// Runs the body once per supported SIMD backend.
template <class F>
void each_backend(F&& body) {
  const auto saved = simd::active_backend();
  for (auto b : {simd::Backend::Scalar, simd::Backend::Avx2}) {
    if (!simd::backend_supported(b)) continue;
    simd::set_backend(b);
    CAPTURE(simd::backend_name(b));
    body();
  }
  simd::set_backend(saved);
}

}  // namespace

TEST_CASE("phi values") {
  CHECK(phi(0.5, 0.5) == 0.0);
  CHECK(phi(1.0, 0.3) == doctest::Approx(-std::log(0.3)).epsilon(1e-15));
  CHECK(phi(0.0, 0.3) == doctest::Approx(-std::log(0.7)).epsilon(1e-15));
  CHECK(phi(0.75, 0.5) == doctest::Approx(0.13081203594113694).epsilon(1e-13));
  CHECK_THROWS_AS(phi(0.5, 0.0), InputError);
  CHECK_THROWS_AS(phi(0.5, 1.0), InputError);
  CHECK_THROWS_AS(phi(1.5, 0.5), InputError);
}

TEST_CASE("phi is convex with its minimum at the baseline") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 5000; ++t) {
    const double p0 = 0.001 + 0.998 * u(rng);
    const double a = u(rng), b = u(rng), lam = u(rng);
    CHECK(phi(lam * a + (1 - lam) * b, p0) <= lam * phi(a, p0) + (1 - lam) * phi(b, p0) + 1e-12);
    CHECK(phi(a, p0) >= 0.0);
  }
}

TEST_CASE("GLR score examples") {
  each_backend([] {
    CHECK(score(4, 4, 5, 10, Sided::Two) == doctest::Approx(4.2281045524016249623).epsilon(1e-12));
    CHECK(score(4, 4, 5, 10, Sided::One) == doctest::Approx(4.2281045524016249623).epsilon(1e-12));
    CHECK(score(4, 1, 5, 10, Sided::One) == 0.0);
    CHECK(score(4, 1, 5, 10, Sided::Two) > 0.0);
    CHECK(score(0, 0, 5, 10, Sided::Two) == 0.0);
    CHECK(score(10, 5, 5, 10, Sided::Two) == 0.0);
    CHECK(score(4, 2, 5, 10, Sided::Two) == doctest::Approx(0.0).epsilon(1e-15));
  });
  CHECK_THROWS_AS(score(4, 0, 0, 10, Sided::Two), InputError);
  CHECK_THROWS_AS(score(4, 4, 10, 10, Sided::Two), InputError);
  CHECK_THROWS_AS(sided_from_int(3), InputError);
}

TEST_CASE("GLR scores from a window set") {
  const auto d = testing::random_points(300, 0.2, 5);
  const auto ws = build_windows(d, parse_window_spec("knn:jmax=20"));
  const auto sv = glr_scores(ws, d.case_count(), d.subjects(), Sided::Two);
  CHECK(sv.size() == ws.size());
  CHECK(sv.status.empty());
  CHECK(sv.count(WindowStatus::Ok) == ws.size());
  CHECK(sv.baseline.rfind("p0=", 0) == 0);
  const double p0 = d.case_fraction();
  for (std::size_t w = 0; w < ws.size(); ++w) {
    const double n = ws.subject_counts()[w], m = ws.case_counts()[w];
    const double J = static_cast<double>(d.subjects()), I = static_cast<double>(d.case_count());
    const double expect = n * phi(m / n, p0) + (n < J ? (J - n) * phi((I - m) / (J - n), p0) : 0.0);
    CHECK(sv.scores[w] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("complement symmetry and the one-sided decomposition") {
  each_backend([] {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20000; ++t) {
      const std::size_t J = 2 + rng() % 2000;
      const std::size_t I = 1 + rng() % (J - 1);
      const double n = static_cast<double>(rng() % (J + 1));
      const double lo = std::max(0.0, static_cast<double>(I) - (static_cast<double>(J) - n));
      const double hi = std::min(n, static_cast<double>(I));
      const double m = lo + static_cast<double>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
      const double nc = static_cast<double>(J) - n, mc = static_cast<double>(I) - m;

      const double s2 = score(n, m, I, J, Sided::Two);
      const double s2c = score(nc, mc, I, J, Sided::Two);
      REQUIRE(std::isfinite(s2));
      CHECK(s2 >= 0.0);
      CHECK(s2 == doctest::Approx(s2c).epsilon(1e-12));

      const double s1 = score(n, m, I, J, Sided::One);
      const double s1c = score(nc, mc, I, J, Sided::One);
      const double lhs = std::exp(s2), rhs = std::exp(s1) + std::exp(s1c) - 1.0;
      if (std::isfinite(lhs)) CHECK(std::fabs(lhs - rhs) <= 1e-10 * lhs);
      // one-sided score is zero at or below the baseline rate
      if (n > 0 && m / n <= static_cast<double>(I) / static_cast<double>(J)) CHECK(s1 == 0.0);
    }
  });
}

TEST_CASE("score is zero exactly at the null rate") {
  CHECK(score(20, 5, 25, 100, Sided::Two) == 0.0);
  CHECK(score(20, 6, 25, 100, Sided::Two) > 0.0);
}

TEST_CASE("risk-adjusted scores") {
  CHECK(adjusted_score(3.0, 3.0, 10.0) == 0.0);
  CHECK(adjusted_score(10.0, 5.0, 10.0) == doctest::Approx(10.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(adjusted_score(7.0, 4.0, 10.0) == doctest::Approx(1.8378689738681228756).epsilon(1e-13));
  CHECK(adjusted_score(0.0, 0.0, 10.0) == 0.0);
  CHECK_THROWS_AS(adjusted_score(1.0, 0.0, 10.0), NumericError);
  CHECK_THROWS_AS(adjusted_score(9.0, 10.0, 10.0), NumericError);

  const auto d = testing::random_points(200, 0.25, 9);
  const auto ws = build_windows(d, parse_window_spec("knn:jmax=5"));
  // cell risks are summed per window before scoring
  std::vector<double> risks(ws.cells());
  const double p0 = d.case_fraction();
  for (std::size_t c = 0; c < ws.cells(); ++c) risks[c] = p0 * static_cast<double>(ws.cell_subjects(c).size());
  const auto sv = adjusted_scores(ws, risks, ws.case_counts(), d.case_count());
  const auto eta = ws.window_sums(risks);
  for (std::size_t w = 0; w < ws.size(); ++w)
    CHECK(sv.scores[w] == doctest::Approx(adjusted_score(ws.case_counts()[w], eta[w], static_cast<double>(d.case_count()))));
  risks[0] += 1.0;
  CHECK_THROWS_AS(adjusted_scores(ws, risks, ws.case_counts(), d.case_count()), InputError);
}
