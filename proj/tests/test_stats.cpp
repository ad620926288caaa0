#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "scanalr/error.hpp"
#include "scanalr/stats.hpp"
#include "support.hpp"

using namespace scanalr;

namespace {

ScoreVector vec(std::vector<double> s, Sided k = Sided::Two) {
  ScoreVector v;
  v.scores = std::move(s);
  v.sided = k;
  return v;
}

std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n, double hi) {
  std::uniform_real_distribution<double> u(0.0, hi);
  std::vector<double> s(n);
  for (auto& x : s) x = u(rng);
  return s;
}

}  // namespace

TEST_CASE("scan statistic breaks ties by window order") {
  const auto t = scan_statistic(vec({0.0, 3.0, 3.0}));
  CHECK(t.kind == StatKind::Scan);
  CHECK(t.value == 3.0);
  REQUIRE(t.argmax.has_value());
  CHECK(*t.argmax == 1);
  CHECK(t.windows == 3);
  CHECK(scan_statistic(vec({2.5})).value == 2.5);
  CHECK_THROWS_AS(scan_statistic(vec({})), InputError);
}

TEST_CASE("ALR of constant and single scores") {
  CHECK(alr_statistic(vec({1.7})).value == doctest::Approx(3.4).epsilon(1e-15));
  CHECK(alr_statistic(vec({1.7, 1.7, 1.7, 1.7})).value == doctest::Approx(3.4).epsilon(1e-14));
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  const auto t = alr_statistic(vec({1.7, 1.7, 1.7, 1.7}), w, "test");
  CHECK(t.kind == StatKind::WeightedAlr);
  CHECK(t.weights == "test");
  CHECK(t.value == doctest::Approx(3.4).epsilon(1e-14));
  CHECK(!t.argmax.has_value());
  CHECK_THROWS_AS(alr_statistic(vec({})), InputError);
}

TEST_CASE("sandwich bound 2(M - log N) <= U <= 2M") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 2000; ++t) {
    const auto s = random_scores(rng, 1 + rng() % 500, t % 2 ? 30.0 : 3.0);
    const double M = scan_statistic(vec(s)).value;
    const double U = alr_statistic(vec(s)).value;
    const double N = static_cast<double>(s.size());
    CHECK(U <= 2.0 * M + 1e-9);
    CHECK(U >= 2.0 * (M - std::log(N)) - 1e-9);
  }
}

TEST_CASE("log-sum-exp survives a +1000 shift") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    auto s = random_scores(rng, 1 + rng() % 200, 10.0);
    const double U = alr_statistic(vec(s)).value;
    for (auto& x : s) x += 1000.0;
    const double shifted = alr_statistic(vec(s)).value;
    REQUIRE(std::isfinite(shifted));
    CHECK(std::fabs(shifted - (U + 2000.0)) <= 1e-6);
  }
}

TEST_CASE("uniform weights reproduce the plain ALR") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_scores(rng, 1 + rng() % 300, 8.0);
    const std::vector<double> w(s.size(), 1.0 / static_cast<double>(s.size()));
    CHECK(std::fabs(alr_statistic(vec(s), w).value - alr_statistic(vec(s)).value) <= 1e-12);
  }
}

TEST_CASE("raising one score raises U and never lowers M") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 200; ++t) {
    auto s = random_scores(rng, 2 + rng() % 100, 5.0);
    const double U = alr_statistic(vec(s)).value, M = scan_statistic(vec(s)).value;
    s[rng() % s.size()] += 0.01;
    CHECK(alr_statistic(vec(s)).value > U);
    CHECK(scan_statistic(vec(s)).value >= M);
  }
}

TEST_CASE("reductions") {
  const std::vector<double> s{0.0, std::log(3.0)};
  CHECK(max_score(s) == std::log(3.0));
  CHECK(log_mean_exp(s) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const std::vector<double> w{0.25, 0.75};
  CHECK(log_weighted_sum_exp(s, w) == doctest::Approx(std::log(2.5)).epsilon(1e-15));
}

TEST_CASE("weight validation") {
  CHECK_NOTHROW(validate_weights(std::vector<double>{0.5, 0.5}, 2));
  CHECK_THROWS_AS(validate_weights(std::vector<double>{0.5, 0.4}, 2), InputError);
  CHECK_THROWS_AS(validate_weights(std::vector<double>{1.0}, 2), InputError);
  CHECK_THROWS_AS(validate_weights(std::vector<double>{1.5, -0.5}, 2), InputError);
  CHECK_THROWS_AS(validate_weights(std::vector<double>{1.0, 0.0}, 2), InputError);
  CHECK_THROWS_AS(validate_weights(std::vector<double>{NAN, 1.0}, 2), InputError);
  CHECK_THROWS_AS(alr_statistic(vec({1.0, 2.0}), std::vector<double>{0.3, 0.6}), InputError);
}

TEST_CASE("weights file") {
  testing::TempFile f("# weights\n0.25\n\n0.75\n", ".txt");
  CHECK(load_weights(f.path()) == std::vector<double>{0.25, 0.75});
  testing::TempFile bad("0.25\nabc\n", ".txt");
  CHECK_THROWS_AS(load_weights(bad.path()), InputError);
  CHECK_THROWS_AS(load_weights("/nonexistent/weights.txt"), InputError);
}

TEST_CASE("statistic names") {
  CHECK(stat_name(StatKind::Scan) == "scan");
  CHECK(stat_name(StatKind::Alr) == "alr");
  CHECK(stat_name(StatKind::WeightedAlr) == "walr");
}
