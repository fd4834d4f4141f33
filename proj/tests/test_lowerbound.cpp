#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "ptomo/lowerbound.hpp"

#include <cmath>

using namespace ptomo;

namespace {

long double oracle_upper_tail(std::int64_t m, long double p, long double x) {
  const auto pmf = oracle::binomial_pmf(m, p);
  long double tail = 0;
  for (std::int64_t j = 0; j <= m; ++j)
    if (j > x) tail += pmf[static_cast<std::size_t>(j)];
  return tail;
}

// Majority decoding success: the right symbol is the one with probability
// 1/2 - eps, so success needs fewer than m/2 of them, plus half the ties.
long double oracle_decode_success(std::int64_t m, long double eps) {
  const auto pmf = oracle::binomial_pmf(m, 0.5L - eps);
  long double s = 0;
  for (std::int64_t j = 0; j <= m; ++j) {
    if (2 * j < m) s += pmf[static_cast<std::size_t>(j)];
    if (2 * j == m) s += pmf[static_cast<std::size_t>(j)] / 2;
  }
  return s;
}

}  // namespace

TEST_CASE("required_samples_single") {
  CHECK(required_samples_single(0.1, 0.01) == 65);
  CHECK(required_samples_single(0.1, 0.2499999) == 1);
  CHECK_THROWS_AS(required_samples_single(0.1, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(required_samples_single(0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(required_samples_single(0.5, 0.01), std::invalid_argument);
  // halving epsilon roughly quadruples the count
  const double ratio = static_cast<double>(required_samples_single(0.01, 0.01)) / required_samples_single(0.02, 0.01);
  CHECK(ratio == doctest::Approx(4 * 0.98 / 0.96).epsilon(0.01));
}

TEST_CASE("binomial tails against the direct pmf sum") {
  CHECK(binomial_upper_tail(100, 0.4, 50) == doctest::Approx(0.0167617).epsilon(1e-5));
  CHECK(binomial_upper_tail(100, 0.4, 40) == doctest::Approx(0.4567).epsilon(1e-3));
  for (std::int64_t m : {1, 7, 64, 65, 300, 2000})
    for (double p : {0.05, 0.3, 0.4, 0.5})
      for (double frac : {0.0, 0.25, 0.5, 0.75}) {
        const double x = frac * static_cast<double>(m);
        CHECK(binomial_upper_tail(m, p, x) ==
              doctest::Approx(static_cast<double>(oracle_upper_tail(m, p, x))).epsilon(1e-9));
      }
  CHECK(decode_success_probability(65, 0.1) == doctest::Approx(0.9489999).epsilon(1e-6));
  CHECK(decode_success_probability(64, 0.1) == doctest::Approx(0.9463094).epsilon(1e-6));
  for (std::int64_t m : {1, 2, 10, 65, 500})
    CHECK(decode_success_probability(m, 0.05) ==
          doctest::Approx(static_cast<double>(oracle_decode_success(m, 0.05L))).epsilon(1e-9));
}

TEST_CASE("sample_dataset") {
  SUBCASE("near-deterministic coin") {
    Rng rng(1);
    const Dataset d = sample_dataset(HiddenIndex{0}, 0.4999999999, 1000, rng);
    CHECK(d.cast<int>().sum() == 1000);
  }
  SUBCASE("fraction of ones under q_1") {
    Rng rng(2);
    const Dataset d = sample_dataset(HiddenIndex{1}, 0.1, 1000000, rng);
    CHECK(std::abs(d.cast<double>().mean() - 0.4) < 0.002);
  }
  SUBCASE("column sums follow the binomial law (chi-square, 5%)") {
    const std::int64_t m = 20, draws = 20000;
    Rng rng(3);
    std::vector<double> observed(m + 1, 0.0);
    for (std::int64_t r = 0; r < draws; ++r) {
      const Dataset d = sample_dataset(HiddenIndex{1}, 0.1, m, rng);
      observed[static_cast<std::size_t>(d.cast<int>().sum())] += 1;
    }
    const auto pmf = oracle::binomial_pmf(m, 0.4L);
    // pool bins until each expected count is at least 5
    double chi2 = 0, obs_bin = 0, exp_bin = 0;
    int bins = 0;
    for (std::int64_t j = 0; j <= m; ++j) {
      obs_bin += observed[static_cast<std::size_t>(j)];
      exp_bin += static_cast<double>(pmf[static_cast<std::size_t>(j)]) * draws;
      if (exp_bin >= 5 && j < m) {
        chi2 += (obs_bin - exp_bin) * (obs_bin - exp_bin) / exp_bin;
        ++bins;
        obs_bin = exp_bin = 0;
      }
    }
    chi2 += (obs_bin - exp_bin) * (obs_bin - exp_bin) / exp_bin;
    ++bins;
    const double df = bins - 1;
    const double critical = df * std::pow(1 - 2 / (9 * df) + 1.6448536 * std::sqrt(2 / (9 * df)), 3);
    CHECK(chi2 < critical);
  }
  SUBCASE("errors and replay") {
    Rng rng(4);
    CHECK_THROWS_AS(sample_dataset(HiddenIndex{0}, 0.5, 10, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_dataset(HiddenIndex{0}, 0.0, 10, rng), std::invalid_argument);
    Rng a(5), b(5);
    CHECK(sample_dataset(HiddenIndex{0, 1, 1}, 0.2, 50, a) == sample_dataset(HiddenIndex{0, 1, 1}, 0.2, 50, b));
  }
}

TEST_CASE("majority_decode") {
  Rng rng(6);
  Dataset d(100, 1);
  for (int i = 0; i < 100; ++i) d(i, 0) = i < 30 ? 0 : 1;
  CHECK(majority_decode(d, rng)[0] == 0);
  for (int i = 0; i < 100; ++i) d(i, 0) = i < 70 ? 0 : 1;
  CHECK(majority_decode(d, rng)[0] == 1);

  Dataset tie(4, 1);
  tie << 0, 1, 0, 1;
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += majority_decode(tie, rng)[0];
  CHECK(std::abs(ones / 1e4 - 0.5) < 0.02);

  // m = 65 per-coordinate success against the exact tail
  const std::int64_t trials = 20000;
  const JointDecodeStats stats = simulate_decoding(5, 0.1, 65, trials, rng);
  CHECK(std::abs(stats.coordinate_rate(5) - 0.9489999) < 0.005);
}

TEST_CASE("anticoncentration_check") {
  Rng rng(7);
  const auto r = anticoncentration_check(0.1, 100, 10, 100000, rng);
  CHECK(r.rhs == doctest::Approx(0.25 * std::exp(-5.0)).epsilon(1e-12));
  CHECK(r.pass);
  CHECK(std::abs(r.empirical_lhs - 0.0167617) < 3 * r.standard_error + 1e-12);

  const auto at_zero = anticoncentration_check(0.1, 100, 0, 20000, rng);
  CHECK(at_zero.rhs == doctest::Approx(0.25));
  CHECK(at_zero.pass);

  double previous = 1.0;
  for (double t = 0; t <= 20; t += 2) {
    const double rhs = anticoncentration_check(0.1, 100, t, 10, rng).rhs;
    CHECK(rhs < previous);
    previous = rhs;
  }
  CHECK_THROWS_AS(anticoncentration_check(0.1, 100, 21, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(anticoncentration_check(0.1, 100, -1, 10, rng), std::invalid_argument);
}

TEST_CASE("joint success factorizes") {
  Rng rng(8);
  const int n = 4;
  const JointDecodeStats stats = simulate_decoding(n, 0.1, 40, 20000, rng);
  const FactorizationCheck f = factorization_check(stats, n);
  CHECK(f.pass);
  CHECK(std::abs(f.joint - f.predicted) < 0.02);
  CHECK(f.predicted == doctest::Approx(std::pow(f.per_coordinate, n)));
}

TEST_CASE("scaling_experiment on a small grid") {
  const std::vector<int> ns = {1, 4};
  Rng a(9), b(9);
  const auto rows = scaling_experiment(ns, 0.2, 0.2, 2000, a);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].m_star <= rows[1].m_star);
  CHECK(rows[0].success_rate >= 0.8);
  const auto again = scaling_experiment(ns, 0.2, 0.2, 2000, b);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].m_star == rows[i].m_star);
}
