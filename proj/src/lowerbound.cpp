#include "ptomo/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ptomo {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("epsilon must lie in (0, 1/2), got " + std::to_string(epsilon));
}

double log_binomial_pmf(std::int64_t m, std::int64_t j, double log_p, double log_q) {
  const auto md = static_cast<double>(m);
  const auto jd = static_cast<double>(j);
  return std::lgamma(md + 1) - std::lgamma(jd + 1) - std::lgamma(md - jd + 1) + jd * log_p + (md - jd) * log_q;
}

// log(sum_{j in [lo, hi]} pmf(j)), or -inf for an empty range.
double log_binomial_range(std::int64_t m, double p, std::int64_t lo, std::int64_t hi) {
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min(hi, m);
  if (lo > hi) return -std::numeric_limits<double>::infinity();
  const double log_p = std::log(p), log_q = std::log1p(-p);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = lo; j <= hi; ++j) peak = std::max(peak, log_binomial_pmf(m, j, log_p, log_q));
  double sum = 0.0;
  for (std::int64_t j = lo; j <= hi; ++j) sum += std::exp(log_binomial_pmf(m, j, log_p, log_q) - peak);
  return peak + std::log(sum);
}

double standard_error(double p, std::int64_t trials) {
  return trials > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) : 0.0;
}

}  // namespace

BiasedCoinPair::BiasedCoinPair(double eps) : epsilon(eps) { check_epsilon(eps); }

HiddenIndex random_hidden_index(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("hidden index length must be >= 1");
  HiddenIndex z(static_cast<std::size_t>(n));
  for (auto& bit : z) bit = rng.coin() ? 1 : 0;
  return z;
}

Dataset sample_dataset(const HiddenIndex& z, double epsilon, std::int64_t m, Rng& rng) {
  const BiasedCoinPair coins(epsilon);
  if (m < 1) throw std::invalid_argument("sample_dataset: m must be >= 1");
  const auto n = static_cast<Eigen::Index>(z.size());
  Dataset d(m, n);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index j = 0; j < n; ++j) d(r, j) = rng.bernoulli(coins.probability_of_one(z[static_cast<std::size_t>(j)]));
  return d;
}

std::vector<std::uint8_t> majority_decode(const Dataset& d, Rng& rng) {
  std::vector<std::uint8_t> y(static_cast<std::size_t>(d.cols()));
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    const auto ones = d.col(j).cast<std::int64_t>().sum();
    const auto zeros = d.rows() - ones;
    if (zeros == ones) {
      y[static_cast<std::size_t>(j)] = rng.coin() ? 1 : 0;
    } else {
      y[static_cast<std::size_t>(j)] = zeros < ones ? 0 : 1;
    }
  }
  return y;
}

double binomial_upper_tail(std::int64_t m, double p, double x) {
  if (m < 0 || !(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_upper_tail: bad parameters");
  const auto first = static_cast<std::int64_t>(std::floor(x)) + 1;
  if (first <= 0) return 1.0;
  if (first > m) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  return std::exp(log_binomial_range(m, p, first, m));
}

double decode_success_probability(std::int64_t m, double epsilon) {
  check_epsilon(epsilon);
  if (m < 1) throw std::invalid_argument("decode_success_probability: m must be >= 1");
  // Under q_0 the number of zeros is Binomial(m, 1/2 - eps); decoding is right
  // when zeros are the strict minority, and half the time on a tie.
  const double p = 0.5 - epsilon;
  const std::int64_t below = (m % 2 == 0) ? m / 2 - 1 : m / 2;
  double success = std::exp(log_binomial_range(m, p, 0, below));
  if (m % 2 == 0) success += 0.5 * std::exp(log_binomial_range(m, p, m / 2, m / 2));
  return success;
}

AnticoncentrationResult anticoncentration_check(double epsilon, std::int64_t m, double t, std::int64_t trials,
                                                Rng& rng) {
  check_epsilon(epsilon);
  if (m < 1) throw std::invalid_argument("anticoncentration_check: m must be >= 1");
  if (!(t >= 0.0 && t <= 2.0 * static_cast<double>(m) * epsilon))
    throw std::invalid_argument("anticoncentration_check: t must lie in [0, 2 m eps]");
  if (trials < 1) throw std::invalid_argument("anticoncentration_check: trials must be >= 1");

  const double p = 0.5 - epsilon;
  const double threshold = t + static_cast<double>(m) * p;
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < trials; ++i) {
    std::int64_t sum = 0;
    for (std::int64_t j = 0; j < m; ++j) sum += rng.bernoulli(p);
    if (static_cast<double>(sum) > threshold) ++hits;
  }
  AnticoncentrationResult r;
  r.empirical_lhs = static_cast<double>(hits) / static_cast<double>(trials);
  r.rhs = 0.25 * std::exp(-2.0 * t * t / (static_cast<double>(m) * p));
  r.standard_error = standard_error(r.empirical_lhs, trials);
  r.pass = r.empirical_lhs >= r.rhs - 3.0 * r.standard_error;
  return r;
}

std::int64_t required_samples_single(double epsilon, double delta_prime) {
  check_epsilon(epsilon);
  if (!(delta_prime > 0.0 && delta_prime < 0.25))
    throw std::invalid_argument("delta' must lie in (0, 1/4), got " + std::to_string(delta_prime));
  const double m = (1.0 - 2.0 * epsilon) / (4.0 * epsilon * epsilon) * std::log(1.0 / (4.0 * delta_prime));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(m)));
}

double JointDecodeStats::joint_rate() const {
  return trials > 0 ? static_cast<double>(joint_successes) / static_cast<double>(trials)
                    : std::numeric_limits<double>::quiet_NaN();
}

double JointDecodeStats::coordinate_rate(int n) const {
  return trials > 0 ? static_cast<double>(coordinate_successes) / (static_cast<double>(trials) * n)
                    : std::numeric_limits<double>::quiet_NaN();
}

JointDecodeStats simulate_decoding(int n, double epsilon, std::int64_t m, std::int64_t trials, Rng& rng) {
  JointDecodeStats stats;
  stats.trials = trials;
  for (std::int64_t i = 0; i < trials; ++i) {
    const HiddenIndex z = random_hidden_index(n, rng);
    const Dataset d = sample_dataset(z, epsilon, m, rng);
    const auto y = majority_decode(d, rng);
    std::int64_t right = 0;
    for (std::size_t j = 0; j < z.size(); ++j) right += y[j] == z[j];
    stats.coordinate_successes += right;
    stats.joint_successes += right == n;
  }
  return stats;
}

FactorizationCheck factorization_check(const JointDecodeStats& stats, int n) {
  FactorizationCheck c;
  c.joint = stats.joint_rate();
  c.per_coordinate = stats.coordinate_rate(n);
  c.predicted = std::pow(c.per_coordinate, n);
  const double t = static_cast<double>(stats.trials);
  // Delta method for per_coordinate^n, whose estimate pools trials * n draws.
  const double slope = n * std::pow(c.per_coordinate, n - 1);
  c.pooled_standard_error = std::sqrt(c.joint * (1.0 - c.joint) / t +
                                      slope * slope * c.per_coordinate * (1.0 - c.per_coordinate) / (t * n));
  c.pass = std::abs(c.joint - c.predicted) <= 3.0 * c.pooled_standard_error;
  return c;
}

std::vector<ScalingRow> scaling_experiment(std::span<const int> n_list, double epsilon, double delta,
                                           std::int64_t trials, Rng& rng) {
  check_epsilon(epsilon);
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("scaling_experiment: delta must lie in (0, 1)");
  if (trials < 1) throw std::invalid_argument("scaling_experiment: trials must be >= 1");
  const std::uint64_t base = rng.next_u64();
  const double target = 1.0 - delta;

  std::vector<ScalingRow> rows;
  for (int n : n_list) {
    if (n < 1) throw std::invalid_argument("scaling_experiment: n must be >= 1");
    const std::uint64_t n_seed = mix_seed(base ^ static_cast<std::uint64_t>(n));
    const auto evaluate = [&](std::int64_t m) {
      Rng sub = Rng::substream(n_seed, static_cast<std::uint64_t>(m));
      return simulate_decoding(n, epsilon, m, trials, sub).joint_rate();
    };

    constexpr std::int64_t kMaxSamples = std::int64_t{1} << 22;
    std::int64_t hi = 1;
    while (evaluate(hi) < target) {
      if (hi >= kMaxSamples) throw std::runtime_error("scaling_experiment: no m up to 2^22 reaches the target");
      hi *= 2;
    }
    std::int64_t lo = hi / 2;  // fails, or 0 when hi == 1
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      (evaluate(mid) >= target ? hi : lo) = mid;
    }
    const double rate = evaluate(hi);
    rows.push_back(ScalingRow{n, hi, trials, rate, standard_error(rate, trials)});
  }
  return rows;
}

}  // namespace ptomo
