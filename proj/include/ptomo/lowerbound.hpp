#ifndef PTOMO_LOWERBOUND_HPP
#define PTOMO_LOWERBOUND_HPP

#include "ptomo/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace ptomo {

/// q_0 = (1/2 - eps, 1/2 + eps) and q_1 = (1/2 + eps, 1/2 - eps) over the
/// symbols {0, 1}.
struct BiasedCoinPair {
  double epsilon;

  explicit BiasedCoinPair(double eps);
  /// Probability that q_index emits symbol 1.
  double probability_of_one(int index) const { return index == 0 ? 0.5 + epsilon : 0.5 - epsilon; }
};

using HiddenIndex = std::vector<std::uint8_t>;
/// m x n bit matrix; row r is one draw of the product distribution.
using Dataset = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

HiddenIndex random_hidden_index(int n, Rng& rng);

/// Column j holds m i.i.d. draws from q_{z_j}. Requires 0 < epsilon < 1/2.
Dataset sample_dataset(const HiddenIndex& z, double epsilon, std::int64_t m, Rng& rng);

/// Per column, the symbol that appears strictly less often; exact ties are
/// broken by a fair coin from `rng`.
std::vector<std::uint8_t> majority_decode(const Dataset& d, Rng& rng);

/// P(X > x) for X ~ Binomial(m, p), summed in the log domain.
double binomial_upper_tail(std::int64_t m, double p, double x);

/// Exact per-coordinate success of majority_decode with m samples.
double decode_success_probability(std::int64_t m, double epsilon);

struct AnticoncentrationResult {
  double empirical_lhs = 0.0;
  double rhs = 0.0;
  double standard_error = 0.0;
  bool pass = false;
};

/// Frequency that a Binomial(m, 1/2 - eps) draw exceeds t + m(1/2 - eps),
/// against (1/4) exp(-2 t^2 / (m (1/2 - eps))). Requires 0 <= t <= 2 m eps.
AnticoncentrationResult anticoncentration_check(double epsilon, std::int64_t m, double t, std::int64_t trials,
                                                Rng& rng);

/// ceil((1 - 2 eps) / (4 eps^2) * ln(1 / (4 delta'))), at least 1.
std::int64_t required_samples_single(double epsilon, double delta_prime);

struct JointDecodeStats {
  std::int64_t trials = 0;
  std::int64_t joint_successes = 0;        // all n coordinates right
  std::int64_t coordinate_successes = 0;   // out of trials * n
  double joint_rate() const;
  double coordinate_rate(int n) const;
};

/// `trials` independent rounds of: draw z, sample m rows, decode, compare.
JointDecodeStats simulate_decoding(int n, double epsilon, std::int64_t m, std::int64_t trials, Rng& rng);

struct FactorizationCheck {
  double joint = 0.0;
  double per_coordinate = 0.0;
  double predicted = 0.0;  // per_coordinate^n
  double pooled_standard_error = 0.0;
  bool pass = false;
};

/// Compares the joint success rate with the n-th power of the per-coordinate
/// rate; pass iff they agree within 3 pooled standard errors.
FactorizationCheck factorization_check(const JointDecodeStats& stats, int n);

struct ScalingRow {
  int n = 0;
  std::int64_t m_star = 0;
  std::int64_t trials = 0;
  double success_rate = 0.0;
  double standard_error = 0.0;
};

/// For each n, the smallest m whose empirical joint success over `trials`
/// rounds is at least 1 - delta, located by binary search. One base seed is
/// drawn from `rng`; every (n, m) evaluation then uses its own substream, so
/// repeated probes of the same m see the same data.
std::vector<ScalingRow> scaling_experiment(std::span<const int> n_list, double epsilon, double delta,
                                           std::int64_t trials, Rng& rng);

}  // namespace ptomo

#endif  // PTOMO_LOWERBOUND_HPP
