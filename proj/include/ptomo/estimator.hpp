#ifndef PTOMO_ESTIMATOR_HPP
#define PTOMO_ESTIMATOR_HPP

#include "ptomo/measurement.hpp"
#include "ptomo/qstate.hpp"
#include "ptomo/rng.hpp"

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace ptomo {

/// Running sign-sums mu(Q) and compatible-shot counts for every Pauli word Q
/// on n qubits, indexed by PauliString::index().
///
/// A shot in basis B is a +/-1 sample of every Q obtained from B by replacing
/// letters with I, so one shot updates 2^n entries. With an integral Count
/// this is the sampled estimator; with a floating Count it can be fed exact
/// outcome probabilities as fractional shots.
template <typename Count>
class BasicPauliAccumulator {
  static_assert(std::is_arithmetic_v<Count>);

 public:
  explicit BasicPauliAccumulator(int n)
      : n_(n), mu_(checked_size(n), Count{0}), count_(checked_size(n), Count{0}) {}

  int qubits() const { return n_; }

  void accumulate(const Shot& shot, Count weight = Count{1}) {
    if (shot.size() != n_) throw std::invalid_argument("accumulate: shot length does not match accumulator");
    // Walk the 2^n compatible words in Gray-code order so each step toggles
    // one position between I and the basis letter.
    std::uint64_t index = 0;
    bool negative = false;
    add(index, negative, weight);
    const std::uint64_t total = std::uint64_t{1} << n_;
    for (std::uint64_t step = 1; step < total; ++step) {
      const int bit = std::countr_zero(step);  // toggled bit, position n-1-bit
      const int position = n_ - 1 - bit;
      const std::uint64_t digit = static_cast<std::uint64_t>(shot.basis[position]) << (2 * bit);
      const std::uint64_t gray = step ^ (step >> 1);
      index = (gray >> bit) & 1U ? index + digit : index - digit;
      if ((shot.outcome >> bit) & 1U) negative = !negative;
      add(index, negative, weight);
    }
  }

  /// Adds a whole outcome distribution for one basis, `weight` shots in total.
  void accumulate_distribution(const MeasurementBasis& basis, const RealVector& probs, Count weight) {
    static_assert(std::is_floating_point_v<Count>, "fractional shots need a floating Count");
    for (Eigen::Index s = 0; s < probs.size(); ++s)
      if (probs(s) != 0.0) accumulate(Shot(basis, static_cast<std::uint32_t>(s)), weight * probs(s));
  }

  /// Componentwise sum; associative and commutative.
  void merge(const BasicPauliAccumulator& other) {
    if (other.n_ != n_) throw std::invalid_argument("merge: accumulator sizes differ");
    for (std::size_t i = 0; i < mu_.size(); ++i) {
      mu_[i] += other.mu_[i];
      count_[i] += other.count_[i];
    }
  }

  Count mu(const PauliString& q) const { return mu_.at(checked_index(q)); }
  Count count(const PauliString& q) const { return count_.at(checked_index(q)); }
  std::span<const Count> mu_values() const { return mu_; }
  std::span<const Count> count_values() const { return count_; }

  /// mu(Q) / count(Q) for every Q. Throws if any count is zero.
  RealVector estimates() const {
    RealVector est(static_cast<Eigen::Index>(mu_.size()));
    for (std::size_t i = 0; i < mu_.size(); ++i) {
      if (count_[i] == Count{0})
        throw std::domain_error("reconstruct: no compatible shots for " +
                                PauliString::from_index(i, n_).str());
      est(static_cast<Eigen::Index>(i)) = static_cast<double>(mu_[i]) / static_cast<double>(count_[i]);
    }
    return est;
  }

  friend bool operator==(const BasicPauliAccumulator&, const BasicPauliAccumulator&) = default;

 private:
  static std::size_t checked_size(int n) {
    if (n < 1 || n > kMaxQubits) throw std::invalid_argument("accumulator qubit count out of range");
    return static_cast<std::size_t>(pauli_count(n));
  }

  std::size_t checked_index(const PauliString& q) const {
    if (q.size() != n_) throw std::invalid_argument("Pauli length does not match accumulator");
    return static_cast<std::size_t>(q.index());
  }

  void add(std::uint64_t index, bool negative, Count weight) {
    mu_[index] += negative ? -weight : weight;
    count_[index] += weight;
  }

  int n_;
  std::vector<Count> mu_;
  std::vector<Count> count_;
};

using PauliAccumulator = BasicPauliAccumulator<std::int64_t>;
using ExactPauliAccumulator = BasicPauliAccumulator<double>;

/// m = ceil(16 * 10^n * ln(1/delta) / (3^n * epsilon^2)), at least 1.
/// Throws unless 0 < epsilon <= 2 and 0 < delta < 1.
std::int64_t shots_per_basis(int n, double epsilon, double delta);

struct TomographyPlan {
  int n = 1;
  double epsilon = 0.1;
  double delta = 0.1;
  std::int64_t m = 1;  // shots per basis

  /// Plan with m taken from shots_per_basis.
  static TomographyPlan for_target(int n, double epsilon, double delta);

  std::int64_t total_shots() const { return m * static_cast<std::int64_t>(basis_count(n)); }
  void validate() const;
};

/// sigma = sum_Q mu(Q)/count(Q) * Q / 2^n. Hermitian with unit trace but not
/// necessarily PSD.
template <typename Count>
ComplexMatrix reconstruct(const BasicPauliAccumulator<Count>& acc) {
  return from_pauli_coefficients(acc.estimates(), acc.qubits());
}

struct FullTomographyOptions {
  bool keep_shots = false;
  bool project_to_physical = false;
};

struct FullTomographyResult {
  ComplexMatrix sigma;
  PauliAccumulator accumulator;
  double trace_error = 0.0;      // one_norm_distance(rho, sigma)
  double frobenius_error = 0.0;  // ||rho - sigma||_2
  std::int64_t total_shots = 0;
  std::vector<Shot> shots;                 // when keep_shots
  std::optional<DensityMatrix> physical;   // when project_to_physical
};

/// Measures every basis of {X,Y,Z}^n in lexicographic order, plan.m shots each.
FullTomographyResult run_full_tomography(const OutcomeSampler& sampler, const TomographyPlan& plan, Rng& rng,
                                         const FullTomographyOptions& options = {});
FullTomographyResult run_full_tomography(const DensityMatrix& rho, const TomographyPlan& plan, Rng& rng,
                                         const FullTomographyOptions& options = {});

/// Estimate from a recorded shot stream.
ComplexMatrix reconstruct_from_shots(std::span<const Shot> shots, int n);

/// Clips negative eigenvalues of a Hermitian sigma and renormalizes the trace.
DensityMatrix project_to_physical(ConstMatrixRef sigma);

}  // namespace ptomo

#endif  // PTOMO_ESTIMATOR_HPP
