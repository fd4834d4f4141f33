#ifndef PTOMO_OVERLAP_HPP
#define PTOMO_OVERLAP_HPP

#include "ptomo/measurement.hpp"
#include "ptomo/qstate.hpp"
#include "ptomo/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ptomo {

std::uint64_t binomial_coefficient(int n, int k);

/// T = ceil(32 * 10^k * ln(2B/delta) / epsilon^2) where B = C(n, k), or B =
/// subset_count when only selected subsets are wanted.
std::int64_t total_shots(int n, int k, double epsilon, double delta,
                         std::optional<std::int64_t> subset_count = std::nullopt);

struct OverlapPlan {
  int n = 1;
  int k = 1;
  double epsilon = 0.1;
  double delta = 0.1;
  std::int64_t total_shots = 1;
  /// Empty: every size-k subset. Otherwise the requested subsets only.
  std::vector<Subset> subsets;
  /// Also report every smaller marginal, derived by partial trace.
  bool include_smaller = false;

  static OverlapPlan all_subsets(int n, int k, double epsilon, double delta);
  static OverlapPlan partial(int n, int k, double epsilon, double delta, std::vector<Subset> subsets);

  std::vector<Subset> targets() const;
  void validate() const;
};

struct SubsetEstimate {
  Subset subset;
  ComplexMatrix sigma;
  /// Shots per restricted basis, indexed by MeasurementBasis::index() on the subset.
  std::vector<std::int64_t> per_basis_counts;
  std::optional<double> trace_error;
};

/// Thrown when some Pauli word on the subset has no compatible shot.
class CoverageError : public std::runtime_error {
 public:
  CoverageError(const Subset& subset, const MeasurementBasis& missing);
  const Subset& subset() const { return subset_; }
  const MeasurementBasis& missing() const { return missing_; }

 private:
  Subset subset_;
  MeasurementBasis missing_;
};

/// Outcome weights per restricted basis on a subset: 3^k vectors of 2^k.
struct RestrictedStatistics {
  Subset subset;
  std::vector<RealVector> outcome_weights;
};

RestrictedStatistics restricted_statistics(std::span<const Shot> shots, const Subset& s);

/// Statistics that uniformly random bases would produce in expectation:
/// each full basis contributes its exact outcome distribution, scaled by
/// `shots_per_basis`, then restricted to `s`.
RestrictedStatistics exact_restricted_statistics(const DensityMatrix& rho, const Subset& s,
                                                 double shots_per_basis = 1.0);

/// Pooled estimator: est(Q) is the sign sum over all compatible restricted
/// shots divided by their number; sigma_S = sum_Q est(Q) Q / 2^k.
SubsetEstimate estimate_from_statistics(const RestrictedStatistics& stats);

SubsetEstimate reconstruct_subset(std::span<const Shot> shots, const Subset& s);

/// T shots, each in an independent uniformly random product basis.
std::vector<Shot> draw_random_shots(const OutcomeSampler& sampler, std::int64_t count, Rng& rng);

struct OverlapOptions {
  bool keep_shots = false;
};

struct OverlapResult {
  std::vector<SubsetEstimate> estimates;
  /// Smaller marginals, present when the plan asks for them.
  std::vector<SubsetEstimate> derived;
  std::vector<Shot> shots;
  double max_trace_error = 0.0;
  bool all_within_epsilon = false;
};

OverlapResult run_overlap(const OutcomeSampler& sampler, const OverlapPlan& plan, Rng& rng,
                          const OverlapOptions& options = {});
OverlapResult run_overlap(const DensityMatrix& rho, const OverlapPlan& plan, Rng& rng,
                          const OverlapOptions& options = {});

struct CoverageReport {
  bool ok = false;
  std::int64_t min_count = 0;
  /// 3^k * (2/e)^m_required.
  double bound = 0.0;
  std::vector<std::int64_t> counts;
};

/// Counts restricted-basis occurrences on `s`; ok iff every one of the 3^k
/// bases was seen at least m_required times.
CoverageReport coverage_check(std::span<const Shot> shots, const Subset& s, std::int64_t m_required);

}  // namespace ptomo

#endif  // PTOMO_OVERLAP_HPP
