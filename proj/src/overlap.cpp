#include "ptomo/overlap.hpp"

#include "ptomo/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ptomo {

namespace {

void check_plan_ranges(int n, int k, double epsilon, double delta) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("overlap: n out of range");
  if (k < 1 || k > n) throw std::invalid_argument("overlap: k must satisfy 1 <= k <= n");
  if (!(epsilon > 0.0 && epsilon <= 2.0)) throw std::invalid_argument("overlap: epsilon must lie in (0, 2]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("overlap: delta must lie in (0, 1)");
}

MeasurementBasis first_compatible_basis(const PauliString& q) {
  PauliString b = q;
  for (int i = 0; i < b.size(); ++i)
    if (b[i] == Pauli::I) b.set(i, Pauli::X);
  return MeasurementBasis(b);
}

}  // namespace

std::uint64_t binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return c;
}

std::int64_t total_shots(int n, int k, double epsilon, double delta, std::optional<std::int64_t> subset_count) {
  check_plan_ranges(n, k, epsilon, delta);
  double branches = static_cast<double>(binomial_coefficient(n, k));
  if (subset_count) {
    if (*subset_count < 1) throw std::invalid_argument("overlap: subset count must be >= 1");
    branches = static_cast<double>(*subset_count);
  }
  const double t = 32.0 * std::pow(10.0, k) * std::log(2.0 * branches / delta) / (epsilon * epsilon);
  if (t > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2))
    throw std::invalid_argument("overlap: shot budget overflows");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(t)));
}

OverlapPlan OverlapPlan::all_subsets(int n, int k, double epsilon, double delta) {
  OverlapPlan plan;
  plan.n = n;
  plan.k = k;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.total_shots = ptomo::total_shots(n, k, epsilon, delta);
  plan.validate();
  return plan;
}

OverlapPlan OverlapPlan::partial(int n, int k, double epsilon, double delta, std::vector<Subset> subsets) {
  if (subsets.empty()) throw std::invalid_argument("overlap: partial mode needs at least one subset");
  OverlapPlan plan;
  plan.n = n;
  plan.k = k;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.total_shots = ptomo::total_shots(n, k, epsilon, delta, static_cast<std::int64_t>(subsets.size()));
  plan.subsets = std::move(subsets);
  plan.validate();
  return plan;
}

std::vector<Subset> OverlapPlan::targets() const {
  return subsets.empty() ? subsets_of_size(n, k) : subsets;
}

void OverlapPlan::validate() const {
  check_plan_ranges(n, k, epsilon, delta);
  if (total_shots < 1) throw std::invalid_argument("overlap: total shots must be >= 1");
  for (const Subset& s : subsets) {
    if (s.size() < 1 || s.size() > k) throw std::invalid_argument("overlap: subset " + s.str() + " size outside [1, k]");
    if (s.indices().back() >= n) throw std::invalid_argument("overlap: subset " + s.str() + " exceeds register");
  }
}

CoverageError::CoverageError(const Subset& subset, const MeasurementBasis& missing)
    : std::runtime_error("insufficient coverage on subset " + subset.str() + ": no shots in restricted basis " +
                         missing.str()),
      subset_(subset),
      missing_(missing) {}

RestrictedStatistics restricted_statistics(std::span<const Shot> shots, const Subset& s) {
  if (s.size() < 1) throw std::invalid_argument("restricted_statistics: empty subset");
  RestrictedStatistics stats{s, std::vector<RealVector>(basis_count(s.size()),
                                                        RealVector::Zero(Eigen::Index{1} << s.size()))};
  for (const Shot& shot : shots) {
    if (s.indices().back() >= shot.size()) throw std::invalid_argument("restricted_statistics: subset exceeds shot");
    const Shot r = shot.restrict_to(s);
    stats.outcome_weights[r.basis.index()](r.outcome) += 1.0;
  }
  return stats;
}

RestrictedStatistics exact_restricted_statistics(const DensityMatrix& rho, const Subset& s, double shots_per_basis) {
  const int n = rho.qubits();
  RestrictedStatistics stats{s, std::vector<RealVector>(basis_count(s.size()),
                                                        RealVector::Zero(Eigen::Index{1} << s.size()))};
  for (std::uint64_t b = 0; b < basis_count(n); ++b) {
    const MeasurementBasis basis = MeasurementBasis::from_index(b, n);
    const RealVector marginal = marginalize(outcome_distribution(rho, basis), n, s);
    stats.outcome_weights[basis.restrict_to(s).index()] += shots_per_basis * marginal;
  }
  return stats;
}

SubsetEstimate estimate_from_statistics(const RestrictedStatistics& stats) {
  const int k = stats.subset.size();
  ExactPauliAccumulator acc(k);
  SubsetEstimate est;
  est.subset = stats.subset;
  est.per_basis_counts.resize(stats.outcome_weights.size());
  for (std::uint64_t b = 0; b < stats.outcome_weights.size(); ++b) {
    const RealVector& w = stats.outcome_weights[b];
    est.per_basis_counts[b] = std::llround(w.sum());
    const MeasurementBasis basis = MeasurementBasis::from_index(b, k);
    for (Eigen::Index o = 0; o < w.size(); ++o)
      if (w(o) != 0.0) acc.accumulate(Shot(basis, static_cast<std::uint32_t>(o)), w(o));
  }
  const auto counts = acc.count_values();
  for (std::uint64_t q = 0; q < counts.size(); ++q)
    if (counts[q] == 0.0) throw CoverageError(stats.subset, first_compatible_basis(PauliString::from_index(q, k)));
  est.sigma = reconstruct(acc);
  return est;
}

SubsetEstimate reconstruct_subset(std::span<const Shot> shots, const Subset& s) {
  if (shots.empty()) throw std::invalid_argument("reconstruct_subset: no shots");
  return estimate_from_statistics(restricted_statistics(shots, s));
}

std::vector<Shot> draw_random_shots(const OutcomeSampler& sampler, std::int64_t count, Rng& rng) {
  if (count < 0) throw std::invalid_argument("draw_random_shots: negative count");
  std::vector<Shot> shots;
  shots.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const MeasurementBasis basis = random_basis(sampler.qubits(), rng);
    shots.push_back(sampler.sample(basis, rng));
  }
  return shots;
}

OverlapResult run_overlap(const OutcomeSampler& sampler, const OverlapPlan& plan, Rng& rng,
                          const OverlapOptions& options) {
  plan.validate();
  if (plan.n != sampler.qubits())
    throw std::invalid_argument("run_overlap: plan has " + std::to_string(plan.n) + " qubits, state has " +
                                std::to_string(sampler.qubits()));
  OverlapResult result;
  std::vector<Shot> shots = draw_random_shots(sampler, plan.total_shots, rng);

  const DensityMatrix& rho = sampler.state();
  result.all_within_epsilon = true;
  const auto score = [&](SubsetEstimate& est) {
    const ComplexMatrix exact = partial_trace(rho.matrix(), plan.n, est.subset);
    est.trace_error = one_norm_distance(exact, est.sigma);
    result.max_trace_error = std::max(result.max_trace_error, *est.trace_error);
    if (!(*est.trace_error < plan.epsilon)) result.all_within_epsilon = false;
  };

  for (const Subset& s : plan.targets()) {
    SubsetEstimate est = reconstruct_subset(shots, s);
    score(est);
    result.estimates.push_back(std::move(est));
  }

  if (plan.include_smaller) {
    for (int size = 1; size < plan.k; ++size) {
      for (const Subset& small : subsets_of_size(plan.n, size)) {
        const auto parent = std::find_if(result.estimates.begin(), result.estimates.end(), [&](const SubsetEstimate& e) {
          return std::includes(e.subset.indices().begin(), e.subset.indices().end(), small.indices().begin(),
                               small.indices().end());
        });
        if (parent == result.estimates.end()) continue;
        std::vector<int> local;
        for (int q : small.indices())
          local.push_back(static_cast<int>(std::find(parent->subset.indices().begin(), parent->subset.indices().end(), q) -
                                           parent->subset.indices().begin()));
        SubsetEstimate derived;
        derived.subset = small;
        derived.sigma = partial_trace(parent->sigma, parent->subset.size(), Subset(local, parent->subset.size()));
        score(derived);
        result.derived.push_back(std::move(derived));
      }
    }
  }

  if (options.keep_shots) result.shots = std::move(shots);
  return result;
}

OverlapResult run_overlap(const DensityMatrix& rho, const OverlapPlan& plan, Rng& rng, const OverlapOptions& options) {
  const OutcomeSampler sampler(rho);
  return run_overlap(sampler, plan, rng, options);
}

CoverageReport coverage_check(std::span<const Shot> shots, const Subset& s, std::int64_t m_required) {
  CoverageReport report;
  report.counts.assign(basis_count(s.size()), 0);
  for (const Shot& shot : shots) ++report.counts[shot.basis.restrict_to(s).index()];
  report.min_count = *std::min_element(report.counts.begin(), report.counts.end());
  report.ok = report.min_count >= m_required;
  report.bound = static_cast<double>(basis_count(s.size())) * std::pow(2.0 / std::exp(1.0), static_cast<double>(m_required));
  return report;
}

}  // namespace ptomo
