#include "ptomo/estimator.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace ptomo {

namespace {

void check_target(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon <= 2.0))
    throw std::invalid_argument("epsilon must lie in (0, 2], got " + std::to_string(epsilon));
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta must lie in (0, 1), got " + std::to_string(delta));
}

}  // namespace

std::int64_t shots_per_basis(int n, double epsilon, double delta) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("shots_per_basis: n out of range");
  check_target(epsilon, delta);
  const double m = 16.0 * std::pow(10.0, n) * std::log(1.0 / delta) /
                   (std::pow(3.0, n) * epsilon * epsilon);
  if (m > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2))
    throw std::invalid_argument("shots_per_basis: budget overflows");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(m)));
}

TomographyPlan TomographyPlan::for_target(int n, double epsilon, double delta) {
  return TomographyPlan{n, epsilon, delta, shots_per_basis(n, epsilon, delta)};
}

void TomographyPlan::validate() const {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("plan: n out of range");
  check_target(epsilon, delta);
  if (m < 1) throw std::invalid_argument("plan: shots per basis must be >= 1");
}

FullTomographyResult run_full_tomography(const OutcomeSampler& sampler, const TomographyPlan& plan, Rng& rng,
                                         const FullTomographyOptions& options) {
  plan.validate();
  if (plan.n != sampler.qubits())
    throw std::invalid_argument("run_full_tomography: plan has " + std::to_string(plan.n) +
                                " qubits, state has " + std::to_string(sampler.qubits()));
  FullTomographyResult result{.sigma = {}, .accumulator = PauliAccumulator(plan.n)};
  if (options.keep_shots) result.shots.reserve(static_cast<std::size_t>(plan.total_shots()));

  for (std::uint64_t b = 0; b < basis_count(plan.n); ++b) {
    const MeasurementBasis basis = MeasurementBasis::from_index(b, plan.n);
    for (std::int64_t i = 0; i < plan.m; ++i) {
      const Shot shot = sampler.sample(basis, rng);
      result.accumulator.accumulate(shot);
      if (options.keep_shots) result.shots.push_back(shot);
    }
  }
  result.total_shots = plan.total_shots();
  result.sigma = reconstruct(result.accumulator);

  const ComplexMatrix& rho = sampler.state().matrix();
  result.trace_error = one_norm_distance(rho, result.sigma);
  result.frobenius_error = frobenius_norm(rho - result.sigma);
  if (options.project_to_physical) result.physical = project_to_physical(result.sigma);
  return result;
}

FullTomographyResult run_full_tomography(const DensityMatrix& rho, const TomographyPlan& plan, Rng& rng,
                                         const FullTomographyOptions& options) {
  const OutcomeSampler sampler(rho);
  return run_full_tomography(sampler, plan, rng, options);
}

ComplexMatrix reconstruct_from_shots(std::span<const Shot> shots, int n) {
  PauliAccumulator acc(n);
  for (const Shot& s : shots) acc.accumulate(s);
  return reconstruct(acc);
}

DensityMatrix project_to_physical(ConstMatrixRef sigma) {
  if (!is_hermitian(sigma)) throw std::invalid_argument("project_to_physical: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sigma);
  if (solver.info() != Eigen::Success) throw std::runtime_error("project_to_physical: eigensolver failed");
  RealVector lambda = solver.eigenvalues().cwiseMax(0.0);
  const double total = lambda.sum();
  if (!(total > 0.0)) throw std::invalid_argument("project_to_physical: no positive spectrum to keep");
  lambda /= total;
  const Eigen::MatrixXcd& v = solver.eigenvectors();
  ComplexMatrix out = v * lambda.cast<Complex>().asDiagonal() * v.adjoint();
  ComplexMatrix herm = (out + out.adjoint()) / 2.0;
  return DensityMatrix(std::move(herm));
}

}  // namespace ptomo
