#ifndef PTOMO_MEASUREMENT_HPP
#define PTOMO_MEASUREMENT_HPP

#include "ptomo/qstate.hpp"
#include "ptomo/rng.hpp"

#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ptomo {

/// Product Pauli basis: one of X, Y, Z on every qubit.
class MeasurementBasis {
 public:
  MeasurementBasis() = default;
  explicit MeasurementBasis(std::string_view letters);
  explicit MeasurementBasis(const PauliString& letters);

  /// Lexicographic enumeration of {X,Y,Z}^n: base-3 digits X=0, Y=1, Z=2,
  /// qubit 0 most significant.
  static MeasurementBasis from_index(std::uint64_t index, int n);
  std::uint64_t index() const;

  int size() const { return letters_.size(); }
  Pauli operator[](int i) const { return letters_[i]; }
  const PauliString& letters() const { return letters_; }
  std::string str() const { return letters_.str(); }

  MeasurementBasis restrict_to(const Subset& s) const;

  friend bool operator==(const MeasurementBasis&, const MeasurementBasis&) = default;

 private:
  PauliString letters_;
};

/// 3^n.
std::uint64_t basis_count(int n);

/// Outcome bits of an n-qubit measurement: bit (n-1-i) belongs to qubit i,
/// and a 0 bit is the +1 eigenvalue.
std::string outcome_string(std::uint32_t outcome, int n);
std::uint32_t parse_outcome(std::string_view bits);
std::uint32_t restrict_outcome(std::uint32_t outcome, int n, const Subset& s);

struct Shot {
  MeasurementBasis basis;
  std::uint32_t outcome = 0;

  Shot() = default;
  Shot(MeasurementBasis b, std::uint32_t o);

  int size() const { return basis.size(); }
  Shot restrict_to(const Subset& s) const;

  friend bool operator==(const Shot&, const Shot&) = default;
};

/// p(s) = tr(rho * prod_i (I + (-1)^{s_i} sigma_{basis_i}) / 2), tiny negative
/// rounding clipped to zero.
RealVector outcome_distribution(ConstMatrixRef rho, const MeasurementBasis& basis);
RealVector outcome_distribution(const DensityMatrix& rho, const MeasurementBasis& basis);

/// Sums a 2^n outcome distribution down to the bits of `s`.
RealVector marginalize(const RealVector& probs, int n, const Subset& s);

/// Inverse-CDF draw from a probability vector.
std::uint32_t sample_index(const RealVector& cdf, Rng& rng);
RealVector cumulative(const RealVector& probs);

Shot sample_shot(const DensityMatrix& rho, const MeasurementBasis& basis, Rng& rng);

/// Outcome sampler with per-basis distributions computed on first use.
/// Safe to share across threads; each caller brings its own Rng.
class OutcomeSampler {
 public:
  explicit OutcomeSampler(DensityMatrix rho);

  const DensityMatrix& state() const { return rho_; }
  int qubits() const { return rho_.qubits(); }

  const RealVector& distribution(const MeasurementBasis& basis) const;
  Shot sample(const MeasurementBasis& basis, Rng& rng) const;

 private:
  struct Entry {
    std::once_flag once;
    RealVector probs;
    RealVector cdf;
  };
  const Entry& entry(const MeasurementBasis& basis) const;

  DensityMatrix rho_;
  std::unique_ptr<Entry[]> cache_;
};

/// True iff every non-identity letter of q equals the basis letter.
bool is_compatible(const PauliString& q, const MeasurementBasis& basis);

/// Product of (-1)^{s_i} over the support of q. Throws if q is incompatible.
int shot_sign(const PauliString& q, const Shot& shot);

/// Independent uniform letter from {X,Y,Z} on every qubit.
MeasurementBasis random_basis(int n, Rng& rng);

struct SingleQubitPOVM {
  std::vector<Eigen::Matrix2cd> elements;

  /// Throws unless elements are PSD (within 1e-12) and sum to identity
  /// (within 1e-12).
  void validate() const;
};

/// The six-outcome POVM {(I+X)/6, (I-X)/6, (I+Y)/6, (I-Y)/6, (I+Z)/6, (I-Z)/6}.
SingleQubitPOVM ic_povm();

/// Outcome probabilities of applying `povm` to every qubit; outcome index is
/// base-|povm| with qubit 0 most significant.
RealVector product_povm_distribution(const DensityMatrix& rho, const SingleQubitPOVM& povm);

/// Inverts exact product-ic_povm statistics into tr(rho P) for every Pauli
/// word (indexed by PauliString::index()).
RealVector pauli_expectations_from_ic_povm(const RealVector& probs, int n);

/// Shot stream text format: one `<basis letters>\t<outcome bits>` line per shot.
void write_shot_stream(std::ostream& os, std::span<const Shot> shots);
std::vector<Shot> read_shot_stream(std::istream& is);

}  // namespace ptomo

#endif  // PTOMO_MEASUREMENT_HPP
