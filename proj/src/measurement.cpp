#include "ptomo/measurement.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ptomo {

namespace {

constexpr double kProbabilityClip = 1e-12;
constexpr double kProbabilitySumTol = 1e-10;

// Rows are the conjugated +1 / -1 eigenvectors of the basis letter.
Eigen::Matrix2cd rotation_for(Pauli p) {
  const double h = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd v;
  switch (p) {
    case Pauli::X:
      v << h, h, h, -h;
      break;
    case Pauli::Y:
      v << h, Complex(0, -h), h, Complex(0, h);
      break;
    case Pauli::Z:
      v.setIdentity();
      break;
    case Pauli::I:
      throw std::invalid_argument("measurement basis cannot contain I");
  }
  return v;
}

void check_basis_letters(const PauliString& letters) {
  for (int i = 0; i < letters.size(); ++i)
    if (letters[i] == Pauli::I)
      throw std::invalid_argument("measurement basis '" + letters.str() + "' contains I");
}

}  // namespace

MeasurementBasis::MeasurementBasis(std::string_view letters) : letters_(letters) {
  check_basis_letters(letters_);
}

MeasurementBasis::MeasurementBasis(const PauliString& letters) : letters_(letters) {
  check_basis_letters(letters_);
}

MeasurementBasis MeasurementBasis::from_index(std::uint64_t index, int n) {
  if (index >= basis_count(n)) throw std::out_of_range("basis index out of range");
  PauliString p = PauliString::identity(n);
  for (int i = n - 1; i >= 0; --i) {
    p.set(i, static_cast<Pauli>(1 + index % 3));
    index /= 3;
  }
  return MeasurementBasis(p);
}

std::uint64_t MeasurementBasis::index() const {
  std::uint64_t idx = 0;
  for (int i = 0; i < size(); ++i) idx = idx * 3 + (static_cast<std::uint64_t>(letters_[i]) - 1);
  return idx;
}

MeasurementBasis MeasurementBasis::restrict_to(const Subset& s) const {
  if (s.size() == 0) throw std::invalid_argument("cannot restrict a basis to an empty subset");
  PauliString p = PauliString::identity(s.size());
  for (int i = 0; i < s.size(); ++i) {
    if (s[i] >= size()) throw std::invalid_argument("subset index beyond basis length");
    p.set(i, letters_[s[i]]);
  }
  return MeasurementBasis(p);
}

std::uint64_t basis_count(int n) {
  std::uint64_t c = 1;
  for (int i = 0; i < n; ++i) c *= 3;
  return c;
}

std::string outcome_string(std::uint32_t outcome, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if ((outcome >> (n - 1 - i)) & 1U) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

std::uint32_t parse_outcome(std::string_view bits) {
  if (bits.empty() || bits.size() > static_cast<std::size_t>(kMaxQubits))
    throw std::invalid_argument("outcome bit string has invalid length");
  std::uint32_t v = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("outcome bits must be 0/1");
    v = (v << 1) | static_cast<std::uint32_t>(c == '1');
  }
  return v;
}

std::uint32_t restrict_outcome(std::uint32_t outcome, int n, const Subset& s) {
  std::uint32_t v = 0;
  for (int q : s.indices()) v = (v << 1) | ((outcome >> (n - 1 - q)) & 1U);
  return v;
}

Shot::Shot(MeasurementBasis b, std::uint32_t o) : basis(std::move(b)), outcome(o) {
  if (basis.size() < 32 && (outcome >> basis.size()) != 0)
    throw std::invalid_argument("outcome has more bits than the basis has letters");
}

Shot Shot::restrict_to(const Subset& s) const {
  return Shot(basis.restrict_to(s), restrict_outcome(outcome, size(), s));
}

RealVector outcome_distribution(ConstMatrixRef rho, const MeasurementBasis& basis) {
  const int n = basis.size();
  if (rho.rows() != (Eigen::Index{1} << n) || rho.cols() != rho.rows())
    throw std::invalid_argument("outcome_distribution: basis length " + std::to_string(n) +
                                " does not match state dimension " + std::to_string(rho.rows()));
  ComplexMatrix m = rho;
  const Eigen::Index dim = m.rows();
  for (int q = 0; q < n; ++q) {
    if (basis[q] == Pauli::Z) continue;
    const Eigen::Matrix2cd v = rotation_for(basis[q]);
    const Eigen::Index stride = Eigen::Index{1} << (n - 1 - q);
    for (Eigen::Index r0 = 0; r0 < dim; ++r0) {
      if (r0 & stride) continue;
      const Eigen::Index r1 = r0 | stride;
      const Eigen::RowVectorXcd a = m.row(r0), b = m.row(r1);
      m.row(r0) = v(0, 0) * a + v(0, 1) * b;
      m.row(r1) = v(1, 0) * a + v(1, 1) * b;
    }
    for (Eigen::Index c0 = 0; c0 < dim; ++c0) {
      if (c0 & stride) continue;
      const Eigen::Index c1 = c0 | stride;
      const Eigen::VectorXcd a = m.col(c0), b = m.col(c1);
      m.col(c0) = a * std::conj(v(0, 0)) + b * std::conj(v(0, 1));
      m.col(c1) = a * std::conj(v(1, 0)) + b * std::conj(v(1, 1));
    }
  }
  RealVector p = m.diagonal().real();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) < -kProbabilityClip)
      throw std::invalid_argument("outcome_distribution: operator is not positive semidefinite");
    p(i) = std::max(p(i), 0.0);
  }
  if (std::abs(p.sum() - 1.0) > kProbabilitySumTol)
    throw std::invalid_argument("outcome_distribution: probabilities do not sum to 1");
  return p;
}

RealVector outcome_distribution(const DensityMatrix& rho, const MeasurementBasis& basis) {
  return outcome_distribution(rho.matrix(), basis);
}

RealVector marginalize(const RealVector& probs, int n, const Subset& s) {
  if (probs.size() != (Eigen::Index{1} << n)) throw std::invalid_argument("marginalize: length mismatch");
  RealVector out = RealVector::Zero(Eigen::Index{1} << s.size());
  for (Eigen::Index o = 0; o < probs.size(); ++o)
    out(restrict_outcome(static_cast<std::uint32_t>(o), n, s)) += probs(o);
  return out;
}

RealVector cumulative(const RealVector& probs) {
  RealVector cdf(probs.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    cdf(i) = acc;
  }
  // Pin the total so u in [0, 1) always lands on a positive-mass entry.
  cdf /= acc;
  Eigen::Index last = cdf.size() - 1;
  while (last > 0 && probs(last) == 0.0) --last;
  cdf.tail(cdf.size() - last).setOnes();
  return cdf;
}

std::uint32_t sample_index(const RealVector& cdf, Rng& rng) {
  const double u = rng.uniform();
  const double* begin = cdf.data();
  const double* end = begin + cdf.size();
  const double* it = std::upper_bound(begin, end, u);
  if (it == end) --it;
  return static_cast<std::uint32_t>(it - begin);
}

Shot sample_shot(const DensityMatrix& rho, const MeasurementBasis& basis, Rng& rng) {
  const RealVector cdf = cumulative(outcome_distribution(rho, basis));
  return Shot(basis, sample_index(cdf, rng));
}

OutcomeSampler::OutcomeSampler(DensityMatrix rho)
    : rho_(std::move(rho)), cache_(std::make_unique<Entry[]>(basis_count(rho_.qubits()))) {}

const OutcomeSampler::Entry& OutcomeSampler::entry(const MeasurementBasis& basis) const {
  if (basis.size() != qubits()) throw std::invalid_argument("OutcomeSampler: basis length mismatch");
  Entry& e = cache_[basis.index()];
  std::call_once(e.once, [&] {
    e.probs = outcome_distribution(rho_, basis);
    e.cdf = cumulative(e.probs);
  });
  return e;
}

const RealVector& OutcomeSampler::distribution(const MeasurementBasis& basis) const {
  return entry(basis).probs;
}

Shot OutcomeSampler::sample(const MeasurementBasis& basis, Rng& rng) const {
  return Shot(basis, sample_index(entry(basis).cdf, rng));
}

bool is_compatible(const PauliString& q, const MeasurementBasis& basis) {
  if (q.size() != basis.size())
    throw std::invalid_argument("is_compatible: Pauli length does not match basis length");
  for (int i = 0; i < q.size(); ++i)
    if (q[i] != Pauli::I && q[i] != basis[i]) return false;
  return true;
}

int shot_sign(const PauliString& q, const Shot& shot) {
  if (!is_compatible(q, shot.basis))
    throw std::invalid_argument("shot_sign: " + q.str() + " is incompatible with basis " + shot.basis.str());
  return (std::popcount(shot.outcome & q.support_mask()) & 1) ? -1 : 1;
}

MeasurementBasis random_basis(int n, Rng& rng) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("random_basis: n out of range");
  PauliString p = PauliString::identity(n);
  for (int i = 0; i < n; ++i) p.set(i, static_cast<Pauli>(1 + rng.uniform_index(3)));
  return MeasurementBasis(p);
}

void SingleQubitPOVM::validate() const {
  if (elements.empty()) throw std::invalid_argument("POVM has no elements");
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (const auto& e : elements) {
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("POVM element is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(e, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-12) throw std::invalid_argument("POVM element is not PSD");
    sum += e;
  }
  if ((sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("POVM elements do not sum to the identity");
}

SingleQubitPOVM ic_povm() {
  SingleQubitPOVM povm;
  for (const char* letter : {"X", "Y", "Z"}) {
    const ComplexMatrix sigma = pauli_matrix(PauliString(letter));
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    povm.elements.push_back((id + sigma) / 6.0);
    povm.elements.push_back((id - sigma) / 6.0);
  }
  return povm;
}

RealVector product_povm_distribution(const DensityMatrix& rho, const SingleQubitPOVM& povm) {
  povm.validate();
  const int n = rho.qubits();
  const auto k = static_cast<std::uint64_t>(povm.elements.size());
  std::uint64_t outcomes = 1;
  for (int i = 0; i < n; ++i) outcomes *= k;
  RealVector p(static_cast<Eigen::Index>(outcomes));
  std::vector<std::uint64_t> digits(static_cast<std::size_t>(n));
  for (std::uint64_t o = 0; o < outcomes; ++o) {
    std::uint64_t rest = o;
    for (int i = n - 1; i >= 0; --i) {
      digits[static_cast<std::size_t>(i)] = rest % k;
      rest /= k;
    }
    ComplexMatrix e = povm.elements[digits[0]];
    for (int i = 1; i < n; ++i) e = kron(e, povm.elements[digits[static_cast<std::size_t>(i)]]);
    // tr(rho E) = sum_ij rho_ij E_ji
    p(static_cast<Eigen::Index>(o)) = std::max(0.0, (rho.matrix().cwiseProduct(e.transpose())).sum().real());
  }
  return p;
}

RealVector pauli_expectations_from_ic_povm(const RealVector& probs, int n) {
  std::uint64_t outcomes = 1;
  for (int i = 0; i < n; ++i) outcomes *= 6;
  if (static_cast<std::uint64_t>(probs.size()) != outcomes)
    throw std::invalid_argument("expected 6^n ic_povm outcome probabilities");
  RealVector alpha = RealVector::Zero(static_cast<Eigen::Index>(pauli_count(n)));
  for (std::uint64_t qi = 0; qi < pauli_count(n); ++qi) {
    const PauliString q = PauliString::from_index(qi, n);
    double sum = 0.0;
    for (std::uint64_t o = 0; o < outcomes; ++o) {
      double weight = 1.0;
      std::uint64_t rest = o;
      for (int i = n - 1; i >= 0 && weight != 0.0; --i) {
        const auto digit = rest % 6;
        rest /= 6;
        if (q[i] == Pauli::I) continue;
        // digit / 2 selects the letter X, Y, Z; digit % 2 selects the sign.
        const auto letter = static_cast<Pauli>(1 + digit / 2);
        weight = letter == q[i] ? weight * 3.0 * (digit % 2 ? -1.0 : 1.0) : 0.0;
      }
      sum += weight * probs(static_cast<Eigen::Index>(o));
    }
    alpha(static_cast<Eigen::Index>(qi)) = sum;
  }
  return alpha;
}

void write_shot_stream(std::ostream& os, std::span<const Shot> shots) {
  for (const Shot& s : shots) os << s.basis.str() << '\t' << outcome_string(s.outcome, s.size()) << '\n';
}

std::vector<Shot> read_shot_stream(std::istream& is) {
  std::vector<Shot> shots;
  std::string line;
  std::size_t line_no = 0;
  int n = -1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("shot stream line " + std::to_string(line_no) + ": missing TAB");
    try {
      const std::string_view view(line);
      MeasurementBasis basis(view.substr(0, tab));
      const std::string_view bits = view.substr(tab + 1);
      if (bits.size() != static_cast<std::size_t>(basis.size()))
        throw std::invalid_argument("outcome length differs from basis length");
      if (n >= 0 && basis.size() != n) throw std::invalid_argument("inconsistent register size");
      n = basis.size();
      shots.emplace_back(std::move(basis), parse_outcome(bits));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("shot stream line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return shots;
}

}  // namespace ptomo
