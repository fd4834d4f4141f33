#include "ptomo/qstate.hpp"

#include "ptomo/rng.hpp"

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ptomo {

namespace {

Complex row_phase(const PauliString& p, std::uint64_t row) {
  Complex value(1, 0);
  for (int q = 0; q < p.size(); ++q) {
    const bool bit = (row >> (p.size() - 1 - q)) & 1;
    switch (p[q]) {
      case Pauli::I:
      case Pauli::X:
        break;
      case Pauli::Y:
        value *= bit ? Complex(0, 1) : Complex(0, -1);
        break;
      case Pauli::Z:
        if (bit) value = -value;
        break;
    }
  }
  return value;
}

void check_qubit_count(int n) {
  if (n < 1 || n > kMaxQubits)
    throw std::invalid_argument("qubit count " + std::to_string(n) + " outside [1, " +
                                std::to_string(kMaxQubits) + "]");
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument("bad " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

}  // namespace

char to_char(Pauli p) {
  static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
  return kLetters[static_cast<int>(p)];
}

Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default:
      throw std::invalid_argument(std::string("invalid Pauli letter '") + c + "'");
  }
}

PauliString::PauliString(std::string_view letters) {
  if (letters.empty() || letters.size() > static_cast<std::size_t>(kMaxQubits))
    throw std::invalid_argument("Pauli string length must be in [1, 12]: '" +
                                std::string(letters) + "'");
  size_ = static_cast<int>(letters.size());
  for (int i = 0; i < size_; ++i) letters_[static_cast<std::size_t>(i)] = pauli_from_char(letters[static_cast<std::size_t>(i)]);
}

PauliString PauliString::identity(int n) {
  check_qubit_count(n);
  PauliString p;
  p.size_ = n;
  return p;
}

PauliString PauliString::from_index(std::uint64_t index, int n) {
  PauliString p = identity(n);
  if (index >= pauli_count(n)) throw std::out_of_range("Pauli index out of range");
  for (int i = n - 1; i >= 0; --i) {
    p.set(i, static_cast<Pauli>(index & 3U));
    index >>= 2;
  }
  return p;
}

int PauliString::weight() const {
  int w = 0;
  for (int i = 0; i < size_; ++i) w += (*this)[i] != Pauli::I;
  return w;
}

std::uint64_t PauliString::index() const {
  std::uint64_t idx = 0;
  for (int i = 0; i < size_; ++i) idx = (idx << 2) | static_cast<std::uint64_t>((*this)[i]);
  return idx;
}

std::uint32_t PauliString::x_mask() const {
  std::uint32_t mask = 0;
  for (int i = 0; i < size_; ++i) {
    const Pauli p = (*this)[i];
    if (p == Pauli::X || p == Pauli::Y) mask |= 1U << (size_ - 1 - i);
  }
  return mask;
}

std::uint32_t PauliString::support_mask() const {
  std::uint32_t mask = 0;
  for (int i = 0; i < size_; ++i)
    if ((*this)[i] != Pauli::I) mask |= 1U << (size_ - 1 - i);
  return mask;
}

std::string PauliString::str() const {
  std::string s(static_cast<std::size_t>(size_), 'I');
  for (int i = 0; i < size_; ++i) s[static_cast<std::size_t>(i)] = to_char((*this)[i]);
  return s;
}

std::uint64_t pauli_count(int n) { return std::uint64_t{1} << (2 * n); }

Subset::Subset(std::vector<int> indices, int n) : indices_(std::move(indices)) {
  if (static_cast<int>(indices_.size()) > n) throw std::invalid_argument("subset larger than register");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= n)
      throw std::invalid_argument("subset index " + std::to_string(indices_[i]) + " outside [0, " +
                                  std::to_string(n) + ")");
    if (i > 0 && indices_[i] <= indices_[i - 1])
      throw std::invalid_argument("subset indices must be strictly increasing");
  }
}

Subset Subset::all(int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return Subset(std::move(idx), n);
}

std::string Subset::str() const {
  std::string s = "{";
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(indices_[i]);
  }
  return s + "}";
}

std::vector<Subset> subsets_of_size(int n, int k) {
  if (k < 0 || k > n) throw std::invalid_argument("subset size out of range");
  std::vector<Subset> out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.emplace_back(idx, n);
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int j = pos + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

int qubits_for_dim(Eigen::Index dim) {
  for (int n = 1; n <= kMaxQubits; ++n)
    if ((Eigen::Index{1} << n) == dim) return n;
  throw std::invalid_argument("dimension " + std::to_string(dim) + " is not 2^n with 1 <= n <= 12");
}

bool is_hermitian(ConstMatrixRef a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

RealVector hermitian_eigenvalues(ConstMatrixRef a) {
  if (!is_hermitian(a)) throw std::invalid_argument("matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  return solver.eigenvalues();
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
  if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("density matrix must be square");
  qubits_ = qubits_for_dim(matrix_.rows());
  if (!matrix_.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
  if (!is_hermitian(matrix_)) throw std::invalid_argument("density matrix is not Hermitian");
  const Complex tr = matrix_.trace();
  if (std::abs(tr - Complex(1, 0)) > kTraceTol)
    throw std::invalid_argument("density matrix trace " + std::to_string(tr.real()) + " != 1");
  const double min_eig = hermitian_eigenvalues(matrix_).minCoeff();
  if (min_eig < -kPsdTol)
    throw std::invalid_argument("density matrix has negative eigenvalue " + std::to_string(min_eig));
}

void add_scaled_pauli(ComplexMatrix& m, const PauliString& p, Complex coeff) {
  const std::uint64_t dim = std::uint64_t{1} << p.size();
  if (static_cast<std::uint64_t>(m.rows()) != dim || m.rows() != m.cols())
    throw std::invalid_argument("add_scaled_pauli: dimension mismatch");
  const std::uint64_t flip = p.x_mask();
  for (std::uint64_t row = 0; row < dim; ++row)
    m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(row ^ flip)) += coeff * row_phase(p, row);
}

double expectation(ConstMatrixRef rho, const PauliString& p) {
  const std::uint64_t dim = std::uint64_t{1} << p.size();
  if (static_cast<std::uint64_t>(rho.rows()) != dim || rho.rows() != rho.cols())
    throw std::invalid_argument("expectation: Pauli length " + std::to_string(p.size()) +
                                " does not match operator dimension " + std::to_string(rho.rows()));
  const std::uint64_t flip = p.x_mask();
  // tr(rho P) = sum_c rho(c ^ flip, c) * P(c, c ^ flip)
  Complex sum(0, 0);
  for (std::uint64_t c = 0; c < dim; ++c)
    sum += rho(static_cast<Eigen::Index>(c ^ flip), static_cast<Eigen::Index>(c)) * row_phase(p, c);
  if (std::abs(sum.imag()) > kHermitianTol * static_cast<double>(dim))
    throw std::logic_error("expectation has imaginary part " + std::to_string(sum.imag()));
  return sum.real();
}

double expectation(const DensityMatrix& rho, const PauliString& p) {
  return expectation(rho.matrix(), p);
}

RealVector pauli_decompose(ConstMatrixRef rho) {
  const int n = qubits_for_dim(rho.rows());
  RealVector alpha(static_cast<Eigen::Index>(pauli_count(n)));
  for (std::uint64_t i = 0; i < pauli_count(n); ++i)
    alpha(static_cast<Eigen::Index>(i)) = expectation(rho, PauliString::from_index(i, n));
  return alpha;
}

RealVector pauli_decompose(const DensityMatrix& rho) { return pauli_decompose(rho.matrix()); }

ComplexMatrix from_pauli_coefficients(const RealVector& alpha, int n) {
  check_qubit_count(n);
  if (static_cast<std::uint64_t>(alpha.size()) != pauli_count(n))
    throw std::invalid_argument("coefficient vector must have 4^n entries");
  const Eigen::Index dim = Eigen::Index{1} << n;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  const double scale = 1.0 / static_cast<double>(dim);
  for (std::uint64_t i = 0; i < pauli_count(n); ++i) {
    const double a = alpha(static_cast<Eigen::Index>(i));
    if (a != 0.0) add_scaled_pauli(out, PauliString::from_index(i, n), Complex(a * scale, 0));
  }
  return out;
}

ComplexMatrix partial_trace(ConstMatrixRef rho, int n, const Subset& keep) {
  check_qubit_count(n);
  if (rho.rows() != (Eigen::Index{1} << n) || rho.cols() != rho.rows())
    throw std::invalid_argument("partial_trace: operator dimension does not match qubit count");
  for (int q : keep.indices())
    if (q < 0 || q >= n) throw std::invalid_argument("partial_trace: index out of range");

  std::vector<int> traced;
  for (int q = 0, j = 0; q < n; ++q) {
    if (j < keep.size() && keep[j] == q) {
      ++j;
    } else {
      traced.push_back(q);
    }
  }
  const int k = keep.size();
  const auto place = [n](const std::vector<int>& qubits, std::uint64_t bits) {
    std::uint64_t full = 0;
    const int len = static_cast<int>(qubits.size());
    for (int i = 0; i < len; ++i)
      if ((bits >> (len - 1 - i)) & 1) full |= std::uint64_t{1} << (n - 1 - qubits[static_cast<std::size_t>(i)]);
    return full;
  };

  const std::uint64_t kept_dim = std::uint64_t{1} << k;
  const std::uint64_t traced_dim = std::uint64_t{1} << traced.size();
  std::vector<std::uint64_t> kept_offsets(kept_dim), traced_offsets(traced_dim);
  for (std::uint64_t a = 0; a < kept_dim; ++a) kept_offsets[a] = place(keep.indices(), a);
  for (std::uint64_t t = 0; t < traced_dim; ++t) traced_offsets[t] = place(traced, t);

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(kept_dim), static_cast<Eigen::Index>(kept_dim));
  for (std::uint64_t a = 0; a < kept_dim; ++a)
    for (std::uint64_t b = 0; b < kept_dim; ++b) {
      Complex sum(0, 0);
      for (std::uint64_t t : traced_offsets)
        sum += rho(static_cast<Eigen::Index>(kept_offsets[a] | t), static_cast<Eigen::Index>(kept_offsets[b] | t));
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sum;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const Subset& keep) {
  if (keep.size() == 0) throw std::invalid_argument("partial_trace: keep at least one qubit");
  return DensityMatrix(partial_trace(rho.matrix(), rho.qubits(), keep));
}

double trace_norm(ConstMatrixRef a) { return hermitian_eigenvalues(a).cwiseAbs().sum(); }

double one_norm_distance(ConstMatrixRef a, ConstMatrixRef b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("one_norm_distance: dimension mismatch");
  if (!is_hermitian(a) || !is_hermitian(b))
    throw std::invalid_argument("one_norm_distance: inputs must be Hermitian");
  return trace_norm(a - b);
}

StateSpec StateSpec::maximally_mixed(int n) {
  StateSpec s;
  s.kind = Kind::MaximallyMixed;
  s.n = n;
  return s;
}

StateSpec StateSpec::basis_state(std::string bits) {
  StateSpec s;
  s.kind = Kind::BasisState;
  s.n = static_cast<int>(bits.size());
  s.bits = std::move(bits);
  return s;
}

StateSpec StateSpec::ghz(int n) {
  StateSpec s;
  s.kind = Kind::Ghz;
  s.n = n;
  return s;
}

StateSpec StateSpec::random_pure(int n, std::uint64_t seed) {
  StateSpec s;
  s.kind = Kind::RandomPure;
  s.n = n;
  s.seed = seed;
  return s;
}

StateSpec StateSpec::random_mixed(int n, int rank, std::uint64_t seed) {
  StateSpec s;
  s.kind = Kind::RandomMixed;
  s.n = n;
  s.rank = rank;
  s.seed = seed;
  return s;
}

StateSpec StateSpec::parse(std::string_view text) {
  const auto parts = split(text, ':');
  const auto& head = parts[0];
  const auto want = [&](std::size_t count) {
    if (parts.size() != count)
      throw std::invalid_argument("state spec '" + std::string(text) + "' expects " +
                                  std::to_string(count - 1) + " argument(s)");
  };
  if (head == "mixed" || head == "maximally_mixed") {
    want(2);
    return maximally_mixed(parse_number<int>(parts[1], "qubit count"));
  }
  if (head == "basis" || head == "basis_state") {
    want(2);
    return basis_state(std::string(parts[1]));
  }
  if (head == "ghz") {
    want(2);
    return ghz(parse_number<int>(parts[1], "qubit count"));
  }
  if (head == "random_pure") {
    want(3);
    return random_pure(parse_number<int>(parts[1], "qubit count"),
                       parse_number<std::uint64_t>(parts[2], "seed"));
  }
  if (head == "random_mixed") {
    want(4);
    return random_mixed(parse_number<int>(parts[1], "qubit count"), parse_number<int>(parts[2], "rank"),
                        parse_number<std::uint64_t>(parts[3], "seed"));
  }
  throw std::invalid_argument("unknown state spec '" + std::string(text) + "'");
}

std::string StateSpec::str() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::MaximallyMixed: os << "mixed:" << n; break;
    case Kind::BasisState: os << "basis:" << bits; break;
    case Kind::Ghz: os << "ghz:" << n; break;
    case Kind::RandomPure: os << "random_pure:" << n << ':' << seed; break;
    case Kind::RandomMixed: os << "random_mixed:" << n << ':' << rank << ':' << seed; break;
  }
  return os.str();
}

DensityMatrix make_state(const StateSpec& spec) {
  check_qubit_count(spec.n);
  const Eigen::Index dim = Eigen::Index{1} << spec.n;
  switch (spec.kind) {
    case StateSpec::Kind::MaximallyMixed:
      return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));

    case StateSpec::Kind::BasisState: {
      if (static_cast<int>(spec.bits.size()) != spec.n)
        throw std::invalid_argument("basis state bit string length must equal n");
      Eigen::Index idx = 0;
      for (char c : spec.bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("basis state bits must be 0/1");
        idx = (idx << 1) | (c == '1');
      }
      ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
      m(idx, idx) = 1.0;
      return DensityMatrix(std::move(m));
    }

    case StateSpec::Kind::Ghz: {
      ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
      m(0, 0) = m(0, dim - 1) = m(dim - 1, 0) = m(dim - 1, dim - 1) = 0.5;
      return DensityMatrix(std::move(m));
    }

    case StateSpec::Kind::RandomPure: {
      Rng rng(spec.seed);
      Eigen::VectorXcd psi(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = rng.normal();
        psi(i) = Complex(re, rng.normal());
      }
      psi.normalize();
      ComplexMatrix m = psi * psi.adjoint();
      return DensityMatrix(std::move(m));
    }

    case StateSpec::Kind::RandomMixed: {
      if (spec.rank < 1) throw std::invalid_argument("random mixed state rank must be >= 1");
      Rng rng(spec.seed);
      Eigen::MatrixXcd g(dim, spec.rank);
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < spec.rank; ++j) {
          const double re = rng.normal();
          g(i, j) = Complex(re, rng.normal());
        }
      ComplexMatrix m = g * g.adjoint();
      m /= m.trace().real();
      // Remove rounding asymmetry from the product.
      ComplexMatrix herm = (m + m.adjoint()) / 2.0;
      return DensityMatrix(std::move(herm));
    }
  }
  throw std::invalid_argument("invalid state spec");
}

}  // namespace ptomo
