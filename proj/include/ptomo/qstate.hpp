#ifndef PTOMO_QSTATE_HPP
#define PTOMO_QSTATE_HPP

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ptomo {

/// Hard cap on register size. A dense 2^12 x 2^12 complex matrix is 256 MB.
inline constexpr int kMaxQubits = 12;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;

using Complex = std::complex<double>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = DenseMatrix<Complex>;
using RealVector = Eigen::VectorXd;
using ConstMatrixRef = Eigen::Ref<const ComplexMatrix>;

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(Pauli p);
Pauli pauli_from_char(char c);

/// Word over {I,X,Y,Z}; letter 0 acts on qubit 0, the most significant
/// tensor factor.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::string_view letters);

  static PauliString identity(int n);
  /// Inverse of index(): base-4 digits with I=0, X=1, Y=2, Z=3.
  static PauliString from_index(std::uint64_t index, int n);

  int size() const { return size_; }
  int weight() const;
  Pauli operator[](int i) const { return letters_[static_cast<std::size_t>(i)]; }
  void set(int i, Pauli p) { letters_[static_cast<std::size_t>(i)] = p; }

  std::uint64_t index() const;
  /// Bit (n-1-i) set where letter i flips the computational basis (X or Y).
  std::uint32_t x_mask() const;
  /// Bit (n-1-i) set where letter i is not the identity.
  std::uint32_t support_mask() const;

  std::string str() const;

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.size_ == b.size_ && a.letters_ == b.letters_;
  }

 private:
  std::array<Pauli, kMaxQubits> letters_{};
  int size_ = 0;
};

/// 4^n.
std::uint64_t pauli_count(int n);

/// Strictly increasing qubit indices in [0, n).
class Subset {
 public:
  Subset() = default;
  Subset(std::vector<int> indices, int n);

  static Subset all(int n);

  const std::vector<int>& indices() const { return indices_; }
  int size() const { return static_cast<int>(indices_.size()); }
  int operator[](int i) const { return indices_[static_cast<std::size_t>(i)]; }
  std::string str() const;

  friend bool operator==(const Subset&, const Subset&) = default;

 private:
  std::vector<int> indices_;
};

/// All size-k subsets of {0..n-1}, lexicographic over index tuples.
std::vector<Subset> subsets_of_size(int n, int k);

/// Number of qubits for a 2^n dimension; throws if `dim` is not a power of two
/// or exceeds the qubit cap.
int qubits_for_dim(Eigen::Index dim);

bool is_hermitian(ConstMatrixRef a, double tol = kHermitianTol);

/// Ascending eigenvalues of a Hermitian matrix.
RealVector hermitian_eigenvalues(ConstMatrixRef a);

/// Unit-trace PSD Hermitian matrix; validated on construction and immutable.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);

  const ComplexMatrix& matrix() const { return matrix_; }
  int qubits() const { return qubits_; }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  ComplexMatrix matrix_;
  int qubits_ = 0;
};

/// Kronecker product of two dense matrices.
template <typename DerivedA, typename DerivedB>
DenseMatrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  DenseMatrix<typename DerivedA::Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// sqrt of the sum of squared entry magnitudes.
template <typename Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  return static_cast<double>(a.norm());
}

/// Dense 2^n x 2^n matrix of a Pauli word. Each row holds one nonzero entry.
template <typename Real = double>
DenseMatrix<std::complex<Real>> pauli_matrix(const PauliString& p) {
  using C = std::complex<Real>;
  const Eigen::Index dim = Eigen::Index{1} << p.size();
  DenseMatrix<C> out = DenseMatrix<C>::Zero(dim, dim);
  const std::uint32_t flip = p.x_mask();
  for (Eigen::Index row = 0; row < dim; ++row) {
    C value(1, 0);
    for (int q = 0; q < p.size(); ++q) {
      const bool bit = (row >> (p.size() - 1 - q)) & 1;
      switch (p[q]) {
        case Pauli::I:
        case Pauli::X:
          break;
        case Pauli::Y:
          value *= bit ? C(0, 1) : C(0, -1);
          break;
        case Pauli::Z:
          if (bit) value = -value;
          break;
      }
    }
    out(row, row ^ static_cast<Eigen::Index>(flip)) = value;
  }
  return out;
}

/// m += coeff * P without materializing P.
void add_scaled_pauli(ComplexMatrix& m, const PauliString& p, Complex coeff);

/// tr(rho P) for a Hermitian operator; throws on length mismatch or if the
/// imaginary part exceeds the Hermitian tolerance.
double expectation(ConstMatrixRef rho, const PauliString& p);
double expectation(const DensityMatrix& rho, const PauliString& p);

/// tr(rho P) for every Pauli word, indexed by PauliString::index().
RealVector pauli_decompose(const DensityMatrix& rho);
RealVector pauli_decompose(ConstMatrixRef rho);

/// sum_P alpha_P P / 2^n for coefficients indexed by PauliString::index().
ComplexMatrix from_pauli_coefficients(const RealVector& alpha, int n);

/// Reduced operator on the kept qubits (order of `keep`).
ComplexMatrix partial_trace(ConstMatrixRef rho, int n, const Subset& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const Subset& keep);

/// Sum of absolute eigenvalues of a Hermitian matrix (no 1/2 factor).
double trace_norm(ConstMatrixRef a);

/// trace_norm(a - b). Orthogonal pure states are at distance 2.
double one_norm_distance(ConstMatrixRef a, ConstMatrixRef b);

/// Test-state recipes.
struct StateSpec {
  enum class Kind { MaximallyMixed, BasisState, Ghz, RandomPure, RandomMixed };

  Kind kind = Kind::MaximallyMixed;
  int n = 1;
  std::string bits;        // BasisState
  int rank = 1;            // RandomMixed
  std::uint64_t seed = 0;  // RandomPure, RandomMixed

  static StateSpec maximally_mixed(int n);
  static StateSpec basis_state(std::string bits);
  static StateSpec ghz(int n);
  static StateSpec random_pure(int n, std::uint64_t seed);
  static StateSpec random_mixed(int n, int rank, std::uint64_t seed);

  /// Accepts `mixed:N`, `basis:BITS`, `ghz:N`, `random_pure:N:SEED`,
  /// `random_mixed:N:RANK:SEED`.
  static StateSpec parse(std::string_view text);
  std::string str() const;
};

DensityMatrix make_state(const StateSpec& spec);

}  // namespace ptomo

#endif  // PTOMO_QSTATE_HPP
