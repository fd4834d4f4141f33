#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "ptomo/measurement.hpp"

#include <cmath>
#include <sstream>

using namespace ptomo;

namespace {

// p(s) by the defining formula: tr(rho * kron_i (I + (-1)^{s_i} sigma_i) / 2).
RealVector formula_distribution(const DensityMatrix& rho, const MeasurementBasis& basis) {
  const int n = basis.size();
  const auto rho_o = oracle::from_eigen(rho.matrix());
  RealVector p(1 << n);
  for (int s = 0; s < (1 << n); ++s) {
    oracle::Mat proj;
    for (int i = 0; i < n; ++i) {
      const double sign = ((s >> (n - 1 - i)) & 1) ? -1.0 : 1.0;
      auto id = oracle::single_pauli('I');
      const auto sig = oracle::single_pauli(to_char(basis[i]));
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) id[r][c] = (id[r][c] + sign * sig[r][c]) / 2.0;
      proj = i == 0 ? id : oracle::kron(proj, id);
    }
    p(s) = oracle::trace_product(rho_o, proj).real();
  }
  return p;
}

}  // namespace

TEST_CASE("MeasurementBasis") {
  CHECK_THROWS_AS(MeasurementBasis("XI"), std::invalid_argument);
  const MeasurementBasis b("ZXY");
  CHECK(MeasurementBasis::from_index(b.index(), 3) == b);
  CHECK(MeasurementBasis::from_index(0, 2).str() == "XX");
  CHECK(MeasurementBasis::from_index(1, 2).str() == "XY");
  CHECK(MeasurementBasis::from_index(8, 2).str() == "ZZ");
  CHECK(b.restrict_to(Subset({0, 2}, 3)).str() == "ZY");
}

TEST_CASE("outcome_distribution") {
  SUBCASE("maximally mixed in XY is uniform") {
    const RealVector p = outcome_distribution(make_state(StateSpec::maximally_mixed(2)), MeasurementBasis("XY"));
    for (int i = 0; i < 4; ++i) CHECK(p(i) == doctest::Approx(0.25));
  }
  SUBCASE("|0><0| in X is (1/2, 1/2)") {
    const RealVector p = outcome_distribution(make_state(StateSpec::basis_state("0")), MeasurementBasis("X"));
    CHECK(p(0) == doctest::Approx(0.5));
    CHECK(p(1) == doctest::Approx(0.5));
  }
  SUBCASE("two-qubit linear relations with expectations") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const DensityMatrix rho = make_state(StateSpec::random_mixed(2, 3, seed));
      const RealVector p = outcome_distribution(rho, MeasurementBasis("XY"));
      CHECK(p(0) - p(1) - p(2) + p(3) == doctest::Approx(expectation(rho, PauliString("XY"))).epsilon(1e-12));
      CHECK(p(0) + p(1) - p(2) - p(3) == doctest::Approx(expectation(rho, PauliString("XI"))).epsilon(1e-12));
      CHECK(p(0) - p(1) + p(2) - p(3) == doctest::Approx(expectation(rho, PauliString("IY"))).epsilon(1e-12));
    }
  }
  SUBCASE("agrees with the projector formula for every 3-qubit basis") {
    const DensityMatrix rho = make_state(StateSpec::random_mixed(3, 2, 77));
    for (std::uint64_t b = 0; b < basis_count(3); ++b) {
      const MeasurementBasis basis = MeasurementBasis::from_index(b, 3);
      const RealVector p = outcome_distribution(rho, basis);
      CHECK((p - formula_distribution(rho, basis)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.minCoeff() >= 0.0);
    }
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(outcome_distribution(make_state(StateSpec::maximally_mixed(2)), MeasurementBasis("X")),
                    std::invalid_argument);
  }
}

TEST_CASE("signed outcome sums reproduce every compatible expectation") {
  for (int n = 1; n <= 3; ++n) {
    const DensityMatrix rho = make_state(StateSpec::random_mixed(n, 2, 40 + static_cast<std::uint64_t>(n)));
    for (std::uint64_t b = 0; b < basis_count(n); ++b) {
      const MeasurementBasis basis = MeasurementBasis::from_index(b, n);
      const RealVector p = outcome_distribution(rho, basis);
      for (std::uint64_t qi = 0; qi < pauli_count(n); ++qi) {
        const PauliString q = PauliString::from_index(qi, n);
        if (!is_compatible(q, basis)) continue;
        double sum = 0.0;
        for (int s = 0; s < (1 << n); ++s) sum += p(s) * shot_sign(q, Shot(basis, static_cast<std::uint32_t>(s)));
        CHECK(std::abs(sum - expectation(rho, q)) < 1e-10);
      }
    }
  }
}

TEST_CASE("marginal consistency of outcome distributions") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const DensityMatrix rho = make_state(StateSpec::random_mixed(4, 3, 500 + seed));
    for (int k = 1; k <= 3; ++k)
      for (const Subset& s : subsets_of_size(4, k))
        for (std::uint64_t b = 0; b < basis_count(4); b += 7) {
          const MeasurementBasis basis = MeasurementBasis::from_index(b, 4);
          const RealVector lhs = marginalize(outcome_distribution(rho, basis), 4, s);
          const RealVector rhs = outcome_distribution(partial_trace(rho, s), basis.restrict_to(s));
          CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
        }
  }
}

TEST_CASE("sample_shot") {
  SUBCASE("eigenstate is deterministic") {
    Rng rng(1);
    const DensityMatrix zero = make_state(StateSpec::basis_state("0"));
    for (int i = 0; i < 1000; ++i) CHECK(sample_shot(zero, MeasurementBasis("Z"), rng).outcome == 0U);
  }
  SUBCASE("maximally mixed in X is a fair coin") {
    Rng rng(2);
    const OutcomeSampler sampler(make_state(StateSpec::maximally_mixed(1)));
    int zeros = 0;
    for (int i = 0; i < 100000; ++i) zeros += sampler.sample(MeasurementBasis("X"), rng).outcome == 0U;
    CHECK(std::abs(zeros / 1e5 - 0.5) < 0.01);
  }
  SUBCASE("(I + 0.3X)/2 in X gives 0 with probability 0.65") {
    ComplexMatrix m(2, 2);
    m << 0.5, 0.15, 0.15, 0.5;
    const OutcomeSampler sampler{DensityMatrix(m)};
    CHECK(sampler.distribution(MeasurementBasis("X"))(0) == doctest::Approx(0.65).epsilon(1e-12));
    Rng rng(3);
    int zeros = 0;
    for (int i = 0; i < 1000000; ++i) zeros += sampler.sample(MeasurementBasis("X"), rng).outcome == 0U;
    CHECK(std::abs(zeros / 1e6 - 0.65) < 0.002);
  }
  SUBCASE("replay with the same seed") {
    const DensityMatrix rho = make_state(StateSpec::random_mixed(3, 2, 8));
    Rng a(99), b(99);
    for (int i = 0; i < 200; ++i) {
      const MeasurementBasis basis = MeasurementBasis::from_index(static_cast<std::uint64_t>(i) % 27, 3);
      CHECK(sample_shot(rho, basis, a) == sample_shot(rho, basis, b));
    }
  }
  SUBCASE("zero-probability outcomes are never drawn") {
    const RealVector cdf = cumulative((RealVector(4) << 0.0, 0.5, 0.5, 0.0).finished());
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
      const auto s = sample_index(cdf, rng);
      CHECK((s == 1U || s == 2U));
    }
  }
}

TEST_CASE("is_compatible and shot_sign") {
  CHECK(is_compatible(PauliString("XI"), MeasurementBasis("XY")));
  CHECK_FALSE(is_compatible(PauliString("ZI"), MeasurementBasis("XY")));
  CHECK(is_compatible(PauliString("II"), MeasurementBasis("ZX")));
  CHECK_THROWS_AS(is_compatible(PauliString("X"), MeasurementBasis("XY")), std::invalid_argument);

  const Shot shot(MeasurementBasis("XY"), parse_outcome("01"));
  CHECK(shot_sign(PauliString("II"), shot) == 1);
  CHECK(shot_sign(PauliString("XI"), shot) == 1);
  CHECK(shot_sign(PauliString("IY"), shot) == -1);
  CHECK(shot_sign(PauliString("XY"), shot) == -1);
  CHECK(shot_sign(PauliString("Z"), Shot(MeasurementBasis("Z"), 1)) == -1);
  CHECK_THROWS_AS(shot_sign(PauliString("ZI"), shot), std::invalid_argument);
}

TEST_CASE("random_basis") {
  SUBCASE("uniform letters") {
    Rng rng(10);
    int counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < 300000; ++i) ++counts[static_cast<int>(random_basis(1, rng)[0])];
    CHECK(counts[0] == 0);
    for (int l = 1; l <= 3; ++l) CHECK(std::abs(counts[l] / 3e5 - 1.0 / 3.0) < 0.01);
  }
  SUBCASE("no identity letters") {
    Rng rng(11);
    const MeasurementBasis b = random_basis(4, rng);
    CHECK(b.size() == 4);
    CHECK(b.letters().weight() == 4);
  }
  SUBCASE("replay") {
    Rng a(12), b(12);
    for (int i = 0; i < 100; ++i) CHECK(random_basis(5, a) == random_basis(5, b));
  }
}

TEST_CASE("ic_povm") {
  const SingleQubitPOVM povm = ic_povm();
  REQUIRE(povm.elements.size() == 6);
  CHECK_NOTHROW(povm.validate());
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (const auto& e : povm.elements) sum += e;
  CHECK((sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);

  for (const auto& e : povm.elements) {
    // closed-form 2x2 eigenvalues: (tr +/- sqrt(tr^2 - 4 det)) / 2
    const double tr = e.trace().real(), det = e.determinant().real();
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det));
    CHECK((tr - disc) / 2 == doctest::Approx(0.0));
    CHECK((tr + disc) / 2 == doctest::Approx(1.0 / 3.0));
  }

  const RealVector p = product_povm_distribution(make_state(StateSpec::maximally_mixed(1)), povm);
  for (int i = 0; i < 6; ++i) CHECK(p(i) == doctest::Approx(1.0 / 6.0));

  SingleQubitPOVM bad = povm;
  bad.elements.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("exact product ic_povm statistics determine the state") {
  for (int n = 1; n <= 3; ++n) {
    const DensityMatrix rho = make_state(StateSpec::random_mixed(n, 2, 60 + static_cast<std::uint64_t>(n)));
    const RealVector probs = product_povm_distribution(rho, ic_povm());
    CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
    const RealVector alpha = pauli_expectations_from_ic_povm(probs, n);
    CHECK((from_pauli_coefficients(alpha, n) - rho.matrix()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("shot stream format") {
  const std::vector<Shot> shots = {Shot(MeasurementBasis("XY"), parse_outcome("01")),
                                   Shot(MeasurementBasis("ZZ"), parse_outcome("11")),
                                   Shot(MeasurementBasis("YX"), parse_outcome("00"))};
  std::ostringstream os;
  write_shot_stream(os, shots);
  CHECK(os.str() == "XY\t01\nZZ\t11\nYX\t00\n");

  std::istringstream is(os.str());
  CHECK(read_shot_stream(is) == shots);

  std::istringstream missing_tab("XY 01\n");
  CHECK_THROWS_AS(read_shot_stream(missing_tab), std::runtime_error);
  std::istringstream bad_len("XY\t011\n");
  CHECK_THROWS_AS(read_shot_stream(bad_len), std::runtime_error);
  std::istringstream mixed("XY\t01\nX\t1\n");
  CHECK_THROWS_AS(read_shot_stream(mixed), std::runtime_error);
  std::istringstream with_i("XI\t01\n");
  CHECK_THROWS_AS(read_shot_stream(with_i), std::runtime_error);
}
