#include "shadowtomo/haar.hpp"
#include "shadowtomo/matcore.hpp"
#include "shadowtomo/noise.hpp"

#include <doctest.h>

#include <cmath>

using namespace shadowtomo;

namespace {

Matrix random_hermitian(int d, StreamRng& rng) {
  Matrix m(d, d);
  for (int r = 0; r < d; ++r) {
    m(r, r) = Complex(rng.normal(), 0.0);
    for (int c = r + 1; c < d; ++c) {
      const Complex z = rng.complex_normal();
      m(r, c) = z;
      m(c, r) = std::conj(z);
    }
  }
  return m;
}

Matrix random_square(int d, StreamRng& rng) {
  Matrix m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = rng.complex_normal();
  return m;
}

}  // namespace

TEST_CASE("frobenius_distance basic values") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = Complex(0.3, -0.1);
  CHECK(frobenius_distance(a, a) == 0.0);

  Matrix p = Matrix::Zero(2, 2);
  Matrix q = Matrix::Zero(2, 2);
  p(0, 0) = 1.0;
  q(1, 1) = 1.0;
  CHECK(frobenius_distance(p, q) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  // Single-snapshot estimator diag(d, -1, ..., -1) against the projector
  // target at d = 8: entrywise sum is 49 + 7 = 56.
  const int d = 8;
  Matrix est = -Matrix::Identity(d, d);
  est(0, 0) = d;
  Matrix target = Matrix::Zero(d, d);
  target(0, 0) = 1.0;
  CHECK(frobenius_distance(est, target) == doctest::Approx(std::sqrt(56.0)).epsilon(1e-14));

  CHECK_THROWS_AS(frobenius_distance(p, a), std::invalid_argument);
}

TEST_CASE("frobenius_distance metric axioms on random triples") {
  StreamRng rng(RngSeed{2024, 0});
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + (trial % 3) * 2;
    const Matrix a = random_square(d, rng);
    const Matrix b = random_square(d, rng);
    const Matrix c = random_square(d, rng);
    const double ab = frobenius_distance(a, b);
    const double ba = frobenius_distance(b, a);
    const double ac = frobenius_distance(a, c);
    const double cb = frobenius_distance(c, b);
    REQUIRE(ab >= 0.0);
    REQUIRE(std::abs(ab - ba) <= 1e-12);
    REQUIRE(ab <= ac + cb + 1e-12);
  }
}

TEST_CASE("purity of basic states") {
  CHECK(purity(DensityMatrix::basis_projector(4, 0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(purity(DensityMatrix::maximally_mixed(4)) == doctest::Approx(0.25).epsilon(1e-14));

  // (1-p) rho_pure + (p/d) I at p = 0.1, d = 8:
  // purity = (1-p)^2 + 2 p (1-p)/d + p^2/d = 0.83375.
  const DensityMatrix mixed = apply_depolarizing(DensityMatrix::basis_projector(8, 0), 0.1);
  CHECK(purity(mixed) == doctest::Approx(0.83375).epsilon(1e-12));
}

TEST_CASE("purity of any density matrix lies in [1/d, 1]") {
  StreamRng rng(RngSeed{77, 0});
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + (trial % 4);
    // Random mixture of projectors.
    const UnitaryMatrix u = sample_haar(d, RngSeed{500 + trial, 0});
    RealVector w(d);
    for (int i = 0; i < d; ++i) w[i] = rng.uniform() + 1e-3;
    w /= w.sum();
    Matrix rho = u.matrix() * w.asDiagonal() * u.matrix().adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    const double value = purity(DensityMatrix(rho));
    REQUIRE(value >= 1.0 / d - 1e-12);
    REQUIRE(value <= 1.0 + 1e-12);
  }
}

TEST_CASE("spectral_decompose orders eigenvalues descending") {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 0.2;
  m(1, 1) = 0.5;
  m(2, 2) = 0.3;
  const Spectrum spec = spectral_decompose(HermitianEstimate(m));
  CHECK(spec.eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(spec.eigenvalues[1] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(spec.eigenvalues[2] == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("spectral_decompose reports published-style spectra including negatives") {
  // Reconstructed spectra are not PSD; negative eigenvalues must come back
  // unclipped.
  const std::vector<double> evs = {0.90889, -0.00820, -0.00075, 0.03102,
                                   0.02638, 0.02146,  0.01411,  0.00707};
  Matrix m = Matrix::Zero(8, 8);
  double trace = 0.0;
  for (int i = 0; i < 8; ++i) trace += evs[i];
  for (int i = 0; i < 8; ++i) m(i, i) = evs[i] / trace;  // normalize trace to 1
  const Spectrum spec = spectral_decompose(HermitianEstimate(m));
  CHECK(spec.eigenvalues[0] == doctest::Approx(0.90889 / trace).epsilon(1e-12));
  CHECK(spec.eigenvalues[7] == doctest::Approx(-0.00820 / trace).epsilon(1e-12));
}

TEST_CASE("spectral_decompose round trip on random rotations") {
  Matrix d_mat = Matrix::Zero(4, 4);
  d_mat(0, 0) = 0.9;
  d_mat(1, 1) = 0.1;
  const UnitaryMatrix w = sample_haar(4, RngSeed{31337, 0});
  Matrix m = w.matrix() * d_mat * w.matrix().adjoint();
  m = 0.5 * (m + m.adjoint());
  const Spectrum spec = spectral_decompose(HermitianEstimate(m));
  CHECK(spec.eigenvalues[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(spec.eigenvalues[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(spec.eigenvalues[2]) < 1e-12);
  CHECK(std::abs(spec.eigenvalues[3]) < 1e-12);
}

TEST_CASE("spectral_decompose reconstruction property") {
  StreamRng rng(RngSeed{123, 0});
  for (int trial = 0; trial < 100; ++trial) {
    const int d = (trial % 3 == 0) ? 2 : (trial % 3 == 1) ? 4 : 8;
    Matrix h = random_hermitian(d, rng);
    h /= std::max(1.0, h.norm());  // keep scales tame
    // Shift to trace 1 so it is a valid estimate.
    h.diagonal().array() += (1.0 - h.trace().real()) / d;
    const Spectrum spec = spectral_decompose(HermitianEstimate(h));
    const Matrix rebuilt = spec.eigenvectors *
                           spec.eigenvalues.cast<Complex>().asDiagonal() *
                           spec.eigenvectors.adjoint();
    REQUIRE(frobenius_distance(rebuilt, h) <= 1e-10);
    for (Eigen::Index i = 1; i < spec.eigenvalues.size(); ++i) {
      REQUIRE(spec.eigenvalues[i - 1] >= spec.eigenvalues[i]);
    }
  }
}

TEST_CASE("spectral_decompose eigenvector phase convention is deterministic") {
  StreamRng rng(RngSeed{55, 0});
  const Matrix h = random_hermitian(4, rng);
  Matrix est = h / std::max(1.0, h.norm());
  est.diagonal().array() += (1.0 - est.trace().real()) / 4;
  const Spectrum a = spectral_decompose(HermitianEstimate(est));
  const Spectrum b = spectral_decompose(HermitianEstimate(est));
  CHECK((a.eigenvectors - b.eigenvectors).norm() == 0.0);
  for (Eigen::Index c = 0; c < 4; ++c) {
    Eigen::Index r = 0;
    while (r < 4 && std::abs(a.eigenvectors(r, c)) <= 1e-12) ++r;
    REQUIRE(r < 4);
    CHECK(a.eigenvectors(r, c).imag() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.eigenvectors(r, c).real() > 0.0);
  }
}

TEST_CASE("spectral_decompose rejects clearly non-Hermitian input") {
  Matrix m = Matrix::Identity(3, 3) / 3.0;
  m(0, 1) = Complex(0.0, 0.5);  // no conjugate partner
  CHECK_THROWS_AS(spectral_decompose(m), std::invalid_argument);

  // A defect below 1e-8 is symmetrized away rather than rejected.
  Matrix mild = Matrix::Identity(3, 3) / 3.0;
  mild(0, 1) = Complex(1e-10, 0.0);
  CHECK_NOTHROW(spectral_decompose(mild));
}

TEST_CASE("validate_unitary") {
  CHECK(validate_unitary(Matrix::Identity(5, 5), 1e-10));
  Matrix off = Matrix::Identity(2, 2);
  off(1, 1) = 1.01;
  CHECK_FALSE(validate_unitary(off, 1e-10));
  const UnitaryMatrix u = sample_haar(8, RngSeed{9090, 3});
  CHECK(validate_unitary(u.matrix(), 1e-10));
}

TEST_CASE("type invariants are enforced") {
  Matrix bad_trace = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{bad_trace}, std::invalid_argument);
  CHECK_THROWS_AS(HermitianEstimate{bad_trace}, std::invalid_argument);

  Matrix not_herm = Matrix::Zero(2, 2);
  not_herm(0, 0) = 1.0;
  not_herm(0, 1) = Complex(0.0, 1e-6);
  CHECK_THROWS_AS(DensityMatrix{not_herm}, std::invalid_argument);

  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix{neg}, std::invalid_argument);
  CHECK_NOTHROW(HermitianEstimate{neg});  // estimates may be indefinite

  CHECK_THROWS_AS(UnitaryMatrix(Matrix::Zero(2, 2)), std::invalid_argument);
}
