#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace shadowtomo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Tolerances shared across the library. Estimates coming out of the
/// reconstruction are Hermitian and trace-1 up to rounding only, so the
/// validation thresholds are deliberately loose relative to machine epsilon.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;

/// max_ij |A_ij - (A†)_ij|
double hermiticity_defect(const Matrix& m);

/// ||m m† - I||_F <= tol
bool validate_unitary(const Matrix& m, double tol);

/// sqrt(sum_ij |a_ij - b_ij|^2). Throws std::invalid_argument on shape mismatch.
double frobenius_distance(const Matrix& a, const Matrix& b);

/// Physical state: Hermitian, unit trace, positive semi-definite.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m);

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  /// Projector |k><k| in dimension d (0-based channel index).
  static DensityMatrix basis_projector(int d, int k);
  static DensityMatrix maximally_mixed(int d);

 private:
  Matrix m_;
};

/// Reconstruction output: Hermitian and trace-1 but, unlike a physical
/// state, not necessarily positive semi-definite.
class HermitianEstimate {
 public:
  explicit HermitianEstimate(Matrix m);
  explicit HermitianEstimate(const DensityMatrix& rho) : m_(rho.matrix()) {}

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(Matrix m);

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  UnitaryMatrix adjoint() const;
  static UnitaryMatrix identity(int d);

 private:
  Matrix m_;
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending and
/// eigenvector columns aligned with them. Eigenvector phases are fixed by
/// making the first component of nonnegligible modulus real positive, so
/// repeated runs give identical output.
struct Spectrum {
  RealVector eigenvalues;
  Matrix eigenvectors;
};

/// Symmetrizes the input as (A + A†)/2 before solving; rejects inputs whose
/// hermiticity defect exceeds 1e-8.
Spectrum spectral_decompose(const Matrix& m);
Spectrum spectral_decompose(const HermitianEstimate& m);
Spectrum spectral_decompose(const DensityMatrix& m);

/// Tr(rho^2) = sum_ij |rho_ij|^2
double purity(const HermitianEstimate& rho);
double purity(const DensityMatrix& rho);

}  // namespace shadowtomo
