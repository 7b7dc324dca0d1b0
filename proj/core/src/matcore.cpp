#include "shadowtomo/matcore.hpp"

#include <cmath>

namespace shadowtomo {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and nonempty");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
  }
}

}  // namespace

double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool validate_unitary(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  Matrix gram = m * m.adjoint();
  gram.diagonal().array() -= 1.0;
  return gram.norm() <= tol;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("frobenius_distance: dimension mismatch");
  }
  return (a - b).norm();
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
  require_square(m_, "DensityMatrix");
  if (hermiticity_defect(m_) > kHermitianTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian within 1e-12");
  }
  if (std::abs(m_.trace() - Complex(1.0, 0.0)) > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace differs from 1 beyond 1e-12");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m_ + m_.adjoint()),
                                               Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kPsdTol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond 1e-12");
  }
}

DensityMatrix DensityMatrix::basis_projector(int d, int k) {
  if (d < 1 || k < 0 || k >= d) {
    throw std::invalid_argument("basis_projector: channel index out of range");
  }
  Matrix m = Matrix::Zero(d, d);
  m(k, k) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
  if (d < 1) throw std::invalid_argument("maximally_mixed: d must be positive");
  return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
}

HermitianEstimate::HermitianEstimate(Matrix m) : m_(std::move(m)) {
  require_square(m_, "HermitianEstimate");
  if (hermiticity_defect(m_) > kHermitianTol) {
    throw std::invalid_argument("HermitianEstimate: not Hermitian within 1e-12");
  }
  if (std::abs(m_.trace() - Complex(1.0, 0.0)) > kTraceTol) {
    throw std::invalid_argument("HermitianEstimate: trace differs from 1 beyond 1e-12");
  }
}

UnitaryMatrix::UnitaryMatrix(Matrix m) : m_(std::move(m)) {
  require_square(m_, "UnitaryMatrix");
  if (!shadowtomo::validate_unitary(m_, kUnitaryTol)) {
    throw std::invalid_argument("UnitaryMatrix: ||U U† - I||_F exceeds 1e-10");
  }
}

UnitaryMatrix UnitaryMatrix::adjoint() const { return UnitaryMatrix(m_.adjoint()); }

UnitaryMatrix UnitaryMatrix::identity(int d) {
  if (d < 1) throw std::invalid_argument("UnitaryMatrix::identity: d must be positive");
  return UnitaryMatrix(Matrix::Identity(d, d));
}

namespace {

Spectrum decompose_impl(const Matrix& input) {
  if (hermiticity_defect(input) > 1e-8) {
    throw std::invalid_argument("spectral_decompose: hermiticity defect exceeds 1e-8");
  }
  const Eigen::Index d = input.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (input + input.adjoint()));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("spectral_decompose: eigensolver failed");
  }

  // Eigen returns ascending order; flip to descending.
  Spectrum spec;
  spec.eigenvalues = solver.eigenvalues().reverse();
  spec.eigenvectors = solver.eigenvectors().rowwise().reverse();

  // Deterministic phase: first component of nonnegligible modulus made real positive.
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      const Complex v = spec.eigenvectors(r, c);
      if (std::abs(v) > 1e-12) {
        spec.eigenvectors.col(c) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
  return spec;
}

}  // namespace

Spectrum spectral_decompose(const Matrix& m) {
  require_square(m, "spectral_decompose");
  return decompose_impl(m);
}
Spectrum spectral_decompose(const HermitianEstimate& m) { return decompose_impl(m.matrix()); }
Spectrum spectral_decompose(const DensityMatrix& m) { return decompose_impl(m.matrix()); }

double purity(const HermitianEstimate& rho) { return rho.matrix().squaredNorm(); }
double purity(const DensityMatrix& rho) { return rho.matrix().squaredNorm(); }

}  // namespace shadowtomo
