#include "shadowtomo/noise.hpp"

#include <cmath>

namespace shadowtomo {

namespace {

constexpr double kProbClampTol = 1e-12;
constexpr double kProbErrorTol = 1e-9;

Matrix conjugate_by(const Matrix& u, const Matrix& rho) { return u * rho * u.adjoint(); }

}  // namespace

NoiseModel::NoiseModel(double p, UnitaryMatrix u_c) : p_(p), u_c_(std::move(u_c)) {
  if (p_ < 0.0 || p_ > 1.0) throw std::invalid_argument("NoiseModel: p must lie in [0, 1]");
  if (u_c_.dim() < 2) throw std::invalid_argument("NoiseModel: dimension must be >= 2");
  epsilon_ = first_row_offdiag_rms(u_c_.matrix());
}

double first_row_offdiag_rms(const Matrix& u) {
  const Eigen::Index d = u.rows();
  if (d < 2) throw std::invalid_argument("first_row_offdiag_rms: requires d >= 2");
  double sum = 0.0;
  for (Eigen::Index j = 1; j < d; ++j) sum += std::norm(u(0, j));
  return std::sqrt(sum / static_cast<double>(d - 1));
}

DensityMatrix apply_depolarizing(const DensityMatrix& rho, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("apply_depolarizing: p must lie in [0, 1]");
  const Eigen::Index d = rho.dim();
  Matrix m = (1.0 - p) * rho.matrix();
  m.diagonal().array() += p / static_cast<double>(d);
  return DensityMatrix(std::move(m));
}

DensityMatrix distorted_state(const DensityMatrix& rho, const NoiseModel& noise) {
  if (rho.dim() != noise.dim()) {
    throw std::invalid_argument("distorted_state: dimension mismatch");
  }
  Matrix rotated = conjugate_by(noise.u_c().matrix(), rho.matrix());
  rotated = 0.5 * (rotated + rotated.adjoint());  // scrub rounding asymmetry
  Matrix m = (1.0 - noise.p()) * rotated;
  m.diagonal().array() += noise.p() / static_cast<double>(rho.dim());
  return DensityMatrix(std::move(m));
}

RealVector noisy_probabilities(const DensityMatrix& rho, const UnitaryMatrix& u,
                               const NoiseModel& noise) {
  if (rho.dim() != u.dim() || rho.dim() != noise.dim()) {
    throw std::invalid_argument("noisy_probabilities: dimension mismatch");
  }
  const Eigen::Index d = rho.dim();
  const Matrix rotated = conjugate_by(u.matrix() * noise.u_c().matrix(), rho.matrix());

  RealVector probs(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double v = (1.0 - noise.p()) * rotated(i, i).real() +
                     noise.p() / static_cast<double>(d);
    if (v < -kProbErrorTol) {
      throw std::runtime_error("noisy_probabilities: probability below -1e-9");
    }
    probs[i] = std::max(v, 0.0);
  }
  const double total = probs.sum();
  if (std::abs(total - 1.0) > 1e-10) {
    throw std::runtime_error("noisy_probabilities: probabilities do not sum to 1");
  }
  return probs / total;
}

NoiseModel sample_coherent_distortion(int d, double epsilon_target, RngSeed seed) {
  if (d < 2) throw std::invalid_argument("sample_coherent_distortion: requires d >= 2");
  const double eps_max = std::sqrt(1.0 / static_cast<double>(d - 1));
  if (epsilon_target < 0.0 || epsilon_target > eps_max) {
    throw std::invalid_argument("sample_coherent_distortion: target outside [0, sqrt(1/(d-1))]");
  }
  if (epsilon_target == 0.0) {
    return NoiseModel(0.0, UnitaryMatrix::identity(d));
  }

  StreamRng rng(seed);
  Matrix h(d, d);
  for (int r = 0; r < d; ++r) {
    h(r, r) = Complex(rng.normal(), 0.0);
    for (int c = r + 1; c < d; ++c) {
      const Complex z = rng.complex_normal() / std::sqrt(2.0);  // E|H_rc|^2 = 1
      h(r, c) = z;
      h(c, r) = std::conj(z);
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  const RealVector evals = solver.eigenvalues();
  const Matrix& evecs = solver.eigenvectors();
  const auto unitary_at = [&](double alpha) {
    Vector phase(d);
    for (int k = 0; k < d; ++k) phase[k] = std::polar(1.0, alpha * evals[k]);
    return Matrix(evecs * phase.asDiagonal() * evecs.adjoint());
  };
  const auto epsilon_at = [&](double alpha) { return first_row_offdiag_rms(unitary_at(alpha)); };

  // Bracket the target with a growing alpha, then bisect.
  double lo = 0.0;
  double hi = 1e-3;
  int doublings = 0;
  while (epsilon_at(hi) < epsilon_target) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) {
      throw std::runtime_error("sample_coherent_distortion: target epsilon unreachable");
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double e = epsilon_at(mid);
    if (std::abs(e - epsilon_target) <= 1e-4 * epsilon_target) {
      return NoiseModel(0.0, UnitaryMatrix(unitary_at(mid)));
    }
    (e < epsilon_target ? lo : hi) = mid;
  }
  throw std::runtime_error("sample_coherent_distortion: bisection failed to converge");
}

double coherent_error(const DensityMatrix& psi_projector, const UnitaryMatrix& u_c) {
  if (psi_projector.dim() != u_c.dim()) {
    throw std::invalid_argument("coherent_error: dimension mismatch");
  }
  if (std::abs(purity(psi_projector) - 1.0) > 1e-9) {
    throw std::invalid_argument("coherent_error: state is not rank-1 pure");
  }
  const Matrix& rho = psi_projector.matrix();
  const Matrix rotated = conjugate_by(u_c.matrix(), rho);

  const double trace_form = (rho * rho).trace().real() - (rotated * rho).trace().real();

  // |psi> is the leading eigenvector of the projector.
  const Spectrum spec = spectral_decompose(psi_projector);
  const Vector psi = spec.eigenvectors.col(0);
  const Complex overlap = psi.adjoint() * u_c.matrix() * psi;
  const double overlap_form = 1.0 - std::norm(overlap);

  if (std::abs(trace_form - overlap_form) > 1e-12) {
    throw std::runtime_error("coherent_error: trace and overlap forms disagree beyond 1e-12");
  }
  return trace_form;
}

}  // namespace shadowtomo
