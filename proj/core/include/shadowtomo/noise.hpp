#pragma once

#include "shadowtomo/haar.hpp"
#include "shadowtomo/matcore.hpp"

namespace shadowtomo {

/// Phenomenological device error model: a depolarizing channel of strength p
/// (dynamic noise) plus a fixed unitary U_c multiplying every programmed
/// transformation (static coherent distortion). `epsilon` is the RMS of the
/// first-row off-diagonal entries of U_c,
///   epsilon = sqrt( 1/(d-1) * sum_{j != 1} |{U_c}_{1j}|^2 ),
/// the quantity the saturation floor is expressed in.
class NoiseModel {
 public:
  NoiseModel(double p, UnitaryMatrix u_c);

  double p() const { return p_; }
  const UnitaryMatrix& u_c() const { return u_c_; }
  double epsilon() const { return epsilon_; }
  int dim() const { return static_cast<int>(u_c_.dim()); }

 private:
  double p_;
  UnitaryMatrix u_c_;
  double epsilon_;
};

/// RMS of the first-row off-diagonal entries (the epsilon of a candidate U_c).
double first_row_offdiag_rms(const Matrix& u);

/// (1-p) rho + (p/d) I. Requires p in [0, 1].
DensityMatrix apply_depolarizing(const DensityMatrix& rho, double p);

/// The state the reconstruction actually converges to:
/// (1-p) U_c rho U_c† + (p/d) I. Its spectrum is (1-p) lambda_i + p/d,
/// independent of U_c.
DensityMatrix distorted_state(const DensityMatrix& rho, const NoiseModel& noise);

/// Corrupted single-setting output distribution
///   P(i) = (1-p) (U U_c rho U_c† U†)_ii + p/d.
/// Entries below -1e-12 indicate a model bug and throw; values in [-1e-12, 0)
/// are clamped to zero and the vector renormalized.
RealVector noisy_probabilities(const DensityMatrix& rho, const UnitaryMatrix& u,
                               const NoiseModel& noise);

/// Draws U_c = exp(i alpha H) with H from a Gaussian Hermitian ensemble
/// (unit-variance complex off-diagonals, standard-normal real diagonal) and
/// calibrates alpha by bisection until the stored epsilon matches
/// epsilon_target within 1e-4 relative. Returns a model with p = 0.
/// Requires 0 <= epsilon_target <= sqrt(1/(d-1)).
NoiseModel sample_coherent_distortion(int d, double epsilon_target, RngSeed seed);

/// Coherent error of a pure state |psi><psi| under U_c:
///   Tr(rho^2) - Tr(U_c rho U_c† rho) = 1 - |<psi|U_c|psi>|^2.
/// Both forms are evaluated and must agree within 1e-12.
double coherent_error(const DensityMatrix& psi_projector, const UnitaryMatrix& u_c);

}  // namespace shadowtomo
