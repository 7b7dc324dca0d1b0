#pragma once

#include "shadowtomo/noise.hpp"
#include "shadowtomo/shadow.hpp"

#include <optional>
#include <vector>

namespace shadowtomo {

/// Raised when the fitted data contradicts the error model (e.g. a scaled
/// slope significantly below the depolarization term).
class ModelInconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r_squared = 1.0;
};

struct TheoryPoint {
  long M;
  double mse;
};

struct AnalysisReport {
  double p_hat = 0.0;
  double epsilon_hat = 0.0;
  LinearFit fit;
  double floor = 0.0;
  std::optional<double> m_crit;  // absent when the floor vanishes
  std::vector<TheoryPoint> theory_curve;
};

/// Depolarization strength from the leading reconstructed eigenvalue D1 and
/// the leading target eigenvalue lambda1:
///   p = (lambda1 - D1) / (lambda1 - 1/d), clamped to [0, 1].
/// Requires lambda1 > 1/d and D1 <= lambda1 + 0.05 (statistical overshoot).
double estimate_p(double d1, double lambda1, int d);

/// Least squares of y = M * mse_mean against x = M. Weighted by
/// 1/(M * mse_stderr)^2 when every grid point carries a positive stderr,
/// ordinary least squares otherwise. The slope estimates the systematic
/// floor; the intercept estimates (1-p)^2 (d-1).
LinearFit scaled_error_fit(const ScalingSeries& series);

/// Coherent-distortion magnitude from the scaled-error slope:
///   epsilon = sqrt( (slope - p^2 (1 - 1/d)) / (2 (1-p) (d-1)) ).
/// A radicand in [-1e-12, 0] returns 0; anything lower throws
/// ModelInconsistencyError.
double estimate_epsilon(double slope, double p, int d);

/// Residual error of the distorted state:
///   p^2 [Tr(rho^2) - 1/d] + 2 (1-p) [Tr(rho^2) - Tr(U_c rho U_c† rho)].
/// Checked internally against ||distorted_state(rho) - rho||_F^2 (1e-10).
double systematic_floor(const DensityMatrix& rho, const NoiseModel& noise);

/// Pure-state model floor p^2 (1 - 1/d) + 2 (1-p) (d-1) epsilon^2.
double systematic_floor_pure(int d, double p, double epsilon);

/// Pure-state MSE model (1-p)^2 (d-1)/M + floor evaluated on a grid.
std::vector<TheoryPoint> predict_mse_curve(int d, double p, double epsilon,
                                           const std::vector<long>& m_grid);

/// Sample count where the statistical term equals the systematic floor:
///   M_crit = (1-p)^2 (d-1) / floor.
/// Throws std::domain_error when the floor vanishes (purely statistical regime).
double detect_horizon(int d, double p, double epsilon);

/// Builds the report from a measured series and the leading eigenvalue of the
/// final reconstruction. The epsilon radicand is given 3-sigma statistical
/// slack from the fitted slope before the strict model-inconsistency check.
AnalysisReport analyze_series(const ScalingSeries& series, double leading_eigenvalue,
                              double lambda1, int d);

/// Report from externally supplied slope + leading eigenvalue (no series).
AnalysisReport analyze_point_estimates(double slope, double leading_eigenvalue,
                                       double lambda1, int d);

/// End-to-end self test: simulate a trivial-state protocol (I for d = 8,
/// III for d = 4) with injected noise (p_true, epsilon_true), then recover
/// p via the spectrum and epsilon via the scaled-error fit.
AnalysisReport closed_loop_recovery(int d, double p_true, double epsilon_true, long M,
                                    int replications, RngSeed seed, int workers = 1);

}  // namespace shadowtomo
