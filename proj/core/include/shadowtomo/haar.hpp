#pragma once

#include "shadowtomo/matcore.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace shadowtomo {

/// A (seed, stream) pair fully determines a sample sequence. Disjoint streams
/// are statistically independent, so parallel work split by stream reproduces
/// the serial result bit for bit.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;

  RngSeed with_stream(std::uint32_t s) const { return RngSeed{seed, s}; }
};

/// Pinned random source.
///
/// State: std::mt19937_64 seeded with splitmix64(seed + 0x9E3779B97F4A7C15 * (stream + 1)).
/// Uniforms: (x >> 11) * 2^-53 in [0, 1).
/// Normals: Box-Muller, z0 = sqrt(-2 ln u1) cos(2 pi u2) and
///          z1 = sqrt(-2 ln u1) sin(2 pi u2) with u1 = 1 - uniform() in (0, 1].
/// normal() consumes one Box-Muller pair and returns z0; complex_normal()
/// returns z0 + i z1. The transforms are spelled out here so another
/// implementation can reproduce the streams exactly.
class StreamRng {
 public:
  explicit StreamRng(RngSeed s);

  std::uint64_t raw() { return gen_(); }
  double uniform();
  double normal();
  Complex complex_normal();

  /// Index into [0, n) with probability weights[i]; weights must be
  /// nonnegative and sum to ~1 (the last bucket absorbs rounding).
  int categorical(const RealVector& weights);

 private:
  std::mt19937_64 gen_;
};

/// Haar-distributed d x d unitary: complex Ginibre matrix (i.i.d. standard
/// normal real and imaginary parts), QR factorization, then the diagonal
/// phase fix D_kk = R_kk / |R_kk| (D_kk = 1 when R_kk = 0), returning Q D.
/// Deterministic given the seed.
UnitaryMatrix sample_haar(int d, RngSeed seed);

/// Weingarten function for fourth moments (q = 2).
enum class WgPartition { OneOne, Two };

/// Wg(1^2, d) = 1/(d^2-1), Wg(2, d) = -1/(d(d^2-1)). Requires d >= 2.
double weingarten_value(WgPartition partition, int d);

/// Index tuple of the fourth moment E[U_{i1 j1} U_{i2 j2} U*_{i1p j1p} U*_{i2p j2p}].
/// Indices are 1-based in [1, d].
struct MomentIndex {
  int i1, j1, i2, j2;
  int i1p, j1p, i2p, j2p;
};

/// Closed-form fourth moment: the two row-delta patterns pair with the two
/// column-delta patterns, weighted by the Weingarten values above.
Complex fourth_moment_analytic(const MomentIndex& idx, int d);

struct McMoment {
  Complex mean;
  double std_error;  // standard error of the mean, sqrt(E|z - mean|^2 / n)
};

/// Monte-Carlo estimate of the same moment over `samples` Haar draws.
/// Requires samples >= 1000.
McMoment fourth_moment_mc(const MomentIndex& idx, int d, long samples, RngSeed seed);

/// (delta_{ja} delta_{bk} + delta_{jk} delta_{ba}) / (d (d+1)): the
/// single-row fourth moment E[U*_{ia} U_{ij} U*_{ik} U_{ib}] (any fixed i)
/// that the reconstruction identity rests on. Indices 1-based.
double reduced_fourth_moment(int a, int j, int k, int b, int d);

struct MomentCheck {
  std::string pattern;  // e.g. "1212-1111": row indices then column indices
  MomentIndex idx;
  double analytic;
  Complex mc_mean;
  double mc_stderr;
  double z_score;  // |mc_mean - analytic| / mc_stderr
};

/// Runs the Monte-Carlo check for the 16 canonical index-class patterns
/// (row pattern x column pattern, each from {1111, 1212, 1221, 1112}),
/// reusing one Haar draw per sample across all patterns.
std::vector<MomentCheck> verify_fourth_moments(int d, long samples, RngSeed seed);

}  // namespace shadowtomo
