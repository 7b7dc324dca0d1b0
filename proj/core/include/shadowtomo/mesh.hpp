#pragma once

#include "shadowtomo/haar.hpp"
#include "shadowtomo/matcore.hpp"

#include <optional>
#include <vector>

namespace shadowtomo {

/// One Mach-Zehnder unit cell: internal phase theta, external phase phi,
/// acting on channels (top_channel, top_channel + 1). Cells in the same
/// layer act on disjoint channel pairs.
struct MZICell {
  double theta = 0.0;  // [0, 2*pi)
  double phi = 0.0;    // [0, 2*pi)
  int layer = 0;
  int top_channel = 0;
};

/// Block-diagonal embedding of a sub_dim unitary into full_dim channels,
/// starting at `offset`.
struct SubspaceEmbedding {
  int sub_dim;
  int full_dim;
  int offset;

  SubspaceEmbedding(int sub, int full, int off);
};

/// Phase-level description of the programmable interferometer: an ordered
/// rectangular mesh of unit cells followed by per-channel output phases.
class MeshConfig {
 public:
  MeshConfig(int d, std::vector<MZICell> cells, Vector output_phases);

  int dim() const { return d_; }
  const std::vector<MZICell>& cells() const { return cells_; }
  const Vector& output_phases() const { return output_phases_; }

 private:
  int d_;
  std::vector<MZICell> cells_;
  Vector output_phases_;  // unit-modulus, length d
};

/// 2x2 transfer matrix of a unit cell,
///   S(theta, phi) = 1/2 [ 1 - e^{-i theta},      -i (e^{-i theta} + 1) e^{-i phi} ]
///                       [ -i (e^{-i theta} + 1), -(1 - e^{-i theta}) e^{-i phi}   ],
/// i.e. a 50:50 interferometer with internal phase theta and an external
/// phase phi on the second channel. Phases are wrapped mod 2*pi.
UnitaryMatrix unit_cell_matrix(double theta, double phi);

/// Product of the embedded unit cells in layer order, followed by the output
/// phases. Throws if two cells in the same layer touch a common channel.
UnitaryMatrix compose_mesh(const MeshConfig& cfg);

/// Rectangular (Clements-style) decomposition: d(d-1)/2 cells plus d output
/// phases whose composition reproduces the input within 1e-10 in Frobenius
/// norm. Requires d >= 2.
MeshConfig decompose_unitary(const UnitaryMatrix& u);

/// Direct sum: u_sub on [offset, offset + sub_dim), identity elsewhere.
/// Off-block entries are exactly zero.
UnitaryMatrix embed_unitary(const UnitaryMatrix& u_sub, const SubspaceEmbedding& emb);

/// Shifts every theta and phi by an independent N(0, sigma^2) draw, wrapped
/// mod 2*pi. Layers, channels and output phases are untouched.
MeshConfig perturb_mesh(const MeshConfig& cfg, double sigma, RngSeed seed);

}  // namespace shadowtomo
