#pragma once

#include "shadowtomo/haar.hpp"
#include "shadowtomo/matcore.hpp"
#include "shadowtomo/mesh.hpp"
#include "shadowtomo/noise.hpp"

#include <optional>
#include <vector>

namespace shadowtomo {

/// One measurement setting: the unitary handed to the reconstruction and the
/// measured output distribution. Probabilities are validated (nonnegative,
/// sum 1 within 1e-9) and then renormalized exactly, which pins the trace of
/// every derived estimator.
struct Snapshot {
  long unitary_id;
  UnitaryMatrix reported_unitary;
  RealVector probabilities;

  Snapshot(long id, UnitaryMatrix u, RealVector probs);
};

enum class ProtocolKind { I, II, III, IV };

/// The four benchmark configurations on an 8-channel device:
///   I   trivial 8-dim state, Haar unitaries
///   II  hidden 8x8 randomizer composed with the Haar unitaries
///   III trivial state in the 4-dim subspace of channels 0..3
///   IV  hidden 4x4 randomizer inside that subspace
/// The hidden randomizer is fixed for a whole run and is only visible to the
/// device program and the target-state computation, never to reconstruction.
struct ProtocolSpec {
  ProtocolKind kind;
  int d_full;
  int d_sub;
  RngSeed haar_seed;
  RngSeed hidden_randomizer_seed;

  static ProtocolSpec make(ProtocolKind kind, RngSeed haar_seed,
                           RngSeed hidden_randomizer_seed = RngSeed{0, 0});

  bool uses_subspace() const { return d_sub != d_full; }
  SubspaceEmbedding embedding() const { return SubspaceEmbedding(d_sub, d_full, 0); }
};

/// What the protocol should reconstruct in the absence of noise.
DensityMatrix protocol_target(const ProtocolSpec& spec);

struct ReconstructionResult {
  HermitianEstimate estimate;
  long M;
  DensityMatrix target;
  double frobenius_error;

  ReconstructionResult(HermitianEstimate est, long m, DensityMatrix tgt);
};

struct ScalingPoint {
  long M;
  double mse_mean;
  double mse_stderr;
  int replications;
};

/// Squared-Frobenius reconstruction error versus sample count, averaged over
/// independent replications.
struct ScalingSeries {
  int d = 0;
  std::vector<ScalingPoint> grid;
};

/// One row of a raw detector dump: photodiode voltages for one applied
/// unitary (arbitrary units, nonnegative).
struct VoltageRecord {
  long run_id;
  long unitary_id;
  std::vector<double> voltages;
};

/// Born rule: diagonal of U rho U†.
RealVector born_probabilities(const DensityMatrix& rho, const UnitaryMatrix& u);

/// Weighted-sum estimator from the full output distribution:
///   (d+1) sum_k p_k U† |k><k| U - I.
/// Trace is 1 exactly up to rounding.
HermitianEstimate snapshot_intensity_estimator(const Snapshot& s);

/// Single-outcome estimator: samples b from the snapshot distribution and
/// returns (d+1) U† |b><b| U - I. Carries outcome shot noise on top of the
/// unitary-sampling variance.
HermitianEstimate snapshot_click_estimator(const Snapshot& s, RngSeed seed);

/// Mean of the intensity estimators. Throws on an empty list or mixed dims.
HermitianEstimate reconstruct(const std::vector<Snapshot>& snapshots, int target_d);

/// Statistical error law E||rho_hat^(M) - rho||_F^2 = (d Tr(rho^2) - 1) / M.
double expected_mse(int d, long M, double purity);

/// n log-spaced sample counts from lo to hi (inclusive, deduplicated).
std::vector<long> make_log_grid(long lo, long hi, int points);

struct ReplicationOutcome {
  std::vector<double> mse_at_grid;
  HermitianEstimate final_estimate;
};

/// Runs one replication of a protocol: snapshots are generated from
/// per-snapshot RNG streams, cumulative reconstructions are evaluated at the
/// grid points, and the final estimate is returned. `replication` selects the
/// disjoint stream block, so results do not depend on scheduling.
ReplicationOutcome run_protocol_replication(const ProtocolSpec& spec,
                                            const std::vector<long>& m_grid,
                                            const std::optional<NoiseModel>& noise,
                                            int replication);

/// Runs `replications` independent replications, optionally across worker
/// threads. The outcome vector is ordered by replication index regardless of
/// scheduling.
std::vector<ReplicationOutcome> run_replications(const ProtocolSpec& spec,
                                                 const std::vector<long>& m_grid,
                                                 const std::optional<NoiseModel>& noise,
                                                 int replications, int workers);

/// Per-grid-point mean and standard error over replication outcomes.
ScalingSeries aggregate_series(int d, const std::vector<long>& m_grid,
                               const std::vector<ReplicationOutcome>& outcomes);

struct ProtocolRun {
  ReconstructionResult final_result;  // replication 0 at max M
  ScalingSeries series;
};

/// Full protocol run: `replications` independent replications aggregated into
/// a ScalingSeries. `workers` > 1 distributes replications across threads
/// without changing the output.
ProtocolRun run_protocol(const ProtocolSpec& spec, long M,
                         const std::optional<NoiseModel>& noise,
                         std::vector<long> m_grid, int replications = 20,
                         int workers = 1);

/// Voltages -> probabilities over the active window (all channels, or the
/// embedded subspace). Throws if the window carries no power.
RealVector normalize_voltages(const VoltageRecord& rec,
                              const std::optional<SubspaceEmbedding>& emb);

}  // namespace shadowtomo
