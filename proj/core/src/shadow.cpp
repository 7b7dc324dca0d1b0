#include "shadowtomo/shadow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace shadowtomo {

namespace {

// Snapshot streams: replication r, snapshot k -> stream r * kStreamStride + k.
// Stream 2^31 + r is reserved for the click-outcome draws of replication r.
constexpr std::uint32_t kStreamStride = 1u << 24;
constexpr int kMaxReplications = 1 << 7;

RealVector validate_probabilities(RealVector probs) {
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] < -1e-9) {
      throw std::invalid_argument("Snapshot: probability below -1e-9 or non-finite");
    }
    probs[i] = std::max(probs[i], 0.0);
  }
  const double total = probs.sum();
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("Snapshot: probabilities do not sum to 1 within 1e-9");
  }
  return probs / total;
}

}  // namespace

Snapshot::Snapshot(long id, UnitaryMatrix u, RealVector probs)
    : unitary_id(id),
      reported_unitary(std::move(u)),
      probabilities(validate_probabilities(std::move(probs))) {
  if (probabilities.size() != reported_unitary.dim()) {
    throw std::invalid_argument("Snapshot: probability vector length differs from dimension");
  }
}

ProtocolSpec ProtocolSpec::make(ProtocolKind kind, RngSeed haar_seed,
                                RngSeed hidden_randomizer_seed) {
  ProtocolSpec spec;
  spec.kind = kind;
  spec.d_full = 8;
  spec.d_sub = (kind == ProtocolKind::III || kind == ProtocolKind::IV) ? 4 : 8;
  spec.haar_seed = haar_seed;
  spec.hidden_randomizer_seed = hidden_randomizer_seed;
  return spec;
}

namespace {

bool has_hidden_randomizer(ProtocolKind kind) {
  return kind == ProtocolKind::II || kind == ProtocolKind::IV;
}

UnitaryMatrix hidden_randomizer(const ProtocolSpec& spec) {
  return has_hidden_randomizer(spec.kind) ? sample_haar(spec.d_sub, spec.hidden_randomizer_seed)
                                          : UnitaryMatrix::identity(spec.d_sub);
}

}  // namespace

DensityMatrix protocol_target(const ProtocolSpec& spec) {
  const DensityMatrix trivial = DensityMatrix::basis_projector(spec.d_sub, 0);
  if (!has_hidden_randomizer(spec.kind)) return trivial;
  const UnitaryMatrix u_rdm = hidden_randomizer(spec);
  Matrix rotated = u_rdm.matrix() * trivial.matrix() * u_rdm.matrix().adjoint();
  rotated = 0.5 * (rotated + rotated.adjoint());
  return DensityMatrix(std::move(rotated));
}

ReconstructionResult::ReconstructionResult(HermitianEstimate est, long m, DensityMatrix tgt)
    : estimate(std::move(est)),
      M(m),
      target(std::move(tgt)),
      frobenius_error(frobenius_distance(estimate.matrix(), target.matrix())) {
  if (M < 1) throw std::invalid_argument("ReconstructionResult: M must be >= 1");
}

RealVector born_probabilities(const DensityMatrix& rho, const UnitaryMatrix& u) {
  if (rho.dim() != u.dim()) {
    throw std::invalid_argument("born_probabilities: dimension mismatch");
  }
  const Matrix rotated = u.matrix() * rho.matrix() * u.matrix().adjoint();
  RealVector probs = rotated.diagonal().real();
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] < -1e-9) throw std::runtime_error("born_probabilities: negative probability");
    probs[i] = std::max(probs[i], 0.0);
  }
  return probs / probs.sum();
}

HermitianEstimate snapshot_intensity_estimator(const Snapshot& s) {
  const Eigen::Index d = s.reported_unitary.dim();
  const Matrix& u = s.reported_unitary.matrix();
  Matrix est = (static_cast<double>(d) + 1.0) *
               (u.adjoint() * s.probabilities.asDiagonal() * u);
  est.diagonal().array() -= 1.0;
  est = 0.5 * (est + est.adjoint());
  return HermitianEstimate(std::move(est));
}

HermitianEstimate snapshot_click_estimator(const Snapshot& s, RngSeed seed) {
  StreamRng rng(seed);
  const int outcome = rng.categorical(s.probabilities);
  const Eigen::Index d = s.reported_unitary.dim();
  const Vector basis_vec = s.reported_unitary.matrix().row(outcome).adjoint();
  Matrix est = (static_cast<double>(d) + 1.0) * (basis_vec * basis_vec.adjoint());
  est.diagonal().array() -= 1.0;
  est = 0.5 * (est + est.adjoint());
  return HermitianEstimate(std::move(est));
}

HermitianEstimate reconstruct(const std::vector<Snapshot>& snapshots, int target_d) {
  if (snapshots.empty()) throw std::invalid_argument("reconstruct: empty snapshot list");
  Matrix mean = Matrix::Zero(target_d, target_d);
  for (const Snapshot& s : snapshots) {
    if (s.reported_unitary.dim() != target_d) {
      throw std::invalid_argument("reconstruct: snapshot dimension mismatch");
    }
    mean += snapshot_intensity_estimator(s).matrix();
  }
  mean /= static_cast<double>(snapshots.size());
  return HermitianEstimate(std::move(mean));
}

double expected_mse(int d, long M, double purity) {
  if (M < 1) throw std::invalid_argument("expected_mse: M must be >= 1");
  const double dd = static_cast<double>(d);
  if (purity < 1.0 / dd - 1e-12 || purity > 1.0 + 1e-12) {
    throw std::invalid_argument("expected_mse: purity outside [1/d, 1]");
  }
  return (dd * purity - 1.0) / static_cast<double>(M);
}

std::vector<long> make_log_grid(long lo, long hi, int points) {
  if (lo < 1 || hi < lo || points < 1) {
    throw std::invalid_argument("make_log_grid: invalid range");
  }
  std::vector<long> grid;
  grid.reserve(points);
  const double llo = std::log10(static_cast<double>(lo));
  const double lhi = std::log10(static_cast<double>(hi));
  for (int k = 0; k < points; ++k) {
    const double t = (points == 1) ? 1.0 : static_cast<double>(k) / (points - 1);
    const long m = std::llround(std::pow(10.0, llo + t * (lhi - llo)));
    if (grid.empty() || m > grid.back()) grid.push_back(m);
  }
  if (grid.back() != hi) grid.push_back(hi);
  return grid;
}

ReplicationOutcome run_protocol_replication(const ProtocolSpec& spec,
                                            const std::vector<long>& m_grid,
                                            const std::optional<NoiseModel>& noise,
                                            int replication) {
  if (m_grid.empty()) throw std::invalid_argument("run_protocol_replication: empty grid");
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    if (m_grid[i] < 1 || (i > 0 && m_grid[i] <= m_grid[i - 1])) {
      throw std::invalid_argument("run_protocol_replication: grid must be strictly increasing and >= 1");
    }
  }
  const long m_max = m_grid.back();
  if (replication < 0 || replication >= kMaxReplications || m_max >= kStreamStride) {
    throw std::invalid_argument("run_protocol_replication: stream budget exceeded");
  }
  if (noise && noise->dim() != spec.d_sub) {
    throw std::invalid_argument("run_protocol_replication: noise dimension differs from protocol subspace");
  }

  const int d_sub = spec.d_sub;
  const UnitaryMatrix u_rdm = hidden_randomizer(spec);
  const DensityMatrix rho_sub = DensityMatrix::basis_projector(d_sub, 0);
  const DensityMatrix rho_full = DensityMatrix::basis_projector(spec.d_full, 0);
  const DensityMatrix target = protocol_target(spec);
  const SubspaceEmbedding emb = spec.embedding();

  Matrix acc = Matrix::Zero(d_sub, d_sub);  // running sum of U† diag(p) U
  std::vector<double> mse_at_grid;
  mse_at_grid.reserve(m_grid.size());

  std::size_t next_grid = 0;
  Matrix final_estimate;
  const std::uint32_t stream_base =
      spec.haar_seed.stream + static_cast<std::uint32_t>(replication) * kStreamStride;

  for (long k = 1; k <= m_max; ++k) {
    const UnitaryMatrix u_haar =
        sample_haar(d_sub, spec.haar_seed.with_stream(stream_base + static_cast<std::uint32_t>(k)));
    const Matrix u_meas_sub = u_haar.matrix() * u_rdm.matrix();

    RealVector probs_sub;
    if (noise) {
      // Device noise acts within the protocol subspace.
      probs_sub = noisy_probabilities(rho_sub, UnitaryMatrix(u_meas_sub), *noise);
    } else {
      // Program the full device, read all channels, renormalize the window.
      const UnitaryMatrix u_meas_full = embed_unitary(UnitaryMatrix(u_meas_sub), emb);
      const RealVector probs_full = born_probabilities(rho_full, u_meas_full);
      VoltageRecord rec{0, k, std::vector<double>(probs_full.data(), probs_full.data() + probs_full.size())};
      probs_sub = normalize_voltages(rec, spec.uses_subspace()
                                              ? std::optional<SubspaceEmbedding>(emb)
                                              : std::nullopt);
    }

    acc += u_haar.matrix().adjoint() * probs_sub.asDiagonal() * u_haar.matrix();

    if (next_grid < m_grid.size() && k == m_grid[next_grid]) {
      Matrix est = (static_cast<double>(d_sub) + 1.0) * (acc / static_cast<double>(k));
      est.diagonal().array() -= 1.0;
      est = 0.5 * (est + est.adjoint());
      mse_at_grid.push_back(std::pow(frobenius_distance(est, target.matrix()), 2));
      if (k == m_max) final_estimate = std::move(est);
      ++next_grid;
    }
  }

  return ReplicationOutcome{std::move(mse_at_grid), HermitianEstimate(std::move(final_estimate))};
}

std::vector<ReplicationOutcome> run_replications(const ProtocolSpec& spec,
                                                 const std::vector<long>& m_grid,
                                                 const std::optional<NoiseModel>& noise,
                                                 int replications, int workers) {
  if (replications < 1 || replications > kMaxReplications) {
    throw std::invalid_argument("run_replications: replications outside [1, 128]");
  }
  std::vector<std::optional<ReplicationOutcome>> slots(replications);
  if (workers <= 1) {
    for (int r = 0; r < replications; ++r) {
      slots[r] = run_protocol_replication(spec, m_grid, noise, r);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int r = next.fetch_add(1); r < replications; r = next.fetch_add(1)) {
        slots[r] = run_protocol_replication(spec, m_grid, noise, r);
      }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(workers, replications);
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<ReplicationOutcome> outcomes;
  outcomes.reserve(replications);
  for (auto& s : slots) outcomes.push_back(std::move(*s));
  return outcomes;
}

ScalingSeries aggregate_series(int d, const std::vector<long>& m_grid,
                               const std::vector<ReplicationOutcome>& outcomes) {
  const int replications = static_cast<int>(outcomes.size());
  ScalingSeries series;
  series.d = d;
  series.grid.reserve(m_grid.size());
  for (std::size_t g = 0; g < m_grid.size(); ++g) {
    double mean = 0.0;
    for (const auto& o : outcomes) mean += o.mse_at_grid[g];
    mean /= replications;
    double var = 0.0;
    for (const auto& o : outcomes) var += std::pow(o.mse_at_grid[g] - mean, 2);
    const double std_error =
        (replications > 1) ? std::sqrt(var / (replications - 1) / replications) : 0.0;
    series.grid.push_back(ScalingPoint{m_grid[g], mean, std_error, replications});
  }
  return series;
}

ProtocolRun run_protocol(const ProtocolSpec& spec, long M,
                         const std::optional<NoiseModel>& noise,
                         std::vector<long> m_grid, int replications, int workers) {
  if (M < 1) throw std::invalid_argument("run_protocol: M must be >= 1");
  if (m_grid.empty()) {
    m_grid = make_log_grid(std::min<long>(10, M), M, 20);
  }
  std::sort(m_grid.begin(), m_grid.end());
  m_grid.erase(std::unique(m_grid.begin(), m_grid.end()), m_grid.end());
  if (m_grid.front() < 1 || m_grid.back() > M) {
    throw std::invalid_argument("run_protocol: m_grid must lie within [1, M]");
  }
  if (m_grid.back() != M) m_grid.push_back(M);

  const std::vector<ReplicationOutcome> outcomes =
      run_replications(spec, m_grid, noise, replications, workers);
  ScalingSeries series = aggregate_series(spec.d_sub, m_grid, outcomes);
  ReconstructionResult final_result(outcomes.front().final_estimate, M, protocol_target(spec));
  return ProtocolRun{std::move(final_result), std::move(series)};
}

RealVector normalize_voltages(const VoltageRecord& rec,
                              const std::optional<SubspaceEmbedding>& emb) {
  const int n = static_cast<int>(rec.voltages.size());
  int lo = 0;
  int len = n;
  if (emb) {
    if (emb->full_dim != n) {
      throw std::invalid_argument("normalize_voltages: embedding does not match record length");
    }
    lo = emb->offset;
    len = emb->sub_dim;
  }
  RealVector probs(len);
  double total = 0.0;
  for (int i = 0; i < len; ++i) {
    const double v = rec.voltages[lo + i];
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("normalize_voltages: voltages must be finite and nonnegative");
    }
    probs[i] = v;
    total += v;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("normalize_voltages: no power in the normalization window");
  }
  return probs / total;
}

}  // namespace shadowtomo
