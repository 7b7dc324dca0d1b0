#pragma once

#include "shadowtomo/analysis.hpp"
#include "shadowtomo/haar.hpp"
#include "shadowtomo/matcore.hpp"
#include "shadowtomo/mesh.hpp"
#include "shadowtomo/noise.hpp"
#include "shadowtomo/shadow.hpp"

#include <string>
#include <vector>

namespace shadowtomo {

/// Malformed or unreadable data files. Messages name the offending row or
/// field where possible.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Reports and CSV columns are printed with 9 significant digits; matrix
/// payloads keep full round-trip precision so file-based pipelines preserve
/// the 1e-10 contracts.
std::string format_g9(double v);

// Matrix JSON: {"d": n, "re": [[...]], "im": [[...]]}, row-major.
std::string matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const std::string& text);

/// Accepts either a bare matrix object or a reconstruction file, in which
/// case the "estimate" payload is returned.
Matrix estimate_matrix_from_json(const std::string& text);

// JSON array of matrix objects, index-aligned with unitary ids.
std::string unitary_list_to_json(const std::vector<Matrix>& list);
std::vector<Matrix> unitary_list_from_json(const std::string& text);

// Mesh JSON: {"d", "cells": [{"layer","top","theta","phi"}],
//             "output_phases_re", "output_phases_im"}.
std::string mesh_to_json(const MeshConfig& cfg);
MeshConfig mesh_from_json(const std::string& text);

// Noise JSON: {"p", "u_c": matrix, "epsilon"}.
std::string noise_to_json(const NoiseModel& noise);
NoiseModel noise_from_json(const std::string& text);

// Snapshot bundle produced by `ingest` and consumed by `reconstruct`.
struct SnapshotFile {
  int d;
  std::string protocol;  // "I".."IV"
  std::vector<Snapshot> snapshots;
};
std::string snapshots_to_json(const SnapshotFile& file);
SnapshotFile snapshots_from_json(const std::string& text);

// Reconstruction JSON: {"d", "M", "frobenius_error", "estimate", "target"}.
std::string reconstruction_to_json(const ReconstructionResult& result);

// Analysis report JSON with fit diagnostics and the model curve.
std::string report_to_json(const AnalysisReport& report, int d);

// ScalingSeries CSV: optional '#' metadata lines, then
// "M,mse_mean,mse_stderr,replications".
std::string series_to_csv(const ScalingSeries& series, const std::string& meta);
ScalingSeries series_from_csv(const std::string& text);

// Observed-vs-model CSV: "M,observed_mse,predicted_mse".
std::string residuals_to_csv(const ScalingSeries& series,
                             const std::vector<TheoryPoint>& curve,
                             const std::string& meta);

// Voltage CSV: header "run_id,unitary_id,v0,...,v7", one row per (run, unitary).
std::vector<VoltageRecord> voltages_from_csv(const std::string& text);

// Weingarten check CSV: "pattern,d,analytic,mc_mean,mc_stderr,z_score".
std::string moment_checks_to_csv(const std::vector<MomentCheck>& checks, int d,
                                 const std::string& meta);

}  // namespace shadowtomo
