// Acceptance suite: end-to-end checks of the statistical scaling law, the
// Weingarten oracle, the published-parameter arithmetic, the noise-model
// identities, the saturation floor, closed-loop recovery, the mesh round
// trip and the estimator contracts. One [PASS]/[FAIL] line per criterion;
// the process exits with the number of failed criteria.

#include "shadowtomo/analysis.hpp"
#include "shadowtomo/io.hpp"
#include "shadowtomo/mesh.hpp"
#include "shadowtomo/shadow.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>
#include <vector>

using namespace shadowtomo;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  bool ok = true;
  std::vector<std::string> notes;

  void check(bool cond, const std::string& note) {
    if (!cond) ok = false;
    notes.push_back(std::string(cond ? "ok: " : "FAILED: ") + note);
  }
};

int g_failures = 0;

void run_criterion(int number, const std::string& title,
                   const std::function<void(Criterion&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Criterion c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.check(false, std::string("unexpected exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %d: %s (%.1fs)\n", c.ok ? "PASS" : "FAIL", number, title.c_str(),
              secs);
  for (const auto& note : c.notes) {
    if (!c.ok || note.rfind("FAILED", 0) == 0) std::printf("        %s\n", note.c_str());
  }
  std::fflush(stdout);
  if (!c.ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double loglog_slope(const ScalingSeries& series) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(series.grid.size());
  for (const auto& pt : series.grid) {
    const double x = std::log(static_cast<double>(pt.M));
    const double y = std::log(pt.mse_mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- criterion 1: ideal statistical scaling --------------------------------

void statistical_scaling(Criterion& c) {
  struct Case {
    ProtocolKind kind;
    int d;
    double norm_at_5000;
  };
  const std::vector<Case> cases = {{ProtocolKind::I, 8, 0.037}, {ProtocolKind::III, 4, 0.024}};
  for (const auto& cs : cases) {
    std::vector<long> grid = make_log_grid(10, 100000, 20);
    grid.push_back(5000);
    const ProtocolSpec spec = ProtocolSpec::make(cs.kind, RngSeed{20250, 0});
    const ProtocolRun run = run_protocol(spec, 100000, std::nullopt, grid, 20, 1);

    const double slope = loglog_slope(run.series);
    c.check(std::abs(slope + 1.0) <= 0.05,
            "d=" + std::to_string(cs.d) + " log-log slope " + fmt(slope) + " within -1.00 +/- 0.05");

    double norm5000 = 0.0;
    for (const auto& pt : run.series.grid) {
      if (pt.M == 5000) norm5000 = std::sqrt(pt.mse_mean);
    }
    c.check(std::abs(norm5000 - cs.norm_at_5000) <= 0.15 * cs.norm_at_5000,
            "d=" + std::to_string(cs.d) + " Frobenius norm at M=5000 is " + fmt(norm5000) +
                " vs " + fmt(cs.norm_at_5000) + " (15%)");
  }
}

// ---- criterion 2: Weingarten Monte-Carlo verification ----------------------

void weingarten_verification(Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int d : {2, 4, 8}) {
    const auto checks = verify_fourth_moments(d, 1000000, RngSeed{20252, 0});
    double worst = 0.0;
    for (const auto& chk : checks) worst = std::max(worst, chk.z_score);
    c.check(worst <= 5.0,
            "d=" + std::to_string(d) + " all 16 patterns, worst |z| = " + fmt(worst));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.check(secs < 120.0, "runtime " + fmt(secs) + "s under 120s");
}

// ---- criterion 3: published-table arithmetic through the CLI ---------------

double report_value(const std::string& json, const std::string& key) {
  const std::string needle = "\"" + key + "\": ";
  const auto pos = json.find(needle);
  if (pos == std::string::npos) throw std::runtime_error("report key missing: " + key);
  return std::strtod(json.c_str() + pos + needle.size(), nullptr);
}

void table_arithmetic(Criterion& c) {
  struct Row {
    const char* protocol;
    int d;
    const char* eigenvalues;
    double slope;
    double p_expected;
    double eps_expected;
  };
  const std::vector<Row> rows = {
      {"I", 8, "0.90889,-0.00820,-0.00075,0.03102,0.02638,0.02146,0.01411,0.00707", 1.12873e-2,
       0.10412, 0.01198},
      {"II", 8, "0.90105,0.04071,0.02831,0.01643,0.01461,0.00754,0.00171,-0.01038", 1.18221e-2,
       0.11308, 0.01164},
      {"III", 4, "0.95372,0.00669,0.02906,0.01958", 3.80301e-3, 0.06170, 0.01297},
      {"IV", 4, "0.98087,0.02503,0.01116,-0.01150", 1.43278e-3, 0.02550, 0.01271},
  };

  const fs::path dir = fs::temp_directory_path() / "shadowtomo_acceptance";
  fs::create_directories(dir);
  for (const auto& row : rows) {
    const fs::path out = dir / (std::string("report_") + row.protocol + ".json");
    std::ostringstream cmd;
    cmd << SHADOWTOMO_CLI_PATH << " analyze --d " << row.d << " --slope " << row.slope
        << " --eigenvalues " << row.eigenvalues << " --out " << out.string()
        << " > /dev/null 2>&1";
    const int status = std::system(cmd.str().c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    c.check(code == 0, std::string("analyze exits 0 for protocol ") + row.protocol);
    if (code != 0) continue;

    const std::string json = read_text_file(out.string());
    const double p_hat = report_value(json, "p_hat");
    const double eps_hat = report_value(json, "epsilon_hat");
    c.check(std::abs(p_hat - row.p_expected) <= 5e-5,
            std::string("protocol ") + row.protocol + " p " + fmt(p_hat) + " vs " +
                fmt(row.p_expected) + " (5e-5)");
    c.check(std::abs(eps_hat - row.eps_expected) <= 5e-5,
            std::string("protocol ") + row.protocol + " epsilon " + fmt(eps_hat) + " vs " +
                fmt(row.eps_expected) + " (5e-5)");
  }
}

// ---- criterion 4: noise-model identity --------------------------------------

void noise_identity(Criterion& c) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = (t % 2) ? 4 : 8;
    const UnitaryMatrix basis = sample_haar(d, RngSeed{20254, static_cast<std::uint32_t>(t)});
    Matrix rho_m = basis.matrix().col(0) * basis.matrix().col(0).adjoint();
    rho_m = 0.5 * (rho_m + rho_m.adjoint());
    const DensityMatrix rho(rho_m);
    const NoiseModel distortion = sample_coherent_distortion(
        d, 0.001 + 0.003 * (t % 10), RngSeed{30254, static_cast<std::uint32_t>(t)});
    const NoiseModel noise(0.002 * (t % 50), distortion.u_c());

    const double closed_form = systematic_floor(rho, noise);
    const double direct =
        std::pow(frobenius_distance(distorted_state(rho, noise).matrix(), rho.matrix()), 2);
    worst = std::max(worst, std::abs(closed_form - direct));
  }
  c.check(worst <= 1e-10, "worst |closed form - direct| = " + fmt(worst) + " over 100 pairs");
}

// ---- criterion 5: saturation floor and critical sample size ----------------

void hardware_floor(Criterion& c) {
  const double p = 0.10412, eps = 0.01198;
  const double m_crit = detect_horizon(8, p, eps);
  c.check(std::abs(m_crit - 498.0) <= 5.0, "M_crit = " + fmt(m_crit) + " vs about 498");

  const NoiseModel distortion = sample_coherent_distortion(8, eps, RngSeed{20255, 0});
  const NoiseModel noise(p, distortion.u_c());
  const ProtocolSpec spec = ProtocolSpec::make(ProtocolKind::I, RngSeed{20256, 0});

  // (a) statistical regime: the error still tracks the ideal law in the
  // decade below M_crit/3.
  const std::vector<long> early = {100, 130, 165};
  const ScalingSeries early_series =
      aggregate_series(8, early, run_replications(spec, early, noise, 48, 1));
  for (const auto& pt : early_series.grid) {
    const double ratio = pt.mse_mean / expected_mse(8, pt.M, 1.0);
    c.check(ratio >= 0.85 && ratio <= 1.15,
            "M=" + std::to_string(pt.M) + " mse/expected = " + fmt(ratio) + " within 15%");
  }

  // (b) device regime: the error plateaus on the model floor at M >= 10 M_crit.
  const double floor = systematic_floor_pure(8, p, eps);
  const std::vector<long> late = {12000, 25000, 50000, 100000};
  const ScalingSeries late_series =
      aggregate_series(8, late, run_replications(spec, late, noise, 20, 1));
  for (const auto& pt : late_series.grid) {
    const double ratio = pt.mse_mean / floor;
    c.check(ratio >= 0.9 && ratio <= 1.1,
            "M=" + std::to_string(pt.M) + " mse/floor = " + fmt(ratio) + " within 10%");
  }
}

// ---- criterion 6: closed-loop parameter recovery ----------------------------

void closed_loop(Criterion& c) {
  struct Case {
    int d;
    double p, eps;
  };
  for (const Case cs : {Case{8, 0.10, 0.012}, Case{4, 0.0255, 0.0127}}) {
    const AnalysisReport report =
        closed_loop_recovery(cs.d, cs.p, cs.eps, 100000, 20, RngSeed{20257, 0});
    c.check(std::abs(report.p_hat - cs.p) <= 0.10 * cs.p,
            "d=" + std::to_string(cs.d) + " p_hat " + fmt(report.p_hat) + " vs " + fmt(cs.p) +
                " (10%)");
    c.check(std::abs(report.epsilon_hat - cs.eps) <= 0.20 * cs.eps,
            "d=" + std::to_string(cs.d) + " epsilon_hat " + fmt(report.epsilon_hat) + " vs " +
                fmt(cs.eps) + " (20%)");
  }
}

// ---- criterion 7: mesh round trip -------------------------------------------

void mesh_round_trip(Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int d : {4, 8}) {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const UnitaryMatrix u =
          sample_haar(d, RngSeed{20258 + static_cast<std::uint64_t>(d), static_cast<std::uint32_t>(t)});
      const UnitaryMatrix back = compose_mesh(decompose_unitary(u));
      worst = std::max(worst, frobenius_distance(u.matrix(), back.matrix()));
    }
    c.check(worst <= 1e-10,
            "d=" + std::to_string(d) + " worst round-trip error " + fmt(worst) + " over 100");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.check(secs < 10.0, "runtime " + fmt(secs) + "s under 10s");
}

// ---- criterion 8: estimator contracts ---------------------------------------

void estimator_contracts(Criterion& c) {
  // Trace pinning across intensity and click estimators.
  {
    const UnitaryMatrix basis = sample_haar(8, RngSeed{20259, 0});
    Matrix rho_m = basis.matrix().col(0) * basis.matrix().col(0).adjoint();
    rho_m = 0.5 * (rho_m + rho_m.adjoint());
    const DensityMatrix rho(rho_m);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const UnitaryMatrix u = sample_haar(8, RngSeed{20260, static_cast<std::uint32_t>(t)});
      const Snapshot s(t, u, born_probabilities(rho, u));
      worst = std::max(worst, std::abs(snapshot_intensity_estimator(s).matrix().trace() -
                                       Complex(1.0, 0.0)));
      worst = std::max(
          worst, std::abs(snapshot_click_estimator(s, RngSeed{20261, static_cast<std::uint32_t>(t)})
                              .matrix()
                              .trace() -
                          Complex(1.0, 0.0)));
    }
    c.check(worst <= 1e-10, "worst |trace - 1| = " + fmt(worst) + " over 2000 estimators");
  }

  // Unbiasedness over 1e5 snapshots, elementwise within 5 standard errors,
  // for a pure d=8 state and a mixed d=4 state.
  const auto unbiased = [&](const DensityMatrix& rho, std::uint64_t seed, const char* label) {
    const int d = static_cast<int>(rho.dim());
    const long n = 100000;
    Matrix mean = Matrix::Zero(d, d);
    Eigen::MatrixXd var_re = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd var_im = Eigen::MatrixXd::Zero(d, d);
    for (long k = 0; k < n; ++k) {
      const UnitaryMatrix u = sample_haar(d, RngSeed{seed, static_cast<std::uint32_t>(k)});
      const Matrix est = snapshot_intensity_estimator(Snapshot(k, u, born_probabilities(rho, u)))
                             .matrix();
      mean += est;
      var_re += est.real().cwiseAbs2();
      var_im += est.imag().cwiseAbs2();
    }
    mean /= static_cast<double>(n);
    double worst_z = 0.0;
    for (int r = 0; r < d; ++r) {
      for (int col = 0; col < d; ++col) {
        const double se_re = std::sqrt(
            std::max(var_re(r, col) / n - std::pow(mean(r, col).real(), 2), 1e-30) / n);
        const double se_im = std::sqrt(
            std::max(var_im(r, col) / n - std::pow(mean(r, col).imag(), 2), 1e-30) / n);
        const double z_re =
            std::abs(mean(r, col).real() - rho.matrix()(r, col).real()) / se_re;
        const double z_im = (d > 1 && se_im > 1e-12)
                                ? std::abs(mean(r, col).imag() - rho.matrix()(r, col).imag()) / se_im
                                : 0.0;
        worst_z = std::max({worst_z, z_re, z_im});
      }
    }
    c.check(worst_z <= 5.0, std::string(label) + " worst elementwise |z| = " + fmt(worst_z));
  };
  {
    const UnitaryMatrix basis = sample_haar(8, RngSeed{20262, 0});
    Matrix rho_m = basis.matrix().col(0) * basis.matrix().col(0).adjoint();
    rho_m = 0.5 * (rho_m + rho_m.adjoint());
    unbiased(DensityMatrix(rho_m), 20263, "pure d=8");
  }
  {
    const DensityMatrix mixed = apply_depolarizing(DensityMatrix::basis_projector(4, 0), 0.3);
    unbiased(mixed, 20264, "mixed d=4");
  }

  // Click-estimator variance dominates the intensity variance in paired
  // batches sharing the same unitaries.
  {
    const DensityMatrix rho = DensityMatrix::basis_projector(4, 0);
    const int batches = 100, batch_size = 200;
    int click_ge = 0;
    for (int b = 0; b < batches; ++b) {
      Matrix mean_int = Matrix::Zero(4, 4);
      Matrix mean_click = Matrix::Zero(4, 4);
      for (int j = 0; j < batch_size; ++j) {
        const std::uint32_t stream = static_cast<std::uint32_t>(b * batch_size + j);
        const UnitaryMatrix u = sample_haar(4, RngSeed{20265, stream});
        const Snapshot s = Snapshot(stream, u, born_probabilities(rho, u));
        mean_int += snapshot_intensity_estimator(s).matrix();
        mean_click += snapshot_click_estimator(s, RngSeed{20266, stream}).matrix();
      }
      mean_int /= batch_size;
      mean_click /= batch_size;
      const double mse_int = std::pow(frobenius_distance(mean_int, rho.matrix()), 2);
      const double mse_click = std::pow(frobenius_distance(mean_click, rho.matrix()), 2);
      if (mse_click >= mse_int) ++click_ge;
    }
    c.check(click_ge >= 95, "click variance >= intensity variance in " +
                                std::to_string(click_ge) + "/100 paired batches");
  }
}

}  // namespace

int main() {
  std::printf("shadowtomo acceptance suite\n");
  run_criterion(1, "statistical-regime scaling", statistical_scaling);
  run_criterion(2, "Weingarten fourth-moment verification", weingarten_verification);
  run_criterion(3, "published-table arithmetic reproduction", table_arithmetic);
  run_criterion(4, "noise-model floor identity", noise_identity);
  run_criterion(5, "saturation floor and critical sample size", hardware_floor);
  run_criterion(6, "closed-loop parameter recovery", closed_loop);
  run_criterion(7, "mesh decompose/compose round trip", mesh_round_trip);
  run_criterion(8, "estimator contracts", estimator_contracts);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
  } else {
    std::printf("all criteria passed\n");
  }
  return g_failures;
}
