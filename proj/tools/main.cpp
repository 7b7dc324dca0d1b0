#include "shadowtomo/analysis.hpp"
#include "shadowtomo/io.hpp"
#include "shadowtomo/mesh.hpp"
#include "shadowtomo/shadow.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace {

using namespace shadowtomo;

// Exit codes: 0 success, 1 usage error, 2 data error, 3 model inconsistency.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitModel = 3;

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::string default_out_dir() {
  const char* env = std::getenv("SHADOWTOMO_OUT_DIR");
  return (env && *env) ? env : ".";
}

std::filesystem::path join_out(const std::string& dir, const std::string& name) {
  return std::filesystem::path(dir) / name;
}

ProtocolKind parse_protocol(const std::string& name) {
  static const std::map<std::string, ProtocolKind> table = {
      {"I", ProtocolKind::I}, {"II", ProtocolKind::II},
      {"III", ProtocolKind::III}, {"IV", ProtocolKind::IV}};
  const auto it = table.find(name);
  if (it == table.end()) {
    throw CLI::ValidationError("--protocol", "must be one of I, II, III, IV");
  }
  return it->second;
}

std::vector<long> parse_grid(const std::string& csv) {
  std::vector<long> grid;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    grid.push_back(std::stol(tok));
  }
  return grid;
}

struct SimulateArgs {
  std::string protocol = "I";
  int d = 0;  // 0: take the protocol's dimension
  long m = 5000;
  std::string m_grid_csv;
  int grid_points = 20;
  int replications = 20;
  double p = 0.0;
  double epsilon = 0.0;
  bool noisy = false;
  std::uint64_t seed = 1;
  std::uint64_t hidden_seed = 0;  // 0: derived from seed
  std::uint64_t noise_seed = 0;   // 0: derived from seed
  int workers = 1;
  std::string out_dir = default_out_dir();
  std::string prefix = "run";
};

int cmd_simulate(const SimulateArgs& args) {
  const ProtocolKind kind = parse_protocol(args.protocol);
  const std::uint64_t hidden = args.hidden_seed ? args.hidden_seed : args.seed + 1000003;
  const std::uint64_t noise_seed = args.noise_seed ? args.noise_seed : args.seed + 2000003;
  const ProtocolSpec spec =
      ProtocolSpec::make(kind, RngSeed{args.seed, 0}, RngSeed{hidden, 0});
  if (args.d != 0 && args.d != spec.d_sub) {
    throw CLI::ValidationError("--d", "protocol " + args.protocol + " runs at d = " +
                                          std::to_string(spec.d_sub));
  }

  std::optional<NoiseModel> noise;
  if (args.noisy) {
    const NoiseModel distortion =
        sample_coherent_distortion(spec.d_sub, args.epsilon, RngSeed{noise_seed, 0});
    noise.emplace(args.p, distortion.u_c());
  }

  std::vector<long> grid = args.m_grid_csv.empty()
                               ? make_log_grid(std::min<long>(10, args.m), args.m, args.grid_points)
                               : parse_grid(args.m_grid_csv);

  const ProtocolRun run =
      run_protocol(spec, args.m, noise, std::move(grid), args.replications, args.workers);

  std::ostringstream meta;
  meta << "shadowtomo simulate protocol=" << args.protocol << " d=" << spec.d_sub
       << " M=" << args.m << " replications=" << args.replications << " seed=" << args.seed;
  if (noise) {
    meta << " p=" << format_g9(noise->p()) << " epsilon=" << format_g9(noise->epsilon());
  }
  meta << " generated=" << timestamp_utc();

  const auto series_path = join_out(args.out_dir, args.prefix + "_series.csv");
  const auto recon_path = join_out(args.out_dir, args.prefix + "_reconstruction.json");
  write_text_file(series_path.string(), series_to_csv(run.series, meta.str()));
  write_text_file(recon_path.string(), reconstruction_to_json(run.final_result));
  std::cout << "series: " << series_path.string() << "\n";
  std::cout << "reconstruction: " << recon_path.string() << "\n";
  if (noise) {
    const auto noise_path = join_out(args.out_dir, args.prefix + "_noise.json");
    write_text_file(noise_path.string(), noise_to_json(*noise));
    std::cout << "noise: " << noise_path.string() << "\n";
  }
  std::cout << "final Frobenius error at M=" << args.m << ": "
            << format_g9(run.final_result.frobenius_error) << "\n";
  return kExitOk;
}

struct IngestArgs {
  std::string voltages_path;
  std::string unitaries_path;
  std::string protocol = "I";
  std::string out_path;
};

int cmd_ingest(const IngestArgs& args) {
  const ProtocolKind kind = parse_protocol(args.protocol);
  const ProtocolSpec spec = ProtocolSpec::make(kind, RngSeed{0, 0});
  const std::vector<VoltageRecord> records =
      voltages_from_csv(read_text_file(args.voltages_path));
  const std::vector<Matrix> unitaries =
      unitary_list_from_json(read_text_file(args.unitaries_path));

  const std::optional<SubspaceEmbedding> emb =
      spec.uses_subspace() ? std::optional<SubspaceEmbedding>(spec.embedding()) : std::nullopt;

  SnapshotFile file;
  file.d = spec.d_sub;
  file.protocol = args.protocol;
  for (const VoltageRecord& rec : records) {
    if (rec.unitary_id < 0 || rec.unitary_id >= static_cast<long>(unitaries.size())) {
      throw IoError("ingest: no unitary with id " + std::to_string(rec.unitary_id));
    }
    const Matrix& u = unitaries[rec.unitary_id];
    if (u.rows() != spec.d_sub) {
      throw IoError("ingest: unitary id " + std::to_string(rec.unitary_id) + " has dimension " +
                    std::to_string(u.rows()) + ", protocol needs " + std::to_string(spec.d_sub));
    }
    file.snapshots.emplace_back(rec.unitary_id, UnitaryMatrix(u), normalize_voltages(rec, emb));
  }
  write_text_file(args.out_path, snapshots_to_json(file));
  std::cout << "snapshots: " << args.out_path << " (" << file.snapshots.size() << " records)\n";
  return kExitOk;
}

struct ReconstructArgs {
  std::string snapshots_path;
  std::string target_path;
  std::string out_path;
};

int cmd_reconstruct(const ReconstructArgs& args) {
  const SnapshotFile file = snapshots_from_json(read_text_file(args.snapshots_path));
  if (file.snapshots.empty()) throw IoError("reconstruct: snapshot file has no records");
  const HermitianEstimate estimate = reconstruct(file.snapshots, file.d);

  // Default target: the trivial injected state (protocols I and III).
  DensityMatrix target = args.target_path.empty()
                             ? DensityMatrix::basis_projector(file.d, 0)
                             : DensityMatrix(matrix_from_json(read_text_file(args.target_path)));
  const ReconstructionResult result(estimate, static_cast<long>(file.snapshots.size()),
                                    std::move(target));
  write_text_file(args.out_path, reconstruction_to_json(result));
  std::cout << "reconstruction: " << args.out_path << "\n";
  std::cout << "Frobenius error vs target: " << format_g9(result.frobenius_error) << "\n";
  return kExitOk;
}

struct AnalyzeArgs {
  std::string series_path;
  double slope = std::numeric_limits<double>::quiet_NaN();
  std::string eigenvalues_csv;
  std::string recon_path;
  int d = 0;
  double lambda1 = 1.0;
  std::string out_path;
  std::string residuals_path;
};

int cmd_analyze(const AnalyzeArgs& args) {
  double leading = 0.0;
  if (!args.eigenvalues_csv.empty()) {
    std::vector<double> evs;
    std::stringstream ss(args.eigenvalues_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) evs.push_back(std::stod(tok));
    }
    if (evs.empty()) throw IoError("analyze: empty eigenvalue list");
    leading = *std::max_element(evs.begin(), evs.end());
  } else if (!args.recon_path.empty()) {
    leading = spectral_decompose(
                  HermitianEstimate(estimate_matrix_from_json(read_text_file(args.recon_path))))
                  .eigenvalues[0];
  } else {
    throw CLI::ValidationError("analyze", "need --eigenvalues or --recon");
  }

  AnalysisReport report;
  std::optional<ScalingSeries> series;
  if (!args.series_path.empty()) {
    series = series_from_csv(read_text_file(args.series_path));
    series->d = args.d;
    report = analyze_series(*series, leading, args.lambda1, args.d);
  } else if (std::isfinite(args.slope)) {
    report = analyze_point_estimates(args.slope, leading, args.lambda1, args.d);
  } else {
    throw CLI::ValidationError("analyze", "need --series or --slope");
  }

  write_text_file(args.out_path, report_to_json(report, args.d));
  std::cout << "report: " << args.out_path << "\n";
  std::cout << "p_hat: " << format_g9(report.p_hat) << "\n";
  std::cout << "epsilon_hat: " << format_g9(report.epsilon_hat) << "\n";
  std::cout << "floor: " << format_g9(report.floor) << "\n";
  if (report.m_crit) {
    std::cout << "m_crit: " << format_g9(*report.m_crit) << "\n";
  } else {
    std::cout << "m_crit: none (no systematic floor detected)\n";
  }

  if (!args.residuals_path.empty()) {
    if (!series) {
      throw CLI::ValidationError("--residuals", "requires --series input");
    }
    write_text_file(args.residuals_path,
                    residuals_to_csv(*series, report.theory_curve,
                                     "shadowtomo analyze residuals generated=" + timestamp_utc()));
    std::cout << "residuals: " << args.residuals_path << "\n";
  }
  return kExitOk;
}

struct WeingartenArgs {
  int d = 2;
  long samples = 1000000;
  std::uint64_t seed = 1;
  std::string out_path;
};

int cmd_verify_weingarten(const WeingartenArgs& args) {
  if (args.samples < 10000) {
    throw CLI::ValidationError("--samples", "needs at least 10000 samples");
  }
  const std::vector<MomentCheck> checks =
      verify_fourth_moments(args.d, args.samples, RngSeed{args.seed, 0});

  std::ostringstream meta;
  meta << "shadowtomo verify-weingarten d=" << args.d << " samples=" << args.samples
       << " seed=" << args.seed << " generated=" << timestamp_utc();
  const std::string out = args.out_path.empty()
                              ? join_out(default_out_dir(),
                                         "weingarten_d" + std::to_string(args.d) + ".csv")
                                    .string()
                              : args.out_path;
  write_text_file(out, moment_checks_to_csv(checks, args.d, meta.str()));

  double worst = 0.0;
  for (const MomentCheck& c : checks) {
    std::cout << c.pattern << " analytic=" << format_g9(c.analytic)
              << " mc=" << format_g9(c.mc_mean.real()) << " z=" << format_g9(c.z_score) << "\n";
    worst = std::max(worst, c.z_score);
  }
  std::cout << "csv: " << out << "\n";
  std::cout << "worst |z|: " << format_g9(worst) << "\n";
  if (worst > 5.0) {
    std::cerr << "verify-weingarten: a Monte-Carlo moment deviates beyond 5 standard errors\n";
    return kExitModel;
  }
  return kExitOk;
}

int cmd_mesh(const std::string& mode, const std::string& in_path, const std::string& out_path) {
  const std::string text = read_text_file(in_path);
  if (mode == "decompose") {
    Matrix m = matrix_from_json(text);
    std::optional<UnitaryMatrix> u;
    try {
      u.emplace(std::move(m));
    } catch (const std::invalid_argument& e) {
      throw IoError(std::string("mesh decompose: ") + e.what());
    }
    const MeshConfig cfg = decompose_unitary(*u);
    write_text_file(out_path, mesh_to_json(cfg));
    std::cout << "mesh: " << out_path << " (" << cfg.cells().size() << " cells)\n";
  } else {
    const MeshConfig cfg = mesh_from_json(text);
    const UnitaryMatrix u = compose_mesh(cfg);
    write_text_file(out_path, matrix_to_json(u.matrix()));
    std::cout << "unitary: " << out_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical-shadow state reconstruction on a simulated photonic mesh"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value config file");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a measurement protocol");
  simulate->add_option("--protocol", sim.protocol, "Protocol: I, II, III or IV");
  simulate->add_option("--d", sim.d, "State dimension (must match the protocol)");
  simulate->add_option("--M", sim.m, "Number of sampled unitaries")->check(CLI::PositiveNumber);
  simulate->add_option("--m-grid", sim.m_grid_csv, "Comma-separated cumulative grid");
  simulate->add_option("--grid-points", sim.grid_points, "Points in the default log grid")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--replications", sim.replications, "Independent replications")
      ->check(CLI::Range(1, 128));
  CLI::Option* popt = simulate->add_option("--p", sim.p, "Depolarization strength")
                          ->check(CLI::Range(0.0, 1.0));
  CLI::Option* eopt =
      simulate->add_option("--epsilon", sim.epsilon, "Coherent distortion magnitude")
          ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--seed", sim.seed, "Base RNG seed");
  simulate->add_option("--hidden-seed", sim.hidden_seed, "Hidden randomizer seed (protocols II/IV)");
  simulate->add_option("--noise-seed", sim.noise_seed, "Coherent-distortion sampling seed");
  simulate->add_option("--workers", sim.workers, "Worker threads for replications")
      ->check(CLI::Range(1, 256));
  simulate->add_option("--out-dir", sim.out_dir, "Output directory");
  simulate->add_option("--prefix", sim.prefix, "Output file prefix");

  IngestArgs ing;
  CLI::App* ingest = app.add_subcommand("ingest", "Normalize a voltage dump into snapshots");
  ingest->add_option("--voltages", ing.voltages_path, "Voltage CSV")->required();
  ingest->add_option("--unitaries", ing.unitaries_path, "Unitary list JSON")->required();
  ingest->add_option("--protocol", ing.protocol, "Protocol: I, II, III or IV");
  ingest->add_option("--out", ing.out_path, "Snapshot JSON output")->required();

  ReconstructArgs rec;
  CLI::App* reconstruct_cmd =
      app.add_subcommand("reconstruct", "Average snapshot estimators into a state estimate");
  reconstruct_cmd->add_option("--snapshots", rec.snapshots_path, "Snapshot JSON")->required();
  reconstruct_cmd->add_option("--target", rec.target_path,
                              "Target state JSON (default: trivial projector)");
  reconstruct_cmd->add_option("--out", rec.out_path, "Reconstruction JSON output")->required();

  AnalyzeArgs ana;
  CLI::App* analyze = app.add_subcommand("analyze", "Extract noise parameters from results");
  analyze->add_option("--series", ana.series_path, "ScalingSeries CSV");
  analyze->add_option("--slope", ana.slope, "Scaled-error slope (alternative to --series)");
  analyze->add_option("--eigenvalues", ana.eigenvalues_csv,
                      "Comma-separated reconstructed eigenvalues");
  analyze->add_option("--recon", ana.recon_path,
                      "Reconstruction or matrix JSON to take the spectrum from");
  analyze->add_option("--d", ana.d, "State dimension")->required()->check(CLI::Range(2, 1024));
  analyze->add_option("--lambda1", ana.lambda1, "Leading eigenvalue of the target state");
  analyze->add_option("--out", ana.out_path, "Report JSON output")->required();
  analyze->add_option("--residuals", ana.residuals_path, "Observed-vs-model CSV output");

  WeingartenArgs wg;
  CLI::App* weingarten =
      app.add_subcommand("verify-weingarten", "Monte-Carlo check of the fourth-moment formulas");
  weingarten->add_option("--d", wg.d, "Unitary dimension")->check(CLI::Range(2, 64));
  weingarten->add_option("--samples", wg.samples, "Haar samples");
  weingarten->add_option("--seed", wg.seed, "RNG seed");
  weingarten->add_option("--out", wg.out_path, "Check CSV output");

  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Unitary <-> mesh phase conversions");
  std::string mesh_in, mesh_out;
  CLI::App* mesh_dec = mesh_cmd->add_subcommand("decompose", "Unitary JSON -> mesh JSON");
  mesh_dec->add_option("--in", mesh_in, "Unitary matrix JSON")->required();
  mesh_dec->add_option("--out", mesh_out, "Mesh JSON output")->required();
  CLI::App* mesh_com = mesh_cmd->add_subcommand("compose", "Mesh JSON -> unitary JSON");
  mesh_com->add_option("--in", mesh_in, "Mesh JSON")->required();
  mesh_com->add_option("--out", mesh_out, "Unitary matrix JSON output")->required();
  mesh_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      sim.noisy = popt->count() > 0 || eopt->count() > 0;
      return cmd_simulate(sim);
    }
    if (ingest->parsed()) return cmd_ingest(ing);
    if (reconstruct_cmd->parsed()) return cmd_reconstruct(rec);
    if (analyze->parsed()) return cmd_analyze(ana);
    if (weingarten->parsed()) return cmd_verify_weingarten(wg);
    if (mesh_cmd->parsed()) {
      return cmd_mesh(mesh_dec->parsed() ? "decompose" : "compose", mesh_in, mesh_out);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ModelInconsistencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModel;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
