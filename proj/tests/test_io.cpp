#include "shadowtomo/io.hpp"

#include <doctest.h>

using namespace shadowtomo;

namespace {

Matrix random_matrix(int d, std::uint32_t stream) {
  StreamRng rng(RngSeed{818181, stream});
  Matrix m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = rng.complex_normal();
  return m;
}

}  // namespace

TEST_CASE("matrix JSON round trip is exact") {
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 7;
    const Matrix m = random_matrix(d, t);
    const Matrix back = matrix_from_json(matrix_to_json(m));
    REQUIRE((m - back).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("matrix JSON rejects malformed input with a named field") {
  CHECK_THROWS_WITH_AS(matrix_from_json("{\"d\": 2, \"re\": [[1,0],[0,1]]}"),
                       doctest::Contains("im"), IoError);
  CHECK_THROWS_WITH_AS(matrix_from_json(
                           "{\"d\": 2, \"re\": [[1,0],[0,1]], \"im\": [[0,0],[0]]}"),
                       doctest::Contains("row 1"), IoError);
  CHECK_THROWS_AS(matrix_from_json("{\"d\": 0, \"re\": [], \"im\": []}"), IoError);
  CHECK_THROWS_AS(matrix_from_json("not json"), IoError);
}

TEST_CASE("mesh JSON round trip preserves the composition") {
  const UnitaryMatrix u = sample_haar(8, RngSeed{123123, 0});
  const MeshConfig cfg = decompose_unitary(u);
  const MeshConfig back = mesh_from_json(mesh_to_json(cfg));
  CHECK(back.cells().size() == cfg.cells().size());
  CHECK(frobenius_distance(compose_mesh(back).matrix(), compose_mesh(cfg).matrix()) <= 1e-12);
  CHECK(frobenius_distance(compose_mesh(back).matrix(), u.matrix()) <= 1e-10);
}

TEST_CASE("noise JSON round trip") {
  const NoiseModel model(0.08, sample_coherent_distortion(8, 0.012, RngSeed{5, 5}).u_c());
  const NoiseModel back = noise_from_json(noise_to_json(model));
  CHECK(back.p() == model.p());
  CHECK(back.epsilon() == doctest::Approx(model.epsilon()).epsilon(1e-12));
  CHECK(frobenius_distance(back.u_c().matrix(), model.u_c().matrix()) == 0.0);

  CHECK_THROWS_AS(noise_from_json("{\"p\": 0.1}"), IoError);
}

TEST_CASE("snapshot JSON round trip") {
  SnapshotFile file;
  file.d = 4;
  file.protocol = "III";
  const DensityMatrix rho = DensityMatrix::basis_projector(4, 0);
  for (long k = 0; k < 5; ++k) {
    const UnitaryMatrix u = sample_haar(4, RngSeed{33, static_cast<std::uint32_t>(k)});
    file.snapshots.emplace_back(k, u, born_probabilities(rho, u));
  }
  const SnapshotFile back = snapshots_from_json(snapshots_to_json(file));
  REQUIRE(back.snapshots.size() == 5);
  CHECK(back.protocol == "III");
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK((back.snapshots[i].probabilities - file.snapshots[i].probabilities)
              .cwiseAbs()
              .maxCoeff() <= 1e-15);
    CHECK((back.snapshots[i].reported_unitary.matrix() -
           file.snapshots[i].reported_unitary.matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("series CSV round trip and validation") {
  ScalingSeries series;
  series.d = 8;
  series.grid = {ScalingPoint{10, 0.7123456789, 0.01234, 20},
                 ScalingPoint{100, 0.0701234, 0.001, 20},
                 ScalingPoint{1000, 0.00712, 0.0001, 20}};
  const std::string csv = series_to_csv(series, "meta line with timestamp");
  const ScalingSeries back = series_from_csv(csv);
  REQUIRE(back.grid.size() == 3);
  CHECK(back.grid[0].M == 10);
  CHECK(back.grid[0].mse_mean == doctest::Approx(0.7123456789).epsilon(1e-9));
  CHECK(back.grid[2].replications == 20);

  CHECK_THROWS_WITH_AS(series_from_csv("M,mse_mean\n10,0.5\n"), doctest::Contains("header"),
                       IoError);
  CHECK_THROWS_WITH_AS(
      series_from_csv("M,mse_mean,mse_stderr,replications\n10,0.5,0,1\n5,0.9,0,1\n"),
      doctest::Contains("increasing"), IoError);
  CHECK_THROWS_WITH_AS(series_from_csv("M,mse_mean,mse_stderr,replications\n10,oops,0,1\n"),
                       doctest::Contains("mse_mean"), IoError);
}

TEST_CASE("voltage CSV parsing") {
  const std::string good =
      "run_id,unitary_id,v0,v1,v2,v3,v4,v5,v6,v7\n"
      "0,0,2,2,0,0,0,0,0,0\n"
      "0,1,1,1,1,1,9,9,9,9\n";
  const auto records = voltages_from_csv(good);
  REQUIRE(records.size() == 2);
  CHECK(records[0].voltages[0] == 2.0);
  CHECK(records[1].unitary_id == 1);

  CHECK_THROWS_WITH_AS(voltages_from_csv("a,b\n1,2\n"), doctest::Contains("header"), IoError);
  CHECK_THROWS_WITH_AS(
      voltages_from_csv("run_id,unitary_id,v0,v1,v2,v3,v4,v5,v6,v7\n0,0,1,2,3\n"),
      doctest::Contains("expected 10"), IoError);
  CHECK_THROWS_WITH_AS(
      voltages_from_csv("run_id,unitary_id,v0,v1,v2,v3,v4,v5,v6,v7\n0,0,-1,2,0,0,0,0,0,0\n"),
      doctest::Contains("nonnegative"), IoError);
  CHECK_THROWS_AS(voltages_from_csv("run_id,unitary_id,v0,v1,v2,v3,v4,v5,v6,v7\n"), IoError);
}

TEST_CASE("unitary list JSON") {
  std::vector<Matrix> list;
  for (int k = 0; k < 3; ++k) list.push_back(sample_haar(4, RngSeed{9, (std::uint32_t)k}).matrix());
  const auto back = unitary_list_from_json(unitary_list_to_json(list));
  REQUIRE(back.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK((back[k] - list[k]).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_WITH_AS(unitary_list_from_json("{\"d\": 2}"), doctest::Contains("array"), IoError);
}

TEST_CASE("format_g9 prints 9 significant digits") {
  CHECK(format_g9(0.1041257142857) == "0.104125714");
  CHECK(format_g9(1.4e-3) == "0.0014");
  CHECK(format_g9(497.739508) == "497.739508");
}

TEST_CASE("report JSON carries the m_crit null case") {
  AnalysisReport report;
  report.p_hat = 0.0;
  report.epsilon_hat = 0.0;
  report.floor = 0.0;
  report.m_crit = std::nullopt;
  report.theory_curve = {{10, 0.7}, {100, 0.07}};
  const std::string text = report_to_json(report, 8);
  CHECK(text.find("\"m_crit\": null") != std::string::npos);
  CHECK(text.find("\"theory_curve\"") != std::string::npos);
}
