#include "shadowtomo/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace shadowtomo {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

Matrix matrix_from_node(const json& node, const char* what) {
  if (!node.is_object() || !node.contains("d") || !node.contains("re") || !node.contains("im")) {
    throw IoError(std::string(what) + ": matrix object needs fields d, re, im");
  }
  if (!node["d"].is_number_integer() || node["d"].get<long>() < 1) {
    throw IoError(std::string(what) + ": field 'd' must be a positive integer");
  }
  const int d = node["d"].get<int>();
  Matrix m(d, d);
  for (const char* part : {"re", "im"}) {
    const json& rows = node[part];
    if (!rows.is_array() || static_cast<int>(rows.size()) != d) {
      throw IoError(std::string(what) + ": field '" + part + "' must be an array of " +
                    std::to_string(d) + " rows");
    }
    for (int r = 0; r < d; ++r) {
      const json& row = rows[r];
      if (!row.is_array() || static_cast<int>(row.size()) != d) {
        throw IoError(std::string(what) + ": field '" + part + "' row " + std::to_string(r) +
                      " must have " + std::to_string(d) + " entries");
      }
      for (int c = 0; c < d; ++c) {
        if (!row[c].is_number()) {
          throw IoError(std::string(what) + ": field '" + part + "' row " + std::to_string(r) +
                        " col " + std::to_string(c) + " is not a number");
        }
        const double v = row[c].get<double>();
        if (part[0] == 'r') {
          m(r, c) = Complex(v, 0.0);
        } else {
          m(r, c) += Complex(0.0, v);
        }
      }
    }
  }
  return m;
}

json matrix_to_node(const Matrix& m) {
  const Eigen::Index d = m.rows();
  json re = json::array();
  json im = json::array();
  for (Eigen::Index r = 0; r < d; ++r) {
    json re_row = json::array();
    json im_row = json::array();
    for (Eigen::Index c = 0; c < d; ++c) {
      re_row.push_back(m(r, c).real());
      im_row.push_back(m(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return json{{"d", d}, {"re", std::move(re)}, {"im", std::move(im)}};
}

double round_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<int, std::vector<std::string>>> rows;  // (line number, fields)
};

CsvTable parse_csv(const std::string& text, const char* what) {
  CsvTable table;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (table.header.empty()) {
      table.header = split_csv_line(line);
    } else {
      table.rows.emplace_back(lineno, split_csv_line(line));
    }
  }
  if (table.header.empty()) throw IoError(std::string(what) + ": empty CSV");
  return table;
}

double parse_double(const std::string& s, const char* what, int lineno, const char* field) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string(what) + ": row at line " + std::to_string(lineno) + ", field '" +
                  field + "': cannot parse number from '" + s + "'");
  }
}

long parse_long(const std::string& s, const char* what, int lineno, const char* field) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string(what) + ": row at line " + std::to_string(lineno) + ", field '" +
                  field + "': cannot parse integer from '" + s + "'");
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string matrix_to_json(const Matrix& m) { return matrix_to_node(m).dump(2) + "\n"; }

Matrix matrix_from_json(const std::string& text) {
  return matrix_from_node(parse_json(text, "matrix"), "matrix");
}

Matrix estimate_matrix_from_json(const std::string& text) {
  const json node = parse_json(text, "estimate");
  if (node.contains("estimate")) {
    return matrix_from_node(node["estimate"], "field 'estimate'");
  }
  return matrix_from_node(node, "matrix");
}

std::string unitary_list_to_json(const std::vector<Matrix>& list) {
  json arr = json::array();
  for (const Matrix& m : list) arr.push_back(matrix_to_node(m));
  return arr.dump(2) + "\n";
}

std::vector<Matrix> unitary_list_from_json(const std::string& text) {
  const json arr = parse_json(text, "unitary list");
  if (!arr.is_array()) throw IoError("unitary list: top-level JSON must be an array");
  std::vector<Matrix> list;
  list.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    list.push_back(matrix_from_node(arr[i], ("unitary list entry " + std::to_string(i)).c_str()));
  }
  return list;
}

std::string mesh_to_json(const MeshConfig& cfg) {
  json cells = json::array();
  for (const MZICell& cell : cfg.cells()) {
    cells.push_back(json{{"layer", cell.layer},
                         {"top", cell.top_channel},
                         {"theta", cell.theta},
                         {"phi", cell.phi}});
  }
  json re = json::array();
  json im = json::array();
  for (Eigen::Index k = 0; k < cfg.output_phases().size(); ++k) {
    re.push_back(cfg.output_phases()[k].real());
    im.push_back(cfg.output_phases()[k].imag());
  }
  return json{{"d", cfg.dim()},
              {"cells", std::move(cells)},
              {"output_phases_re", std::move(re)},
              {"output_phases_im", std::move(im)}}
             .dump(2) +
         "\n";
}

MeshConfig mesh_from_json(const std::string& text) {
  const json node = parse_json(text, "mesh");
  for (const char* field : {"d", "cells", "output_phases_re", "output_phases_im"}) {
    if (!node.contains(field)) throw IoError(std::string("mesh: missing field '") + field + "'");
  }
  const int d = node["d"].get<int>();
  std::vector<MZICell> cells;
  for (std::size_t i = 0; i < node["cells"].size(); ++i) {
    const json& c = node["cells"][i];
    for (const char* field : {"layer", "top", "theta", "phi"}) {
      if (!c.contains(field)) {
        throw IoError("mesh: cell " + std::to_string(i) + " missing field '" + field + "'");
      }
    }
    cells.push_back(MZICell{c["theta"].get<double>(), c["phi"].get<double>(),
                            c["layer"].get<int>(), c["top"].get<int>()});
  }
  const json& re = node["output_phases_re"];
  const json& im = node["output_phases_im"];
  if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != d ||
      static_cast<int>(im.size()) != d) {
    throw IoError("mesh: output phase arrays must have length d");
  }
  Vector phases(d);
  for (int k = 0; k < d; ++k) {
    phases[k] = Complex(re[k].get<double>(), im[k].get<double>());
  }
  try {
    return MeshConfig(d, std::move(cells), std::move(phases));
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("mesh: ") + e.what());
  }
}

std::string noise_to_json(const NoiseModel& noise) {
  return json{{"p", noise.p()},
              {"epsilon", noise.epsilon()},
              {"u_c", matrix_to_node(noise.u_c().matrix())}}
             .dump(2) +
         "\n";
}

NoiseModel noise_from_json(const std::string& text) {
  const json node = parse_json(text, "noise");
  for (const char* field : {"p", "u_c", "epsilon"}) {
    if (!node.contains(field)) throw IoError(std::string("noise: missing field '") + field + "'");
  }
  try {
    NoiseModel model(node["p"].get<double>(),
                     UnitaryMatrix(matrix_from_node(node["u_c"], "noise field 'u_c'")));
    const double recorded = node["epsilon"].get<double>();
    if (std::abs(recorded - model.epsilon()) > 1e-12 + 1e-9 * std::abs(model.epsilon())) {
      throw IoError("noise: field 'epsilon' disagrees with the first row of u_c");
    }
    return model;
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("noise: ") + e.what());
  }
}

std::string snapshots_to_json(const SnapshotFile& file) {
  json snaps = json::array();
  json unitaries = json::array();
  for (const Snapshot& s : file.snapshots) {
    json probs = json::array();
    for (Eigen::Index i = 0; i < s.probabilities.size(); ++i) probs.push_back(s.probabilities[i]);
    snaps.push_back(json{{"unitary_id", s.unitary_id}, {"probabilities", std::move(probs)}});
    unitaries.push_back(matrix_to_node(s.reported_unitary.matrix()));
  }
  return json{{"d", file.d},
              {"protocol", file.protocol},
              {"snapshots", std::move(snaps)},
              {"unitaries", std::move(unitaries)}}
             .dump(2) +
         "\n";
}

SnapshotFile snapshots_from_json(const std::string& text) {
  const json node = parse_json(text, "snapshots");
  for (const char* field : {"d", "protocol", "snapshots", "unitaries"}) {
    if (!node.contains(field)) {
      throw IoError(std::string("snapshots: missing field '") + field + "'");
    }
  }
  SnapshotFile file;
  file.d = node["d"].get<int>();
  file.protocol = node["protocol"].get<std::string>();
  const json& snaps = node["snapshots"];
  const json& unitaries = node["unitaries"];
  if (snaps.size() != unitaries.size()) {
    throw IoError("snapshots: 'snapshots' and 'unitaries' lengths differ");
  }
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const json& s = snaps[i];
    if (!s.contains("unitary_id") || !s.contains("probabilities")) {
      throw IoError("snapshots: entry " + std::to_string(i) +
                    " missing 'unitary_id' or 'probabilities'");
    }
    const json& probs = s["probabilities"];
    if (!probs.is_array() || static_cast<int>(probs.size()) != file.d) {
      throw IoError("snapshots: entry " + std::to_string(i) + " probabilities must have length d");
    }
    RealVector p(file.d);
    for (int k = 0; k < file.d; ++k) p[k] = probs[k].get<double>();
    try {
      file.snapshots.emplace_back(
          s["unitary_id"].get<long>(),
          UnitaryMatrix(matrix_from_node(unitaries[i],
                                         ("snapshots unitary " + std::to_string(i)).c_str())),
          std::move(p));
    } catch (const std::invalid_argument& e) {
      throw IoError("snapshots: entry " + std::to_string(i) + ": " + e.what());
    }
  }
  return file;
}

std::string reconstruction_to_json(const ReconstructionResult& result) {
  return json{{"d", result.estimate.dim()},
              {"M", result.M},
              {"frobenius_error", round_g9(result.frobenius_error)},
              {"estimate", matrix_to_node(result.estimate.matrix())},
              {"target", matrix_to_node(result.target.matrix())}}
             .dump(2) +
         "\n";
}

std::string report_to_json(const AnalysisReport& report, int d) {
  json curve = json::array();
  for (const TheoryPoint& pt : report.theory_curve) {
    curve.push_back(json{{"M", pt.M}, {"mse", round_g9(pt.mse)}});
  }
  json node{{"d", d},
            {"p_hat", round_g9(report.p_hat)},
            {"epsilon_hat", round_g9(report.epsilon_hat)},
            {"fit",
             json{{"slope", round_g9(report.fit.slope)},
                  {"intercept", round_g9(report.fit.intercept)},
                  {"slope_stderr", round_g9(report.fit.slope_stderr)},
                  {"intercept_stderr", round_g9(report.fit.intercept_stderr)},
                  {"r_squared", round_g9(report.fit.r_squared)}}},
            {"floor", round_g9(report.floor)},
            {"theory_curve", std::move(curve)}};
  if (report.m_crit) {
    node["m_crit"] = round_g9(*report.m_crit);
  } else {
    node["m_crit"] = nullptr;
  }
  return node.dump(2) + "\n";
}

std::string series_to_csv(const ScalingSeries& series, const std::string& meta) {
  std::string out;
  if (!meta.empty()) out += "# " + meta + "\n";
  out += "M,mse_mean,mse_stderr,replications\n";
  for (const ScalingPoint& pt : series.grid) {
    out += std::to_string(pt.M) + "," + format_g9(pt.mse_mean) + "," + format_g9(pt.mse_stderr) +
           "," + std::to_string(pt.replications) + "\n";
  }
  return out;
}

ScalingSeries series_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text, "series CSV");
  const std::vector<std::string> expected = {"M", "mse_mean", "mse_stderr", "replications"};
  if (table.header != expected) {
    throw IoError("series CSV: header must be 'M,mse_mean,mse_stderr,replications'");
  }
  ScalingSeries series;
  long prev_m = 0;
  for (const auto& [lineno, fields] : table.rows) {
    if (fields.size() != 4) {
      throw IoError("series CSV: row at line " + std::to_string(lineno) + " has " +
                    std::to_string(fields.size()) + " fields, expected 4");
    }
    ScalingPoint pt;
    pt.M = parse_long(fields[0], "series CSV", lineno, "M");
    pt.mse_mean = parse_double(fields[1], "series CSV", lineno, "mse_mean");
    pt.mse_stderr = parse_double(fields[2], "series CSV", lineno, "mse_stderr");
    pt.replications = static_cast<int>(parse_long(fields[3], "series CSV", lineno, "replications"));
    if (pt.M <= prev_m) {
      throw IoError("series CSV: row at line " + std::to_string(lineno) +
                    ": M must be strictly increasing");
    }
    if (pt.mse_mean < 0.0 || pt.mse_stderr < 0.0 || pt.replications < 1) {
      throw IoError("series CSV: row at line " + std::to_string(lineno) +
                    ": mse values must be nonnegative and replications >= 1");
    }
    prev_m = pt.M;
    series.grid.push_back(pt);
  }
  if (series.grid.empty()) throw IoError("series CSV: no data rows");
  return series;
}

std::string residuals_to_csv(const ScalingSeries& series, const std::vector<TheoryPoint>& curve,
                             const std::string& meta) {
  if (series.grid.size() != curve.size()) {
    throw std::invalid_argument("residuals_to_csv: series and curve lengths differ");
  }
  std::string out;
  if (!meta.empty()) out += "# " + meta + "\n";
  out += "M,observed_mse,predicted_mse\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += std::to_string(series.grid[i].M) + "," + format_g9(series.grid[i].mse_mean) + "," +
           format_g9(curve[i].mse) + "\n";
  }
  return out;
}

std::vector<VoltageRecord> voltages_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text, "voltage CSV");
  std::vector<std::string> expected = {"run_id", "unitary_id"};
  for (int i = 0; i < 8; ++i) expected.push_back("v" + std::to_string(i));
  if (table.header != expected) {
    throw IoError("voltage CSV: header must be 'run_id,unitary_id,v0,...,v7'");
  }
  std::vector<VoltageRecord> records;
  for (const auto& [lineno, fields] : table.rows) {
    if (fields.size() != 10) {
      throw IoError("voltage CSV: row at line " + std::to_string(lineno) + " has " +
                    std::to_string(fields.size()) + " fields, expected 10");
    }
    VoltageRecord rec;
    rec.run_id = parse_long(fields[0], "voltage CSV", lineno, "run_id");
    rec.unitary_id = parse_long(fields[1], "voltage CSV", lineno, "unitary_id");
    rec.voltages.resize(8);
    for (int i = 0; i < 8; ++i) {
      rec.voltages[i] =
          parse_double(fields[2 + i], "voltage CSV", lineno, ("v" + std::to_string(i)).c_str());
      if (rec.voltages[i] < 0.0) {
        throw IoError("voltage CSV: row at line " + std::to_string(lineno) + ", field 'v" +
                      std::to_string(i) + "': voltages must be nonnegative");
      }
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw IoError("voltage CSV: no data rows");
  return records;
}

std::string moment_checks_to_csv(const std::vector<MomentCheck>& checks, int d,
                                 const std::string& meta) {
  std::string out;
  if (!meta.empty()) out += "# " + meta + "\n";
  out += "pattern,d,analytic,mc_mean,mc_stderr,z_score\n";
  for (const MomentCheck& c : checks) {
    out += c.pattern + "," + std::to_string(d) + "," + format_g9(c.analytic) + "," +
           format_g9(c.mc_mean.real()) + "," + format_g9(c.mc_stderr) + "," +
           format_g9(c.z_score) + "\n";
  }
  return out;
}

}  // namespace shadowtomo
