#include "shadowtomo/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace shadowtomo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("mesh: phase must be finite");
  double w = std::fmod(x, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

/// Unit-cell block in factored form: i e^{-i theta/2} [ s, -c p; -c, -s p ]
/// with s = sin(theta/2), c = cos(theta/2), p = e^{-i phi}.
Eigen::Matrix2cd cell_block(double theta, double phi) {
  const double half = 0.5 * theta;
  const Complex g = Complex(0.0, 1.0) * std::polar(1.0, -half);
  const Complex p = std::polar(1.0, -phi);
  const double s = std::sin(half);
  const double c = std::cos(half);
  Eigen::Matrix2cd m;
  m << g * s, -g * c * p, -g * c, -g * s * p;
  return m;
}

struct CellParams {
  double theta;
  double phi;
  int top;
};

/// Choose (theta, phi) so that right-multiplying by the cell adjoint on
/// columns (c, c+1) nulls the entry at (r, c): requires
/// sin(theta/2) x = cos(theta/2) e^{i phi} y with x = U(r,c), y = U(r,c+1).
CellParams solve_right(const Complex& x, const Complex& y, int col) {
  if (std::abs(x) == 0.0 && std::abs(y) == 0.0) {
    return {std::numbers::pi, std::numbers::pi, col};  // identity cell
  }
  const double theta = 2.0 * std::atan2(std::abs(y), std::abs(x));
  const double phi = std::arg(x) - std::arg(y);
  return {wrap_phase(theta), wrap_phase(phi), col};
}

/// Choose (theta, phi) so that left-multiplying by the cell on rows
/// (m, m+1) nulls the entry at (m+1, c): requires
/// cos(theta/2) x = -sin(theta/2) e^{-i phi} y with x = U(m,c), y = U(m+1,c).
CellParams solve_left(const Complex& x, const Complex& y, int top) {
  if (std::abs(x) == 0.0 && std::abs(y) == 0.0) {
    return {std::numbers::pi, std::numbers::pi, top};
  }
  const double theta = 2.0 * std::atan2(std::abs(x), std::abs(y));
  const double phi = std::numbers::pi + std::arg(y) - std::arg(x);
  return {wrap_phase(theta), wrap_phase(phi), top};
}

void apply_right_adjoint(Matrix& u, const CellParams& cell) {
  const Eigen::Matrix2cd b = cell_block(cell.theta, cell.phi).adjoint();
  const int c = cell.top;
  const Vector col0 = u.col(c) * b(0, 0) + u.col(c + 1) * b(1, 0);
  const Vector col1 = u.col(c) * b(0, 1) + u.col(c + 1) * b(1, 1);
  u.col(c) = col0;
  u.col(c + 1) = col1;
}

void apply_left(Matrix& u, const CellParams& cell) {
  const Eigen::Matrix2cd b = cell_block(cell.theta, cell.phi);
  const int m = cell.top;
  const Eigen::RowVectorXcd row0 = b(0, 0) * u.row(m) + b(0, 1) * u.row(m + 1);
  const Eigen::RowVectorXcd row1 = b(1, 0) * u.row(m) + b(1, 1) * u.row(m + 1);
  u.row(m) = row0;
  u.row(m + 1) = row1;
}

/// Rewrites cell† * diag(a, b) as diag(a', b') * cell(theta', phi'),
/// updating the diagonal in place and returning the new cell parameters.
CellParams commute_through_diagonal(const CellParams& cell, Vector& diag) {
  const int m = cell.top;
  Eigen::Matrix2cd v = cell_block(cell.theta, cell.phi).adjoint();
  v.col(0) *= diag[m];
  v.col(1) *= diag[m + 1];

  const double s = std::abs(v(0, 0));
  const double c = std::abs(v(0, 1));
  const double theta = 2.0 * std::atan2(s, c);
  const Complex g = Complex(0.0, 1.0) * std::polar(1.0, -0.5 * theta);

  Complex alpha, beta;
  double phi = 0.0;
  if (s > 1e-150 && c > 1e-150) {
    alpha = v(0, 0) / (g * s);
    beta = -v(1, 0) / (g * c);
    phi = -std::arg(-v(0, 1) / (alpha * g * c));
  } else if (c <= 1e-150) {  // theta = pi: cell is diag(1, -e^{-i phi}); pick phi = 0
    alpha = v(0, 0) / g;
    beta = -v(1, 1) / g;
  } else {  // theta = 0: pure cross coupling
    alpha = Complex(0.0, 1.0) * v(0, 1);
    beta = Complex(0.0, 1.0) * v(1, 0);
  }
  diag[m] = alpha / std::abs(alpha);
  diag[m + 1] = beta / std::abs(beta);
  return {wrap_phase(theta), wrap_phase(phi), m};
}

}  // namespace

SubspaceEmbedding::SubspaceEmbedding(int sub, int full, int off)
    : sub_dim(sub), full_dim(full), offset(off) {
  if (sub < 1 || full < 1 || off < 0 || off + sub > full) {
    throw std::invalid_argument("SubspaceEmbedding: offset + sub_dim must fit in full_dim");
  }
}

MeshConfig::MeshConfig(int d, std::vector<MZICell> cells, Vector output_phases)
    : d_(d), cells_(std::move(cells)), output_phases_(std::move(output_phases)) {
  if (d_ < 1) throw std::invalid_argument("MeshConfig: d must be positive");
  if (output_phases_.size() != d_) {
    throw std::invalid_argument("MeshConfig: output_phases must have length d");
  }
  for (Eigen::Index k = 0; k < output_phases_.size(); ++k) {
    const double mag = std::abs(output_phases_[k]);
    if (std::abs(mag - 1.0) > 1e-9) {
      throw std::invalid_argument("MeshConfig: output phase is not unit modulus");
    }
    output_phases_[k] /= mag;
  }
  for (auto& cell : cells_) {
    if (cell.top_channel < 0 || cell.top_channel + 1 >= d_) {
      throw std::invalid_argument("MeshConfig: cell channel pair out of range");
    }
    if (cell.layer < 0) throw std::invalid_argument("MeshConfig: negative layer");
    cell.theta = wrap_phase(cell.theta);
    cell.phi = wrap_phase(cell.phi);
  }
}

UnitaryMatrix unit_cell_matrix(double theta, double phi) {
  Matrix m = cell_block(wrap_phase(theta), wrap_phase(phi));
  return UnitaryMatrix(std::move(m));
}

UnitaryMatrix compose_mesh(const MeshConfig& cfg) {
  const int d = cfg.dim();
  std::vector<MZICell> ordered = cfg.cells();
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const MZICell& a, const MZICell& b) { return a.layer < b.layer; });

  Matrix u = Matrix::Identity(d, d);
  std::size_t i = 0;
  while (i < ordered.size()) {
    std::size_t j = i;
    std::vector<bool> used(d, false);
    while (j < ordered.size() && ordered[j].layer == ordered[i].layer) {
      const int t = ordered[j].top_channel;
      if (used[t] || used[t + 1]) {
        throw std::invalid_argument("compose_mesh: overlapping cells within layer " +
                                    std::to_string(ordered[i].layer));
      }
      used[t] = used[t + 1] = true;
      apply_left(u, CellParams{ordered[j].theta, ordered[j].phi, t});
      ++j;
    }
    i = j;
  }
  u = cfg.output_phases().asDiagonal() * u;
  return UnitaryMatrix(std::move(u));
}

MeshConfig decompose_unitary(const UnitaryMatrix& u) {
  const int d = static_cast<int>(u.dim());
  if (d < 2) throw std::invalid_argument("decompose_unitary: requires d >= 2");

  Matrix work = u.matrix();
  std::vector<CellParams> right_cells;
  std::vector<CellParams> left_cells;
  right_cells.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);

  for (int i = 1; i < d; ++i) {
    if (i % 2 == 1) {
      for (int j = 0; j < i; ++j) {
        const int r = d - 1 - j;
        const int c = i - 1 - j;
        const CellParams cell = solve_right(work(r, c), work(r, c + 1), c);
        apply_right_adjoint(work, cell);
        right_cells.push_back(cell);
      }
    } else {
      for (int j = 1; j <= i; ++j) {
        const int r = d + j - i - 1;
        const int c = j - 1;
        const CellParams cell = solve_left(work(r - 1, c), work(r, c), r - 1);
        apply_left(work, cell);
        left_cells.push_back(cell);
      }
    }
  }

  // work is now diagonal: left_p ... left_1 * U * right_1† ... right_q† = D,
  // i.e. U = left_1† ... left_p† D right_q ... right_1. Commute D through the
  // left-cell adjoints so only plain cells remain right of the diagonal.
  Vector diag = work.diagonal();
  for (Eigen::Index k = 0; k < diag.size(); ++k) diag[k] /= std::abs(diag[k]);

  std::vector<CellParams> commuted;  // application order: last-created first
  commuted.reserve(left_cells.size());
  for (auto it = left_cells.rbegin(); it != left_cells.rend(); ++it) {
    commuted.push_back(commute_through_diagonal(*it, diag));
  }

  // Application order: right cells as created, then the commuted left cells.
  std::vector<CellParams> ordered = std::move(right_cells);
  ordered.insert(ordered.end(), commuted.begin(), commuted.end());

  // Greedy layering: a cell starts as soon as both of its channels are free.
  std::vector<int> next_free(d, 0);
  std::vector<MZICell> cells;
  cells.reserve(ordered.size());
  for (const CellParams& cp : ordered) {
    const int layer = std::max(next_free[cp.top], next_free[cp.top + 1]);
    next_free[cp.top] = next_free[cp.top + 1] = layer + 1;
    cells.push_back(MZICell{cp.theta, cp.phi, layer, cp.top});
  }

  return MeshConfig(d, std::move(cells), std::move(diag));
}

UnitaryMatrix embed_unitary(const UnitaryMatrix& u_sub, const SubspaceEmbedding& emb) {
  if (u_sub.dim() != emb.sub_dim) {
    throw std::invalid_argument("embed_unitary: sub-block dimension mismatch");
  }
  Matrix full = Matrix::Identity(emb.full_dim, emb.full_dim);
  full.block(emb.offset, emb.offset, emb.sub_dim, emb.sub_dim) = u_sub.matrix();
  return UnitaryMatrix(std::move(full));
}

MeshConfig perturb_mesh(const MeshConfig& cfg, double sigma, RngSeed seed) {
  if (sigma < 0.0) throw std::invalid_argument("perturb_mesh: sigma must be nonnegative");
  StreamRng rng(seed);
  std::vector<MZICell> cells = cfg.cells();
  for (auto& cell : cells) {
    cell.theta = wrap_phase(cell.theta + sigma * rng.normal());
    cell.phi = wrap_phase(cell.phi + sigma * rng.normal());
  }
  return MeshConfig(cfg.dim(), std::move(cells), cfg.output_phases());
}

}  // namespace shadowtomo
