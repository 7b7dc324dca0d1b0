#include "shadowtomo/haar.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace shadowtomo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_moment_index(const MomentIndex& idx, int d) {
  const int all[] = {idx.i1, idx.j1, idx.i2, idx.j2, idx.i1p, idx.j1p, idx.i2p, idx.j2p};
  for (int v : all) {
    if (v < 1 || v > d) {
      throw std::invalid_argument("MomentIndex: index outside [1, d]");
    }
  }
}

}  // namespace

StreamRng::StreamRng(RngSeed s)
    : gen_(splitmix64(s.seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(s.stream) + 1))) {}

double StreamRng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double StreamRng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Complex StreamRng::complex_normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return Complex(r * std::cos(2.0 * std::numbers::pi * u2),
                 r * std::sin(2.0 * std::numbers::pi * u2));
}

int StreamRng::categorical(const RealVector& weights) {
  const double u = uniform();
  double acc = 0.0;
  const int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return n - 1;
}

UnitaryMatrix sample_haar(int d, RngSeed seed) {
  if (d < 1) throw std::invalid_argument("sample_haar: d must be >= 1");

  StreamRng rng(seed);
  Matrix ginibre(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      ginibre(r, c) = rng.complex_normal();
    }
  }

  Eigen::HouseholderQR<Matrix> qr(ginibre);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < d; ++k) {
    const Complex rkk = r(k, k);
    const double mag = std::abs(rkk);
    q.col(k) *= (mag == 0.0) ? Complex(1.0, 0.0) : rkk / mag;
  }
  return UnitaryMatrix(std::move(q));
}

double weingarten_value(WgPartition partition, int d) {
  if (d < 2) throw std::invalid_argument("weingarten_value: requires d >= 2");
  const double dd = static_cast<double>(d);
  switch (partition) {
    case WgPartition::OneOne:
      return 1.0 / (dd * dd - 1.0);
    case WgPartition::Two:
      return -1.0 / (dd * (dd * dd - 1.0));
  }
  throw std::invalid_argument("weingarten_value: unknown partition");
}

Complex fourth_moment_analytic(const MomentIndex& idx, int d) {
  if (d < 2) throw std::invalid_argument("fourth_moment_analytic: requires d >= 2");
  check_moment_index(idx, d);

  const bool ri = idx.i1 == idx.i1p && idx.i2 == idx.i2p;  // identity row pairing
  const bool rx = idx.i1 == idx.i2p && idx.i2 == idx.i1p;  // crossed row pairing
  const bool ci = idx.j1 == idx.j1p && idx.j2 == idx.j2p;
  const bool cx = idx.j1 == idx.j2p && idx.j2 == idx.j1p;

  const double wg11 = weingarten_value(WgPartition::OneOne, d);
  const double wg2 = weingarten_value(WgPartition::Two, d);

  double value = 0.0;
  if (ri && ci) value += wg11;
  if (rx && cx) value += wg11;
  if (ri && cx) value += wg2;
  if (rx && ci) value += wg2;
  return Complex(value, 0.0);
}

McMoment fourth_moment_mc(const MomentIndex& idx, int d, long samples, RngSeed seed) {
  if (samples < 1000) throw std::invalid_argument("fourth_moment_mc: samples must be >= 1000");
  check_moment_index(idx, d);

  Complex sum(0.0, 0.0);
  double sum_sq = 0.0;  // sum of |z|^2 for the variance of the complex samples
  for (long k = 0; k < samples; ++k) {
    const UnitaryMatrix u = sample_haar(d, seed.with_stream(static_cast<std::uint32_t>(k)));
    const Matrix& m = u.matrix();
    const Complex z = m(idx.i1 - 1, idx.j1 - 1) * m(idx.i2 - 1, idx.j2 - 1) *
                      std::conj(m(idx.i1p - 1, idx.j1p - 1)) *
                      std::conj(m(idx.i2p - 1, idx.j2p - 1));
    sum += z;
    sum_sq += std::norm(z);
  }
  const double n = static_cast<double>(samples);
  const Complex mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - std::norm(mean));
  return McMoment{mean, std::sqrt(var / n)};
}

double reduced_fourth_moment(int a, int j, int k, int b, int d) {
  if (d < 2) throw std::invalid_argument("reduced_fourth_moment: requires d >= 2");
  for (int v : {a, j, k, b}) {
    if (v < 1 || v > d) throw std::invalid_argument("reduced_fourth_moment: index outside [1, d]");
  }
  const double dd = static_cast<double>(d);
  double value = 0.0;
  if (j == a && b == k) value += 1.0;
  if (j == k && b == a) value += 1.0;
  return value / (dd * (dd + 1.0));
}

std::vector<MomentCheck> verify_fourth_moments(int d, long samples, RngSeed seed) {
  if (d < 2) throw std::invalid_argument("verify_fourth_moments: requires d >= 2");
  if (samples < 1000) throw std::invalid_argument("verify_fourth_moments: samples must be >= 1000");

  static constexpr std::array<std::array<int, 4>, 4> kClasses = {{
      {1, 1, 1, 1}, {1, 2, 1, 2}, {1, 2, 2, 1}, {1, 1, 1, 2}}};

  std::vector<MomentCheck> checks;
  checks.reserve(16);
  for (const auto& rows : kClasses) {
    for (const auto& cols : kClasses) {
      MomentCheck c;
      c.idx = MomentIndex{rows[0], cols[0], rows[1], cols[1], rows[2], cols[2], rows[3], cols[3]};
      c.pattern = std::to_string(rows[0]) + std::to_string(rows[1]) + std::to_string(rows[2]) +
                  std::to_string(rows[3]) + "-" + std::to_string(cols[0]) +
                  std::to_string(cols[1]) + std::to_string(cols[2]) + std::to_string(cols[3]);
      c.analytic = fourth_moment_analytic(c.idx, d).real();
      checks.push_back(std::move(c));
    }
  }

  std::vector<Complex> sums(checks.size(), Complex(0.0, 0.0));
  std::vector<double> sums_sq(checks.size(), 0.0);
  for (long k = 0; k < samples; ++k) {
    const UnitaryMatrix u = sample_haar(d, seed.with_stream(static_cast<std::uint32_t>(k)));
    const Matrix& m = u.matrix();
    for (std::size_t p = 0; p < checks.size(); ++p) {
      const MomentIndex& i = checks[p].idx;
      const Complex z = m(i.i1 - 1, i.j1 - 1) * m(i.i2 - 1, i.j2 - 1) *
                        std::conj(m(i.i1p - 1, i.j1p - 1)) * std::conj(m(i.i2p - 1, i.j2p - 1));
      sums[p] += z;
      sums_sq[p] += std::norm(z);
    }
  }

  const double n = static_cast<double>(samples);
  for (std::size_t p = 0; p < checks.size(); ++p) {
    checks[p].mc_mean = sums[p] / n;
    const double var = std::max(0.0, sums_sq[p] / n - std::norm(checks[p].mc_mean));
    checks[p].mc_stderr = std::sqrt(var / n);
    checks[p].z_score = std::abs(checks[p].mc_mean - Complex(checks[p].analytic, 0.0)) /
                        checks[p].mc_stderr;
  }
  return checks;
}

}  // namespace shadowtomo
