// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace isac {

namespace {

// |h^H w_col|^2 for column `col` of W, with h given as column `hcol` of H.
double abs2_col_dot(const CMat& h_mat, int hcol, const CMat& w, int wcol) {
  cdouble s = 0.0;
  for (int i = 0; i < w.rows(); ++i) s += std::conj(h_mat(i, hcol)) * w(i, wcol);
  return std::norm(s);
}

void check_indices(const NetworkState& st, int m, int k) {
  if (m < 0 || m >= st.cfg.cells) throw std::out_of_range("cell index out of range");
  if (k < 0 || k >= st.cfg.users_per_cell) throw std::out_of_range("user index out of range");
}

}  // namespace

double comm_sinr(const NetworkState& st, int m, int k) {
  check_indices(st, m, k);
  const int kk = st.cfg.users_per_cell;
  const int col = m * kk + k;  // user (m, k) as seen from any BS's local H
  const double sig = abs2_col_dot(st.sample.H[m], col, st.beams[m], k);
  double denom = st.cfg.noise_comm;
  for (int l = 0; l < kk; ++l)
    if (l != k) denom += abs2_col_dot(st.sample.H[m], col, st.beams[m], l);
  for (int n = 0; n < st.cfg.cells; ++n) {
    if (n == m) continue;
    for (int i = 0; i < kk; ++i) denom += abs2_col_dot(st.sample.H[n], col, st.beams[n], i);
  }
  return sig / denom;
}

double sum_comm_rate(const NetworkState& st) {
  double r = 0.0;
  for (int m = 0; m < st.cfg.cells; ++m)
    for (int k = 0; k < st.cfg.users_per_cell; ++k)
      r += std::log2(1.0 + std::max(0.0, comm_sinr(st, m, k)));
  return r;
}

double sensing_sinr(const NetworkState& st, int m) {
  check_indices(st, m, 0);
  double num = 0.0;
  for (int k = 0; k < st.cfg.users_per_cell; ++k)
    num += abs2_col_dot(st.sample.G[m], m, st.beams[m], k);
  num *= st.cfg.rx_antennas;
  double denom = st.cfg.noise_sense;
  for (int n = 0; n < st.cfg.cells; ++n) {
    if (n == m) continue;
    // Leakage from BS n toward BS m's receiver: column m of G[n].
    for (int l = 0; l < st.cfg.users_per_cell; ++l)
      denom += abs2_col_dot(st.sample.G[n], m, st.beams[n], l);
  }
  return num / denom;
}

double sum_radar_rate(const NetworkState& st) {
  double r = 0.0;
  for (int m = 0; m < st.cfg.cells; ++m)
    r += std::log2(1.0 + std::max(0.0, sensing_sinr(st, m)));
  return r;
}

double cil(const NetworkState& st, int m) {
  check_indices(st, m, 0);
  const int kk = st.cfg.users_per_cell;
  double s = 0.0;
  for (int n = 0; n < st.cfg.cells; ++n) {
    if (n == m) continue;
    for (int i = 0; i < kk; ++i)
      for (int l = 0; l < kk; ++l) s += abs2_col_dot(st.sample.H[m], n * kk + i, st.beams[m], l);
  }
  return s;
}

double sil(const NetworkState& st, int m) {
  check_indices(st, m, 0);
  double s = 0.0;
  for (int n = 0; n < st.cfg.cells; ++n) {
    if (n == m) continue;
    for (int l = 0; l < st.cfg.users_per_cell; ++l)
      s += abs2_col_dot(st.sample.G[m], n, st.beams[m], l);
  }
  return s;
}

std::vector<double> beampattern(const CMat& w, const std::vector<double>& grid_rad) {
  std::vector<double> p(grid_rad.size(), 0.0);
  for (std::size_t g = 0; g < grid_rad.size(); ++g) {
    const CMat a = steering_vector(grid_rad[g], w.rows());
    double s = 0.0;
    for (int k = 0; k < w.cols(); ++k) {
      cdouble d = 0.0;
      for (int i = 0; i < w.rows(); ++i) d += std::conj(a(i, 0)) * w(i, k);
      s += std::norm(d);
    }
    p[g] = s;
  }
  return p;
}

std::vector<double> to_db_normalized(const std::vector<double>& linear) {
  double peak = 0.0;
  for (double v : linear) peak = std::max(peak, v);
  if (peak <= 0.0) throw std::invalid_argument("to_db_normalized: empty or all-zero pattern");
  std::vector<double> db(linear.size());
  for (std::size_t i = 0; i < linear.size(); ++i)
    db[i] = 10.0 * std::log10(std::max(linear[i], peak * 1e-30) / peak);
  return db;
}

std::vector<double> angle_grid_deg(double start_deg, double stop_deg, double step_deg) {
  std::vector<double> g;
  const int n = static_cast<int>(std::round((stop_deg - start_deg) / step_deg));
  g.reserve(n + 1);
  for (int i = 0; i <= n; ++i) g.push_back((start_deg + i * step_deg) * M_PI / 180.0);
  return g;
}

}  // namespace isac
