// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/metrics_graph.hpp"

#include <cmath>
#include <stdexcept>

#include "isac/metrics.hpp"

namespace isac {

VarCMat leaf_cmat(ad::Tape& t, const CMat& init) {
  VarCMat m;
  m.rows = init.rows();
  m.cols = init.cols();
  m.v.resize(static_cast<std::size_t>(m.rows) * m.cols);
  for (int j = 0; j < m.cols; ++j)
    for (int i = 0; i < m.rows; ++i)
      m.at(i, j) = {t.leaf(init(i, j).real()), t.leaf(init(i, j).imag())};
  return m;
}

VarCMat normalize_power(ad::Tape& t, const VarCMat& x, double p_t) {
  std::vector<ad::NodeId> sq;
  sq.reserve(x.v.size());
  for (const auto& z : x.v) sq.push_back(t.abs2(z.re, z.im));
  const ad::NodeId total = t.sum(sq);
  const ad::NodeId scale = t.sqrt(t.mul_const(t.recip(total), p_t));
  VarCMat y;
  y.rows = x.rows;
  y.cols = x.cols;
  y.v.reserve(x.v.size());
  for (const auto& z : x.v) y.v.push_back({t.mul(scale, z.re), t.mul(scale, z.im)});
  return y;
}

ad::NodeId abs2_herm_dot(ad::Tape& t, const CMat& h_mat, int hcol, const VarCMat& w, int wcol) {
  // conj(h)^T w: re = sum hr*wr + hi*wi, im = sum hr*wi - hi*wr.
  std::vector<ad::NodeId> re_terms, im_terms;
  re_terms.reserve(2 * w.rows);
  im_terms.reserve(2 * w.rows);
  for (int i = 0; i < w.rows; ++i) {
    const double hr = h_mat(i, hcol).real();
    const double hi = h_mat(i, hcol).imag();
    const VarC& z = w.at(i, wcol);
    re_terms.push_back(t.mul_const(z.re, hr));
    re_terms.push_back(t.mul_const(z.im, hi));
    im_terms.push_back(t.mul_const(z.im, hr));
    im_terms.push_back(t.mul_const(z.re, -hi));
  }
  return t.abs2(t.sum(re_terms), t.sum(im_terms));
}

ad::NodeId vfl_global_loss(ad::Tape& t, const NetworkConfig& cfg, const ChannelSample& sample,
                           const std::vector<VarCMat>& w_all, double rho) {
  if (static_cast<int>(w_all.size()) != cfg.cells)
    throw std::invalid_argument("vfl_global_loss: need one beamformer per BS");
  const int kk = cfg.users_per_cell;

  std::vector<ad::NodeId> rate_terms;
  for (int m = 0; m < cfg.cells; ++m)
    for (int k = 0; k < kk; ++k) {
      const int col = m * kk + k;
      const ad::NodeId sig = abs2_herm_dot(t, sample.H[m], col, w_all[m], k);
      std::vector<ad::NodeId> interf;
      for (int l = 0; l < kk; ++l)
        if (l != k) interf.push_back(abs2_herm_dot(t, sample.H[m], col, w_all[m], l));
      for (int n = 0; n < cfg.cells; ++n) {
        if (n == m) continue;
        for (int i = 0; i < kk; ++i)
          interf.push_back(abs2_herm_dot(t, sample.H[n], col, w_all[n], i));
      }
      const ad::NodeId denom =
          interf.empty() ? t.constant(cfg.noise_comm) : t.add_const(t.sum(interf), cfg.noise_comm);
      rate_terms.push_back(t.log2(t.add_const(t.div(sig, denom), 1.0)));
    }
  const ad::NodeId r_comm = t.sum(rate_terms);

  std::vector<ad::NodeId> radar_terms;
  for (int m = 0; m < cfg.cells; ++m) {
    std::vector<ad::NodeId> illum;
    for (int k = 0; k < kk; ++k) illum.push_back(abs2_herm_dot(t, sample.G[m], m, w_all[m], k));
    const ad::NodeId num = t.mul_const(t.sum(illum), static_cast<double>(cfg.rx_antennas));
    std::vector<ad::NodeId> ici;
    for (int n = 0; n < cfg.cells; ++n) {
      if (n == m) continue;
      for (int l = 0; l < kk; ++l) ici.push_back(abs2_herm_dot(t, sample.G[n], m, w_all[n], l));
    }
    const ad::NodeId denom =
        ici.empty() ? t.constant(cfg.noise_sense) : t.add_const(t.sum(ici), cfg.noise_sense);
    radar_terms.push_back(t.log2(t.add_const(t.div(num, denom), 1.0)));
  }
  const ad::NodeId r_radar = t.sum(radar_terms);

  return t.add(t.mul_const(r_comm, -rho), t.mul_const(r_radar, -(1.0 - rho)));
}

ad::NodeId hfl_local_loss(ad::Tape& t, const NetworkConfig& cfg, const CMat& h_m, const CMat& g_m,
                          int m, const VarCMat& w_m, double rho, double alpha, double beta) {
  const int kk = cfg.users_per_cell;

  // Communication part: intra-cell-only SINR, CIL charged per beam.
  std::vector<ad::NodeId> comm_terms;
  for (int k = 0; k < kk; ++k) {
    const int col = m * kk + k;
    const ad::NodeId sig = abs2_herm_dot(t, h_m, col, w_m, k);
    std::vector<ad::NodeId> intra;
    for (int l = 0; l < kk; ++l)
      if (l != k) intra.push_back(abs2_herm_dot(t, h_m, col, w_m, l));
    const ad::NodeId denom =
        intra.empty() ? t.constant(cfg.noise_comm) : t.add_const(t.sum(intra), cfg.noise_comm);
    ad::NodeId term = t.log2(t.add_const(t.div(sig, denom), 1.0));
    if (alpha != 0.0) {
      std::vector<ad::NodeId> leak;
      for (int n = 0; n < cfg.cells; ++n) {
        if (n == m) continue;
        for (int i = 0; i < kk; ++i) leak.push_back(abs2_herm_dot(t, h_m, n * kk + i, w_m, k));
      }
      if (!leak.empty()) term = t.sub(term, t.mul_const(t.sum(leak), alpha));
    }
    comm_terms.push_back(term);
  }
  const ad::NodeId loss_c = t.neg(t.sum(comm_terms));

  // Sensing part: noise-only radar rate, SIL penalty.
  std::vector<ad::NodeId> illum;
  for (int k = 0; k < kk; ++k) illum.push_back(abs2_herm_dot(t, g_m, m, w_m, k));
  ad::NodeId sense = t.log2(t.add_const(t.mul_const(t.sum(illum), 1.0 / cfg.noise_sense), 1.0));
  if (beta != 0.0) {
    std::vector<ad::NodeId> leak;
    for (int n = 0; n < cfg.cells; ++n) {
      if (n == m) continue;
      for (int k = 0; k < kk; ++k) leak.push_back(abs2_herm_dot(t, g_m, n, w_m, k));
    }
    if (!leak.empty()) sense = t.sub(sense, t.mul_const(t.sum(leak), beta));
  }
  const ad::NodeId loss_s = t.neg(sense);

  return t.add(t.mul_const(loss_c, rho), t.mul_const(loss_s, 1.0 - rho));
}

double vfl_global_loss_value(const NetworkConfig& cfg, const ChannelSample& sample,
                             const std::vector<CMat>& w_all, double rho) {
  const NetworkState st{cfg, sample, w_all};
  return -rho * sum_comm_rate(st) - (1.0 - rho) * sum_radar_rate(st);
}

double hfl_local_loss_value(const NetworkConfig& cfg, const CMat& h_m, const CMat& g_m, int m,
                            const CMat& w_m, double rho, double alpha, double beta) {
  const int kk = cfg.users_per_cell;
  auto abs2dot = [&](const CMat& mat, int mc, int wc) {
    cdouble s = 0.0;
    for (int i = 0; i < w_m.rows(); ++i) s += std::conj(mat(i, mc)) * w_m(i, wc);
    return std::norm(s);
  };

  double loss_c = 0.0;
  for (int k = 0; k < kk; ++k) {
    const int col = m * kk + k;
    double denom = cfg.noise_comm;
    for (int l = 0; l < kk; ++l)
      if (l != k) denom += abs2dot(h_m, col, l);
    double term = std::log2(1.0 + abs2dot(h_m, col, k) / denom);
    if (alpha != 0.0) {
      double leak = 0.0;
      for (int n = 0; n < cfg.cells; ++n) {
        if (n == m) continue;
        for (int i = 0; i < kk; ++i) leak += abs2dot(h_m, n * kk + i, k);
      }
      term -= alpha * leak;
    }
    loss_c -= term;
  }

  double illum = 0.0;
  for (int k = 0; k < kk; ++k) illum += abs2dot(g_m, m, k);
  double sense = std::log2(1.0 + illum / cfg.noise_sense);
  if (beta != 0.0) {
    double leak = 0.0;
    for (int n = 0; n < cfg.cells; ++n) {
      if (n == m) continue;
      for (int k = 0; k < kk; ++k) leak += abs2dot(g_m, n, k);
    }
    sense -= beta * leak;
  }
  const double loss_s = -sense;

  return rho * loss_c + (1.0 - rho) * loss_s;
}

}  // namespace isac
