// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "isac/linalg.hpp"
#include "isac/metrics.hpp"

namespace isac {

std::vector<CMat> mrt(const ChannelSample& sample, const NetworkConfig& cfg) {
  const int nt = cfg.tx_antennas, kk = cfg.users_per_cell;
  std::vector<CMat> beams(cfg.cells, CMat(nt, kk));
  const double amp = std::sqrt(cfg.tx_power / kk);
  for (int m = 0; m < cfg.cells; ++m)
    for (int k = 0; k < kk; ++k) {
      const auto h = sample.H[m].col(m * kk + k);
      const double nh = std::sqrt(norm_sq(h));
      if (nh <= 0.0) throw std::runtime_error("mrt: zero channel");
      for (int i = 0; i < nt; ++i) beams[m](i, k) = amp * h[i] / nh;
    }
  return beams;
}

ImtResult imt(const ChannelSample& sample, const NetworkConfig& cfg) {
  const int nt = cfg.tx_antennas, kk = cfg.users_per_cell;
  ImtResult res;
  res.beams = mrt(sample, cfg);
  if (cfg.cells == 1) return res;  // nothing to null

  const double amp = std::sqrt(cfg.tx_power / kk);
  for (int m = 0; m < cfg.cells; ++m) {
    std::vector<std::vector<cdouble>> interfered;
    for (int n = 0; n < cfg.cells; ++n) {
      if (n == m) continue;
      for (int i = 0; i < kk; ++i) interfered.push_back(sample.H[m].col(n * kk + i));
      interfered.push_back(sample.G[m].col(n));
    }
    const auto basis = orthonormal_basis(interfered);
    const int null_dim = nt - static_cast<int>(basis.size());

    std::vector<std::vector<cdouble>> least_leakage;
    if (null_dim <= 0) {
      // Least-leakage eigenspace of the stacked interfered channels; keep
      // enough dimensions for the K streams.
      res.fallback = true;
      CMat a(nt, nt);
      for (const auto& v : interfered)
        for (int i = 0; i < nt; ++i)
          for (int j = 0; j < nt; ++j) a(i, j) += v[i] * std::conj(v[j]);
      const auto eig = herm_eig(a);
      const int keep = std::min(nt, std::max(kk, nt - static_cast<int>(interfered.size())));
      for (int j = 0; j < keep; ++j) least_leakage.push_back(eig.vectors.col(j));
    }

    for (int k = 0; k < kk; ++k) {
      const auto w = res.beams[m].col(k);
      const auto p = null_dim > 0 ? project_out(basis, w) : project_onto(least_leakage, w);
      const double np = std::sqrt(norm_sq(p));
      if (np < 1e-12) {
        // MRT beam (numerically) inside the interfered span; keep it rather
        // than amplify noise.
        res.fallback = true;
        continue;
      }
      for (int i = 0; i < nt; ++i) res.beams[m](i, k) = amp * p[i] / np;
    }
  }
  return res;
}

std::vector<CMat> cbf(const ChannelSample& sample, const NetworkConfig& cfg) {
  const int nt = cfg.tx_antennas, kk = cfg.users_per_cell;
  std::vector<CMat> beams(cfg.cells, CMat(nt, kk));
  const double amp = std::sqrt(cfg.tx_power / (kk * static_cast<double>(nt)));
  for (int m = 0; m < cfg.cells; ++m) {
    const CMat a = steering_vector(sample.target_angle[m], nt);
    for (int k = 0; k < kk; ++k)
      for (int i = 0; i < nt; ++i) beams[m](i, k) = amp * a(i, 0);
  }
  return beams;
}

namespace {

// Transmit update for one BS given the spectral decomposition of its
// weighted-covariance matrix: w_k(mu) = c_k * Q diag(1/(lambda+mu)) Q^H h_k.
struct TxUpdate {
  const HermEig& eig;
  // Per beam: Q^H h_k scaled by the (complex) MMSE weight c_k = v_k u_k.
  std::vector<std::vector<cdouble>> qh;

  double power(double mu) const {
    double p = 0.0;
    for (const auto& q : qh)
      for (std::size_t j = 0; j < q.size(); ++j) {
        if (q[j] == cdouble(0.0, 0.0)) continue;  // dropped null component
        const double d = eig.values[j] + mu;
        p += std::norm(q[j]) / (d * d);
      }
    return p;
  }
};

}  // namespace

WmmseResult wmmse(const ChannelSample& sample, const NetworkConfig& cfg, int max_iters,
                  double tol, double init_scale) {
  const int mc = cfg.cells, kk = cfg.users_per_cell, nt = cfg.tx_antennas;
  WmmseResult res;
  res.beams = mrt(sample, cfg);
  if (init_scale != 1.0)
    for (auto& w : res.beams) w *= cdouble(init_scale, 0.0);

  std::vector<std::vector<cdouble>> u(mc, std::vector<cdouble>(kk));
  std::vector<std::vector<double>> v(mc, std::vector<double>(kk));

  double prev_rate = -1.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    // Receiver and MSE-weight updates.
    for (int m = 0; m < mc; ++m)
      for (int k = 0; k < kk; ++k) {
        const int col = m * kk + k;
        double total = cfg.noise_comm;
        for (int n = 0; n < mc; ++n)
          for (int i = 0; i < kk; ++i) {
            cdouble d = 0.0;
            for (int a = 0; a < nt; ++a) d += std::conj(sample.H[n](a, col)) * res.beams[n](a, i);
            total += std::norm(d);
          }
        cdouble hw = 0.0;
        for (int a = 0; a < nt; ++a) hw += std::conj(sample.H[m](a, col)) * res.beams[m](a, k);
        u[m][k] = hw / total;
        const double mse = 1.0 - std::norm(hw) / total;
        v[m][k] = 1.0 / std::max(mse, 1e-14);
      }

    // Transmit update with per-BS power met by bisection on the multiplier.
    for (int m = 0; m < mc; ++m) {
      CMat a(nt, nt);
      for (int n = 0; n < mc; ++n)
        for (int i = 0; i < kk; ++i) {
          const int col = n * kk + i;
          const double wgt = v[n][i] * std::norm(u[n][i]);
          for (int r = 0; r < nt; ++r)
            for (int c = 0; c < nt; ++c)
              a(r, c) += wgt * sample.H[m](r, col) * std::conj(sample.H[m](c, col));
        }
      const HermEig eig = herm_eig(a);

      TxUpdate tx{eig, {}};
      tx.qh.resize(kk);
      // The null space of the weighted covariance is orthogonal to every
      // channel, so those components of Q^H h are zero up to roundoff; drop
      // them so the mu = 0 (pseudo-inverse) case is well defined.
      const double eig_cut = eig.values.back() * 1e-12 + 1e-300;
      for (int k = 0; k < kk; ++k) {
        const int col = m * kk + k;
        const cdouble c_k = v[m][k] * u[m][k];
        tx.qh[k].resize(nt);
        for (int j = 0; j < nt; ++j) {
          cdouble s = 0.0;
          for (int i = 0; i < nt; ++i) s += std::conj(eig.vectors(i, j)) * sample.H[m](i, col);
          tx.qh[k][j] = eig.values[j] > eig_cut ? c_k * s : 0.0;
        }
      }

      double qh_norm = 0.0;
      for (const auto& q : tx.qh)
        for (const auto& z : q) qh_norm += std::norm(z);
      if (qh_norm == 0.0) {  // dead branch; nothing to transmit
        for (int k = 0; k < kk; ++k)
          for (int i = 0; i < nt; ++i) res.beams[m](i, k) = 0.0;
        continue;
      }

      double mu = 0.0;
      const bool zero_ok = tx.power(0.0) <= cfg.tx_power;
      if (!zero_ok) {
        double lo = 0.0, hi = 1e-12;
        while (tx.power(hi) > cfg.tx_power) {
          hi = hi * 2.0 + 1e-9;
          if (hi > 1e18) throw std::runtime_error("wmmse: bisection bracket failed (hi exploded)");
        }
        mu = hi;  // feasible fallback
        for (int it = 0; it < 500; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double pw = tx.power(mid);
          if (std::abs(pw - cfg.tx_power) <= 1e-10 * cfg.tx_power) {
            mu = mid;
            break;
          }
          (pw > cfg.tx_power ? lo : hi) = mid;
          mu = hi;
        }
        if (std::abs(tx.power(mu) - cfg.tx_power) > 1e-6 * cfg.tx_power)
          throw std::runtime_error("wmmse: power bisection did not converge, residual " +
                                   std::to_string(tx.power(mu) - cfg.tx_power));
      }

      for (int k = 0; k < kk; ++k)
        for (int i = 0; i < nt; ++i) {
          cdouble w = 0.0;
          for (int j = 0; j < nt; ++j) {
            if (tx.qh[k][j] == cdouble(0.0, 0.0)) continue;
            w += eig.vectors(i, j) * (tx.qh[k][j] / (eig.values[j] + mu));
          }
          res.beams[m](i, k) = w;
        }
    }

    const NetworkState st{cfg, sample, res.beams};
    const double rate = sum_comm_rate(st);
    res.rate_log.push_back(rate);
    res.iterations = iter + 1;
    if (iter > 0 && std::abs(rate - prev_rate) < tol) break;
    prev_rate = rate;
  }
  return res;
}

std::vector<MlpModel> per_cell_dl_train(const Dataset& train, const NetworkConfig& cfg, double rho,
                                        const PerCellTrainOptions& opts) {
  if (train.samples.empty()) throw std::invalid_argument("per_cell_dl_train: empty dataset");
  const MlpConfig arch = mlp_config_for(cfg, opts.hidden_dim, opts.n_hidden);
  const int n = static_cast<int>(train.samples.size());
  const int batch = std::min(opts.hp.batch, n);
  const int steps_per_epoch = std::max(1, n / batch);

  std::vector<MlpModel> models(cfg.cells);
  // Fully independent per-BS trainings; run them concurrently.
#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < cfg.cells; ++m) {
    Rng base = Rng(opts.hp.seed).fork2(0x9C, static_cast<std::uint64_t>(m));
    MlpModel model = MlpModel::init(arch, base.fork(0x11).key());
    Optimizer opt(opts.hp.opt);
    LocalWorkspace ws;
    std::vector<int> order;
    int in_epoch = 0, epoch = 0;
    Rng drop = base.fork(0xD0);
    for (int s = 0; s < opts.steps; ++s) {
      if (in_epoch == 0) {
        Rng order_rng = base.fork2(0x0E, static_cast<std::uint64_t>(epoch));
        order = shuffled_indices(n, order_rng);
      }
      const std::span<const int> idx(order.data() + static_cast<std::size_t>(in_epoch) * batch,
                                     batch);
      local_minibatch_step(model, opt, cfg, train, m, idx, rho, 0.0, 0.0, true, drop, ws);
      if (++in_epoch >= steps_per_epoch) {
        in_epoch = 0;
        ++epoch;
      }
    }
    models[m] = std::move(model);
  }
  return models;
}

std::array<double, 2> TimeSharing::point(double lambda) const {
  return {lambda * corner_comm[0] + (1.0 - lambda) * corner_sense[0],
          lambda * corner_comm[1] + (1.0 - lambda) * corner_sense[1]};
}

double TimeSharing::signed_distance(const std::array<double, 2>& p) const {
  const double vx = corner_comm[0] - corner_sense[0];
  const double vy = corner_comm[1] - corner_sense[1];
  const double len = std::hypot(vx, vy);
  if (len < 1e-15) return std::hypot(p[0] - corner_sense[0], p[1] - corner_sense[1]);
  // Positive on the side away from the origin (the dominating side) for the
  // usual corner orientation: comm corner right-down of sense corner.
  const double cross = vx * (p[1] - corner_sense[1]) - vy * (p[0] - corner_sense[0]);
  return cross / len;
}

}  // namespace isac
