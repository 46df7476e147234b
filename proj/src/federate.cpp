// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/federate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "isac/io.hpp"
#include "isac/metrics.hpp"
#include "isac/metrics_graph.hpp"
#include "isac/tape.hpp"

namespace isac {

std::uint64_t vfl_training_complex_values(std::uint64_t m, std::uint64_t k, std::uint64_t n_t,
                                          std::uint64_t t_rounds) {
  return (m * m + m) * t_rounds * k * n_t;
}

std::uint64_t hfl_training_bits(std::uint64_t m, std::uint64_t model_bits,
                                std::uint64_t t_rounds) {
  return 2 * m * model_bits * t_rounds;
}

std::uint64_t wmmse_deployment_complex_values(std::uint64_t m, std::uint64_t k,
                                              std::uint64_t n_t) {
  return m * m * k * n_t;
}

double estimate_complexity(const NetworkConfig& cfg, int hidden_dim, int n_hidden,
                           ComplexityPhase phase, int wmmse_iters) {
  const double mk = cfg.total_users(), m = cfg.cells, k = cfg.users_per_cell;
  const double nt = cfg.tx_antennas, dh = hidden_dim, nh = n_hidden;
  switch (phase) {
    case ComplexityPhase::Forward:
      return 2.0 * (mk + m + k) * nt * dh + 2.0 * nh * dh * dh  // linear maps
             + (nh + 1.0) * dh                                  // activations
             + (m + 1.0) * k * nt;                              // re/im (de)interleaving
    case ComplexityPhase::Training:
      return 3.0 * estimate_complexity(cfg, hidden_dim, n_hidden, ComplexityPhase::Forward);
    case ComplexityPhase::WmmseDeployment:
      return 8.0 * wmmse_iters * (k * k * nt * nt + k * nt * nt * nt);
  }
  throw std::invalid_argument("estimate_complexity: unknown phase");
}

std::string OverheadLedger::report(const NetworkConfig& cfg, std::uint64_t model_bits) const {
  const std::uint64_t m = cfg.cells, k = cfg.users_per_cell, nt = cfg.tx_antennas;
  std::ostringstream os;
  os << "rounds=" << rounds << "\n";
  os << "complex_up=" << complex_up << " complex_down=" << complex_down << "\n";
  os << "bits_up=" << bits_up << " bits_down=" << bits_down << "\n";
  os << "literal_complex_up=" << literal_complex_up
     << " literal_complex_down=" << literal_complex_down << "\n";
  os << "wire_bytes_up=" << wire_bytes_up << " wire_bytes_down=" << wire_bytes_down << "\n";
  os << "channel_complex_up=" << channel_complex_up << "\n";
  os << "vfl_training_complex = (M^2+M)*T*K*N_T = "
     << vfl_training_complex_values(m, k, nt, rounds) << "\n";
  os << "hfl_training_bits = 2*M*B*T = " << hfl_training_bits(m, model_bits, rounds) << "\n";
  os << "wmmse_deployment_complex = M^2*K*N_T = " << wmmse_deployment_complex_values(m, k, nt)
     << "\n";
  os << "flops_forward=" << flops_forward << " flops_training=" << flops_training
     << " flops_wmmse=" << flops_wmmse << "\n";
  os << "note: model-averaging rounds to reach accuracy eps scale as "
        "O[(1/eps)((1+1/K)EG^2 + (Gamma+G^2)/E + G^2)]; documented only, never used for "
        "control flow\n";
  return os.str();
}

namespace wire {

namespace {
void put_cvec(std::vector<std::uint8_t>& buf, const std::vector<cdouble>& v) {
  io::put_u64(buf, v.size());
  for (const auto& z : v) {
    io::put_f64(buf, z.real());
    io::put_f64(buf, z.imag());
  }
}

std::vector<cdouble> get_cvec(io::Reader& r) {
  const std::uint64_t n = r.u64();
  std::vector<cdouble> v(n);
  for (auto& z : v) {
    const double re = r.f64();
    const double im = r.f64();
    z = {re, im};
  }
  return v;
}

void put_idx(std::vector<std::uint8_t>& buf, const std::vector<std::uint32_t>& v) {
  io::put_u64(buf, v.size());
  for (auto i : v) io::put_u32(buf, i);
}

std::vector<std::uint32_t> get_idx(io::Reader& r) {
  const std::uint64_t n = r.u64();
  std::vector<std::uint32_t> v(n);
  for (auto& i : v) i = r.u32();
  return v;
}
}  // namespace

std::vector<std::uint8_t> VflUpload::serialize() const {
  std::vector<std::uint8_t> buf;
  io::put_u8(buf, static_cast<std::uint8_t>(MsgType::VflUpload));
  io::put_u32(buf, bs);
  io::put_u64(buf, round);
  io::put_u32(buf, nt);
  io::put_u32(buf, k);
  io::put_u32(buf, h_cols);
  io::put_u32(buf, g_cols);
  put_idx(buf, sample_idx);
  put_cvec(buf, w);
  put_cvec(buf, h);
  put_cvec(buf, g);
  return buf;
}

VflUpload VflUpload::parse(const std::vector<std::uint8_t>& buf) {
  io::Reader r(buf);
  if (r.u8() != static_cast<std::uint8_t>(MsgType::VflUpload))
    throw std::runtime_error("wire: not a VflUpload message");
  VflUpload m;
  m.bs = r.u32();
  m.round = r.u64();
  m.nt = r.u32();
  m.k = r.u32();
  m.h_cols = r.u32();
  m.g_cols = r.u32();
  m.sample_idx = get_idx(r);
  m.w = get_cvec(r);
  m.h = get_cvec(r);
  m.g = get_cvec(r);
  const std::size_t b = m.sample_idx.size();
  if (m.w.size() != b * m.nt * m.k || m.h.size() != b * m.nt * m.h_cols ||
      m.g.size() != b * m.nt * m.g_cols)
    throw std::runtime_error("wire: VflUpload payload size mismatch");
  return m;
}

std::vector<std::uint8_t> VflGrads::serialize() const {
  std::vector<std::uint8_t> buf;
  io::put_u8(buf, static_cast<std::uint8_t>(MsgType::VflGrads));
  io::put_u32(buf, bs);
  io::put_u64(buf, round);
  io::put_u32(buf, nt);
  io::put_u32(buf, k);
  io::put_f64(buf, mean_loss);
  put_idx(buf, sample_idx);
  put_cvec(buf, dw);
  return buf;
}

VflGrads VflGrads::parse(const std::vector<std::uint8_t>& buf) {
  io::Reader r(buf);
  if (r.u8() != static_cast<std::uint8_t>(MsgType::VflGrads))
    throw std::runtime_error("wire: not a VflGrads message");
  VflGrads m;
  m.bs = r.u32();
  m.round = r.u64();
  m.nt = r.u32();
  m.k = r.u32();
  m.mean_loss = r.f64();
  m.sample_idx = get_idx(r);
  m.dw = get_cvec(r);
  if (m.dw.size() != m.sample_idx.size() * m.nt * m.k)
    throw std::runtime_error("wire: VflGrads payload size mismatch");
  return m;
}

std::vector<std::uint8_t> ModelParams::serialize() const {
  std::vector<std::uint8_t> buf;
  io::put_u8(buf, static_cast<std::uint8_t>(MsgType::ModelParams));
  io::put_u64(buf, round);
  io::put_u64(buf, params.size());
  for (double v : params) io::put_f64(buf, v);
  return buf;
}

ModelParams ModelParams::parse(const std::vector<std::uint8_t>& buf) {
  io::Reader r(buf);
  if (r.u8() != static_cast<std::uint8_t>(MsgType::ModelParams))
    throw std::runtime_error("wire: not a ModelParams message");
  ModelParams m;
  m.round = r.u64();
  m.params.resize(r.u64());
  for (auto& v : m.params) v = r.f64();
  return m;
}

}  // namespace wire

MlpModel fedavg(const std::vector<const MlpModel*>& replicas) {
  if (replicas.empty()) throw std::invalid_argument("fedavg: no replicas");
  const MlpModel& first = *replicas[0];
  for (const auto* r : replicas)
    if (r->dims() != first.dims()) throw std::invalid_argument("fedavg: architecture mismatch");

  MlpModel out = first;
  auto& p = out.params();
  const long double count = static_cast<long double>(replicas.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    // extended-precision accumulation: the mean of identical replicas comes
    // back bit-identical (k * mantissa still fits the wider significand)
    long double s = 0.0L;
    for (const auto* r : replicas) s += r->params()[i];
    p[i] = static_cast<double>(s / count);
  }
  std::vector<std::uint8_t> mask(p.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i)
    for (const auto* r : replicas)
      if (r->mask()[i]) {
        mask[i] = 1;
        break;
      }
  out.set_mask(mask);
  out.apply_mask();
  return out;
}

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

namespace {

// Leaf gradients of a column-major (re, im) beamformer block, remapped to the
// model's output layout (re block then im block).
void remap_leaf_grads_to_output(const double* leaf, int nt, int k, double* row) {
  const int nk = nt * k;
  for (int e = 0; e < nk; ++e) {
    row[e] = leaf[2 * e];
    row[nk + e] = leaf[2 * e + 1];
  }
}

double ramp(std::uint64_t done, double planned, double frac) {
  if (frac <= 0.0) return 1.0;
  const double horizon = frac * planned;
  if (horizon <= 0.0) return 1.0;
  return std::min(1.0, static_cast<double>(done) / horizon);
}

}  // namespace

RoundStats local_minibatch_step(MlpModel& model, Optimizer& opt, const NetworkConfig& cfg,
                                const Dataset& ds, int m, std::span<const int> indices, double rho,
                                double alpha_eff, double beta_eff, bool serving_only,
                                Rng& dropout_rng, LocalWorkspace& ws) {
  if (ds.samples.empty()) throw std::invalid_argument("local training: empty dataset");
  const int batch = static_cast<int>(indices.size());
  const int nt = cfg.tx_antennas, k = cfg.users_per_cell;
  const int in_dim = model.config().input_dim, out_dim = model.config().output_dim;

  ws.x.resize(static_cast<std::size_t>(batch) * in_dim);
  for (int r = 0; r < batch; ++r) {
    const auto enc = encode_for_bs(cfg, ds.samples[indices[r]], m, serving_only);
    std::copy(enc.begin(), enc.end(), ws.x.begin() + static_cast<std::size_t>(r) * in_dim);
  }

  ForwardBatch& rec = ws.rec;
  model.forward_batch(ws.x.data(), batch, cfg.tx_power, nt, k, RunMode::Train, &dropout_rng, rec);

  ws.dldw.resize(static_cast<std::size_t>(batch) * out_dim);
  std::vector<double> losses(batch), rc(batch), rs(batch);
#pragma omp parallel
  {
    static thread_local ad::Tape tape;
    static thread_local std::vector<double> leaf_grads;
#pragma omp for schedule(static)
    for (int r = 0; r < batch; ++r) {
      const ChannelSample& s = ds.samples[indices[r]];
      tape.clear();
      const VarCMat w = leaf_cmat(tape, rec.w_out[r]);
      const ad::NodeId loss =
          hfl_local_loss(tape, cfg, s.H[m], s.G[m], m, w, rho, alpha_eff, beta_eff);
      losses[r] = tape.value(loss);
      tape.backward_into(loss, leaf_grads);
      remap_leaf_grads_to_output(leaf_grads.data(), nt, k,
                                 ws.dldw.data() + static_cast<std::size_t>(r) * out_dim);
      rc[r] = -hfl_local_loss_value(cfg, s.H[m], s.G[m], m, rec.w_out[r], 1.0, 0.0, 0.0);
      rs[r] = -hfl_local_loss_value(cfg, s.H[m], s.G[m], m, rec.w_out[r], 0.0, 0.0, 0.0);
    }
  }

  ws.grads.assign(model.params().size(), 0.0);
  model.backward_batch(rec, ws.dldw.data(), 1.0 / batch, ws.grads, ws.scratch);
  opt.step(model.params(), ws.grads);
  model.apply_mask();

  RoundStats st;
  for (int r = 0; r < batch; ++r) {
    st.loss += losses[r];
    st.r_comm += rc[r];
    st.r_sense += rs[r];
  }
  st.loss /= batch;
  st.r_comm /= batch;
  st.r_sense /= batch;
  return st;
}

RoundStats hfl_local_train(MlpModel& model, Optimizer& opt, const NetworkConfig& cfg,
                           const Dataset& ds, int m, const TrainHyper& hp, int epochs,
                           double anneal, std::uint64_t round_index, LocalWorkspace& ws) {
  if (ds.samples.empty()) throw std::invalid_argument("hfl_local_train: empty dataset");
  const double alpha_eff = hp.alpha / cfg.noise_comm * anneal;
  const double beta_eff = hp.beta / cfg.noise_sense * anneal;
  const int n = static_cast<int>(ds.samples.size());
  const int batch = std::min(hp.batch, n);
  const int steps_per_epoch = std::max(1, n / batch);

  RoundStats agg;
  int steps = 0;
  Rng base = Rng(hp.seed).fork2(0xB5, round_index).fork(static_cast<std::uint64_t>(m));
  for (int e = 0; e < epochs; ++e) {
    Rng order_rng = base.fork2(0x0E, static_cast<std::uint64_t>(e));
    Rng drop_rng = base.fork2(0xD0, static_cast<std::uint64_t>(e));
    const auto order = shuffled_indices(n, order_rng);
    for (int s = 0; s < steps_per_epoch; ++s) {
      const std::span<const int> idx(order.data() + static_cast<std::size_t>(s) * batch, batch);
      const RoundStats st = local_minibatch_step(model, opt, cfg, ds, m, idx, hp.rho, alpha_eff,
                                                 beta_eff, false, drop_rng, ws);
      agg.loss += st.loss;
      agg.r_comm += st.r_comm;
      agg.r_sense += st.r_sense;
      ++steps;
    }
  }
  if (steps > 0) {
    agg.loss /= steps;
    agg.r_comm /= steps;
    agg.r_sense /= steps;
  }
  return agg;
}

VflSession::VflSession(const NetworkConfig& cfg, const MlpConfig& arch, const TrainHyper& hp,
                       int planned_steps)
    : cfg_(cfg), hp_(hp), planned_steps_(planned_steps) {
  cfg_.validate();
  Rng root(hp.seed);
  for (int m = 0; m < cfg.cells; ++m) {
    models_.push_back(MlpModel::init(arch, root.fork2(0x11, static_cast<std::uint64_t>(m)).key()));
    opts_.emplace_back(hp.opt);
  }
  ledger_.flops_forward =
      estimate_complexity(cfg, arch.hidden_dim, arch.n_hidden, ComplexityPhase::Forward);
  ledger_.flops_training =
      estimate_complexity(cfg, arch.hidden_dim, arch.n_hidden, ComplexityPhase::Training);
}

RoundStats VflSession::round(const Dataset& ds, std::span<const int> indices) {
  const int mc = cfg_.cells, kk = cfg_.users_per_cell, nt = cfg_.tx_antennas;
  const int batch = static_cast<int>(indices.size());
  if (batch == 0) throw std::invalid_argument("vfl round: empty minibatch");
  const int in_dim = models_[0].config().input_dim;
  const int out_dim = models_[0].config().output_dim;
  const int nk = nt * kk, h_cols = cfg_.total_users(), g_cols = mc;

  // Local forward passes and uploads; the per-BS work is independent and
  // runs concurrently (inner kernels fall back to one thread while nested).
  recs_.resize(mc);
  x_.resize(mc);
  std::vector<ForwardBatch>& recs = recs_;
  std::vector<std::vector<std::uint8_t>> upload_bytes(mc);
#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < mc; ++m) {
    auto& x = x_[m];
    x.resize(static_cast<std::size_t>(batch) * in_dim);
    for (int r = 0; r < batch; ++r) {
      const auto enc = encode_for_bs(cfg_, ds.samples[indices[r]], m, false);
      std::copy(enc.begin(), enc.end(), x.begin() + static_cast<std::size_t>(r) * in_dim);
    }
    Rng drop = Rng(hp_.seed).fork2(0xDA, round_).fork(static_cast<std::uint64_t>(m));
    models_[m].forward_batch(x.data(), batch, cfg_.tx_power, nt, kk, RunMode::Train, &drop,
                             recs[m]);

    wire::VflUpload up;
    up.bs = static_cast<std::uint32_t>(m);
    up.round = round_;
    up.nt = static_cast<std::uint32_t>(nt);
    up.k = static_cast<std::uint32_t>(kk);
    up.h_cols = static_cast<std::uint32_t>(h_cols);
    up.g_cols = static_cast<std::uint32_t>(g_cols);
    for (int r = 0; r < batch; ++r) {
      up.sample_idx.push_back(static_cast<std::uint32_t>(indices[r]));
      const CMat& w = recs[m].w_out[r];
      for (int j = 0; j < kk; ++j)
        for (int i = 0; i < nt; ++i) up.w.push_back(w(i, j));
      const ChannelSample& s = ds.samples[indices[r]];
      for (int j = 0; j < h_cols; ++j)
        for (int i = 0; i < nt; ++i) up.h.push_back(s.H[m](i, j));
      for (int j = 0; j < g_cols; ++j)
        for (int i = 0; i < nt; ++i) up.g.push_back(s.G[m](i, j));
    }
    upload_bytes[m] = up.serialize();
  }
  for (int m = 0; m < mc; ++m) {
    ledger_.wire_bytes_up += upload_bytes[m].size();
    ledger_.complex_up += static_cast<std::uint64_t>(mc + 1) * kk * nt;  // per-iteration basis
    ledger_.literal_complex_up += static_cast<std::uint64_t>(batch) * (nk + nt * (h_cols + g_cols));
    ledger_.channel_complex_up += static_cast<std::uint64_t>(batch) * nt * (h_cols + g_cols);
  }

  // Server: parse uploads, check alignment, rebuild the global view.
  std::vector<wire::VflUpload> ups;
  ups.reserve(mc);
  for (int m = 0; m < mc; ++m) ups.push_back(wire::VflUpload::parse(upload_bytes[m]));
  for (int m = 1; m < mc; ++m)
    if (ups[m].sample_idx != ups[0].sample_idx)
      throw std::runtime_error("vfl round: misaligned sample indices across uploads");

  std::vector<ChannelSample> rebuilt(batch);
  std::vector<std::vector<CMat>> w_mats(batch, std::vector<CMat>(mc, CMat(nt, kk)));
  for (int r = 0; r < batch; ++r) {
    rebuilt[r].H.assign(mc, CMat(nt, h_cols));
    rebuilt[r].G.assign(mc, CMat(nt, g_cols));
    for (int m = 0; m < mc; ++m) {
      const auto& up = ups[m];
      for (int j = 0; j < kk; ++j)
        for (int i = 0; i < nt; ++i)
          w_mats[r][m](i, j) = up.w[static_cast<std::size_t>(r) * nk + j * nt + i];
      for (int j = 0; j < h_cols; ++j)
        for (int i = 0; i < nt; ++i)
          rebuilt[r].H[m](i, j) = up.h[static_cast<std::size_t>(r) * nt * h_cols + j * nt + i];
      for (int j = 0; j < g_cols; ++j)
        for (int i = 0; i < nt; ++i)
          rebuilt[r].G[m](i, j) = up.g[static_cast<std::size_t>(r) * nt * g_cols + j * nt + i];
    }
  }

  // One tape per sample spanning all M branches.
  std::vector<double> losses(batch), rcs(batch), rss(batch);
  dw_.resize(batch);
  std::vector<std::vector<double>>& dw = dw_;
#pragma omp parallel
  {
    static thread_local ad::Tape tape;
#pragma omp for schedule(static)
    for (int r = 0; r < batch; ++r) {
      tape.clear();
      std::vector<VarCMat> w_vars;
      w_vars.reserve(mc);
      for (int m = 0; m < mc; ++m) w_vars.push_back(leaf_cmat(tape, w_mats[r][m]));
      const ad::NodeId loss = vfl_global_loss(tape, cfg_, rebuilt[r], w_vars, hp_.rho);
      losses[r] = tape.value(loss);
      tape.backward_into(loss, dw[r]);  // bs-major, column-major (re, im) pairs
      const NetworkState st{cfg_, rebuilt[r], w_mats[r]};
      rcs[r] = sum_comm_rate(st);
      rss[r] = sum_radar_rate(st);
    }
  }

  RoundStats stats;
  for (int r = 0; r < batch; ++r) {
    stats.loss += losses[r];
    stats.r_comm += rcs[r];
    stats.r_sense += rss[r];
  }
  stats.loss /= batch;
  stats.r_comm /= batch;
  stats.r_sense /= batch;

  // Per-branch gradients travel back; each BS chains them through its model.
  scratch_.resize(mc);
  grads_.resize(mc);
  dldw_.resize(mc);
  std::vector<std::size_t> grad_bytes(mc);
#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < mc; ++m) {
    wire::VflGrads gm;
    gm.bs = static_cast<std::uint32_t>(m);
    gm.round = round_;
    gm.nt = static_cast<std::uint32_t>(nt);
    gm.k = static_cast<std::uint32_t>(kk);
    gm.mean_loss = stats.loss;
    gm.sample_idx = ups[0].sample_idx;
    gm.dw.resize(static_cast<std::size_t>(batch) * nk);
    for (int r = 0; r < batch; ++r)
      for (int e = 0; e < nk; ++e) {
        const double* leaf = dw[r].data() + (static_cast<std::size_t>(m) * nk + e) * 2;
        gm.dw[static_cast<std::size_t>(r) * nk + e] = {leaf[0], leaf[1]};
      }
    const auto bytes = gm.serialize();
    grad_bytes[m] = bytes.size();
    const auto parsed = wire::VflGrads::parse(bytes);

    auto& dldw = dldw_[m];
    dldw.resize(static_cast<std::size_t>(batch) * out_dim);
    for (int r = 0; r < batch; ++r) {
      double* row = dldw.data() + static_cast<std::size_t>(r) * out_dim;
      for (int j = 0; j < kk; ++j)
        for (int i = 0; i < nt; ++i) {
          const cdouble z = parsed.dw[static_cast<std::size_t>(r) * nk + j * nt + i];
          row[j * nt + i] = z.real();
          row[nk + j * nt + i] = z.imag();
        }
    }
    grads_[m].assign(models_[m].params().size(), 0.0);
    models_[m].backward_batch(recs[m], dldw.data(), 1.0 / batch, grads_[m], scratch_[m]);
    opts_[m].step(models_[m].params(), grads_[m]);
    models_[m].apply_mask();
  }
  for (int m = 0; m < mc; ++m) {
    ledger_.wire_bytes_down += grad_bytes[m];
    ledger_.literal_complex_down += static_cast<std::uint64_t>(batch) * nk;
  }

  ++round_;
  ++ledger_.rounds;
  return stats;
}

HflSession::HflSession(const NetworkConfig& cfg, const MlpConfig& arch, const TrainHyper& hp,
                       int planned_rounds, int local_epochs)
    : cfg_(cfg), hp_(hp), planned_rounds_(planned_rounds), local_epochs_(local_epochs) {
  cfg_.validate();
  if (local_epochs < 0) throw std::invalid_argument("hfl: local epoch count must be >= 0");
  global_ = MlpModel::init(arch, Rng(hp.seed).fork(0x61).key());
  replicas_.assign(cfg.cells, global_);
  for (int m = 0; m < cfg.cells; ++m) opts_.emplace_back(hp.opt);
  ledger_.flops_forward =
      estimate_complexity(cfg, arch.hidden_dim, arch.n_hidden, ComplexityPhase::Forward);
  ledger_.flops_training =
      estimate_complexity(cfg, arch.hidden_dim, arch.n_hidden, ComplexityPhase::Training);
}

RoundStats HflSession::round(const Dataset& ds) {
  const std::uint64_t model_bits = static_cast<std::uint64_t>(global_.parameter_bits());
  const double anneal = ramp(round_, planned_rounds_, hp_.anneal_frac);

  // Broadcast.
  wire::ModelParams bc;
  bc.round = round_;
  bc.params = global_.params();
  const auto bc_bytes = bc.serialize();
  for (int m = 0; m < cfg_.cells; ++m) {
    ledger_.wire_bytes_down += bc_bytes.size();
    ledger_.bits_down += model_bits;
    const auto parsed = wire::ModelParams::parse(bc_bytes);
    replicas_[m].params() = parsed.params;
    replicas_[m].set_mask(global_.mask());
  }

  // Parallel local training; replicas are independent, so the result does
  // not depend on scheduling (stats are merged in BS order below).
  ws_.resize(cfg_.cells);
  std::vector<RoundStats> per_bs(cfg_.cells);
#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < cfg_.cells; ++m)
    per_bs[m] = hfl_local_train(replicas_[m], opts_[m], cfg_, ds, m, hp_, local_epochs_, anneal,
                                round_, ws_[m]);
  RoundStats agg;
  for (int m = 0; m < cfg_.cells; ++m) {
    agg.loss += per_bs[m].loss;
    agg.r_comm += per_bs[m].r_comm;
    agg.r_sense += per_bs[m].r_sense;
  }
  agg.loss /= cfg_.cells;
  agg.r_comm /= cfg_.cells;
  agg.r_sense /= cfg_.cells;

  // Upload and aggregate.
  std::vector<const MlpModel*> ptrs;
  for (int m = 0; m < cfg_.cells; ++m) {
    wire::ModelParams up;
    up.round = round_;
    up.params = replicas_[m].params();
    ledger_.wire_bytes_up += up.serialize().size();
    ledger_.bits_up += model_bits;
    ptrs.push_back(&replicas_[m]);
  }
  global_ = fedavg(ptrs);
  for (int m = 0; m < cfg_.cells; ++m) replicas_[m] = global_;

  ++round_;
  ++ledger_.rounds;
  return agg;
}

}  // namespace isac
