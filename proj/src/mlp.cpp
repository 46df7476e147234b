// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "isac/io.hpp"
#include "isac/kernels.hpp"

namespace isac {

namespace {
constexpr char kMagic[8] = {'I', 'S', 'A', 'C', 'M', 'D', 'L', '1'};
constexpr std::uint8_t kVersion = 1;
}  // namespace

std::vector<double> encode_input(const CMat& h, const CMat& g) {
  const int nt = h.rows();
  if (g.rows() != nt) throw std::invalid_argument("encode_input: row mismatch between H and G");
  std::vector<double> x;
  x.reserve(2 * static_cast<std::size_t>(nt) * (h.cols() + g.cols()));
  for (int j = 0; j < h.cols(); ++j)
    for (int i = 0; i < nt; ++i) x.push_back(h(i, j).real());
  for (int j = 0; j < h.cols(); ++j)
    for (int i = 0; i < nt; ++i) x.push_back(h(i, j).imag());
  for (int j = 0; j < g.cols(); ++j)
    for (int i = 0; i < nt; ++i) x.push_back(g(i, j).real());
  for (int j = 0; j < g.cols(); ++j)
    for (int i = 0; i < nt; ++i) x.push_back(g(i, j).imag());
  return x;
}

void decode_input(const std::vector<double>& x, int nt, int h_cols, int g_cols, CMat& h, CMat& g) {
  const std::size_t expect = 2 * static_cast<std::size_t>(nt) * (h_cols + g_cols);
  if (x.size() != expect) throw std::invalid_argument("decode_input: length mismatch");
  h = CMat(nt, h_cols);
  g = CMat(nt, g_cols);
  std::size_t p = 0;
  for (int j = 0; j < h_cols; ++j)
    for (int i = 0; i < nt; ++i) h(i, j).real(x[p++]);
  for (int j = 0; j < h_cols; ++j)
    for (int i = 0; i < nt; ++i) h(i, j).imag(x[p++]);
  for (int j = 0; j < g_cols; ++j)
    for (int i = 0; i < nt; ++i) g(i, j).real(x[p++]);
  for (int j = 0; j < g_cols; ++j)
    for (int i = 0; i < nt; ++i) g(i, j).imag(x[p++]);
}

std::vector<double> encode_for_bs(const NetworkConfig& cfg, const ChannelSample& sample, int m,
                                  bool serving_only) {
  const int mc = cfg.cells, kk = cfg.users_per_cell, nt = cfg.tx_antennas;
  CMat h(nt, mc * kk), g(nt, mc);
  for (int j = 0; j < mc; ++j) {
    const int n = (m + j) % mc;  // rotated cell order, serving cell first
    const bool keep = !serving_only || j == 0;
    if (keep) {
      for (int k = 0; k < kk; ++k)
        for (int i = 0; i < nt; ++i) h(i, j * kk + k) = sample.H[m](i, n * kk + k);
      for (int i = 0; i < nt; ++i) g(i, j) = sample.G[m](i, n);
    }
  }
  return encode_input(h, g);
}

MlpConfig mlp_config_for(const NetworkConfig& cfg, int hidden_dim, int n_hidden) {
  MlpConfig mc;
  mc.input_dim = 2 * cfg.tx_antennas * (cfg.total_users() + cfg.cells);
  mc.hidden_dim = hidden_dim;
  mc.n_hidden = n_hidden;
  mc.output_dim = 2 * cfg.tx_antennas * cfg.users_per_cell;
  return mc;
}

void MlpModel::build_offsets() {
  dims_.clear();
  dims_.push_back(cfg_.input_dim);
  for (int l = 0; l < cfg_.n_hidden; ++l) dims_.push_back(cfg_.hidden_dim);
  dims_.push_back(cfg_.output_dim);
  w_off_.clear();
  b_off_.clear();
  std::size_t off = 0;
  for (int l = 0; l < n_layers(); ++l) {
    w_off_.push_back(off);
    off += static_cast<std::size_t>(dims_[l]) * dims_[l + 1];
    b_off_.push_back(off);
    off += dims_[l + 1];
  }
  params_.resize(off);
  mask_.assign(off, 1);
}

MlpModel MlpModel::init(const MlpConfig& cfg, std::uint64_t seed) {
  if (cfg.input_dim < 1 || cfg.output_dim < 1 || cfg.hidden_dim < 1 || cfg.n_hidden < 0)
    throw std::invalid_argument("mlp: bad dimensions");
  if (cfg.dropout_p < 0.0 || cfg.dropout_p >= 1.0)
    throw std::invalid_argument("mlp: dropout probability must lie in [0, 1)");
  MlpModel m;
  m.cfg_ = cfg;
  m.seed_ = seed;
  m.build_offsets();
  Rng root(seed);
  for (int l = 0; l < m.n_layers(); ++l) {
    Rng lr = root.fork(static_cast<std::uint64_t>(l));
    const double bound = std::sqrt(6.0 / m.dims_[l]);  // fan-in uniform
    auto w = m.weight(l);
    for (auto& v : w) v = lr.uniform(-bound, bound);
    auto b = m.bias(l);
    for (auto& v : b) v = 0.0;
  }
  return m;
}

std::span<double> MlpModel::weight(int layer) {
  return {params_.data() + w_off_[layer], static_cast<std::size_t>(dims_[layer]) * dims_[layer + 1]};
}
std::span<double> MlpModel::bias(int layer) {
  return {params_.data() + b_off_[layer], static_cast<std::size_t>(dims_[layer + 1])};
}
std::span<const double> MlpModel::weight(int layer) const {
  return {params_.data() + w_off_[layer], static_cast<std::size_t>(dims_[layer]) * dims_[layer + 1]};
}
std::span<const double> MlpModel::bias(int layer) const {
  return {params_.data() + b_off_[layer], static_cast<std::size_t>(dims_[layer + 1])};
}

void MlpModel::forward_batch(const double* x, int batch, double p_t, int nt, int k_users,
                             RunMode mode, Rng* dropout_rng, ForwardBatch& rec) const {
  if (2 * nt * k_users != cfg_.output_dim)
    throw std::invalid_argument("mlp forward: output shape mismatch");
  const int nl = n_layers();
  rec.batch = batch;
  rec.mode = mode;
  rec.acts.resize(nl + 1);
  rec.keep.resize(cfg_.n_hidden);
  rec.min_abs_preact = std::numeric_limits<double>::infinity();
  rec.acts[0].assign(x, x + static_cast<std::size_t>(batch) * cfg_.input_dim);

  const bool use_dropout = mode == RunMode::Train && cfg_.dropout_p > 0.0;
  if (use_dropout && dropout_rng == nullptr)
    throw std::invalid_argument("mlp forward: train mode needs a dropout rng");
  const double inv_keep = 1.0 / (1.0 - cfg_.dropout_p);

  for (int l = 0; l < nl; ++l) {
    const int in = dims_[l], out = dims_[l + 1];
    auto& y = rec.acts[l + 1];
    y.resize(static_cast<std::size_t>(batch) * out);
    kern::gemm_nn(batch, in, out, rec.acts[l].data(), params_.data() + w_off_[l], y.data());
    const double* b = params_.data() + b_off_[l];
    const bool hidden = l < cfg_.n_hidden;
    const double slope = cfg_.leaky_slope;
    double minabs = rec.min_abs_preact;
#pragma omp parallel for schedule(static) reduction(min : minabs)
    for (int r = 0; r < batch; ++r) {
      double* __restrict row = y.data() + static_cast<std::size_t>(r) * out;
      for (int j = 0; j < out; ++j) {
        double z = row[j] + b[j];
        if (hidden) {
          minabs = std::min(minabs, std::abs(z));
          z = z > 0.0 ? z : slope * z;
        }
        row[j] = z;
      }
    }
    rec.min_abs_preact = minabs;
    if (hidden && use_dropout) {
      auto& mask = rec.keep[l];
      mask.resize(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) {
        const bool keep = dropout_rng->uniform() >= cfg_.dropout_p;
        mask[i] = keep ? 1 : 0;
        y[i] = keep ? y[i] * inv_keep : 0.0;
      }
    }
  }

  // Power normalization and complex reconstruction.
  const auto& raw = rec.acts[nl];
  const int out = cfg_.output_dim;
  const int nk = nt * k_users;
  rec.norm_sq.resize(batch);
  rec.scale.resize(batch);
  if (static_cast<int>(rec.w_out.size()) != batch || rec.w_out.empty() ||
      rec.w_out[0].rows() != nt || rec.w_out[0].cols() != k_users)
    rec.w_out.assign(batch, CMat(nt, k_users));
  for (int r = 0; r < batch; ++r) {
    const double* row = raw.data() + static_cast<std::size_t>(r) * out;
    double s = 0.0;
    for (int j = 0; j < out; ++j) s += row[j] * row[j];
    if (s == 0.0) throw std::runtime_error("mlp forward: degenerate output (all-zero beamformer)");
    const double c = std::sqrt(p_t / s);
    rec.norm_sq[r] = s;
    rec.scale[r] = c;
    CMat& w = rec.w_out[r];
    for (int j = 0; j < k_users; ++j)
      for (int i = 0; i < nt; ++i)
        w(i, j) = {c * row[j * nt + i], c * row[nk + j * nt + i]};
  }
}

CMat MlpModel::forward_eval(const std::vector<double>& x, double p_t, int nt, int k_users) const {
  if (static_cast<int>(x.size()) != cfg_.input_dim)
    throw std::invalid_argument("mlp forward: input length mismatch");
  ForwardBatch rec;
  forward_batch(x.data(), 1, p_t, nt, k_users, RunMode::Eval, nullptr, rec);
  return rec.w_out[0];
}

void MlpModel::backward_batch(const ForwardBatch& rec, const double* d_loss_d_w, double scale,
                              std::vector<double>& grads) const {
  Scratch scratch;
  backward_batch(rec, d_loss_d_w, scale, grads, scratch);
}

void MlpModel::backward_batch(const ForwardBatch& rec, const double* d_loss_d_w, double scale,
                              std::vector<double>& grads, Scratch& sc) const {
  if (grads.size() != params_.size()) throw std::invalid_argument("mlp backward: grad size");
  const int nl = n_layers();
  const int batch = rec.batch;
  const int out = cfg_.output_dim;

  // Through the normalization layer: w = c(x) * x with c = sqrt(p_t / sum x^2),
  // so dL/dx = c * g - (c / s) * (g . x) * x. The 1/batch (or other) scaling
  // is folded in here once and inherited by every parameter gradient below.
  std::vector<double>& dy = sc.dy;
  dy.resize(static_cast<std::size_t>(batch) * out);
  const auto& raw = rec.acts[nl];
  for (int r = 0; r < batch; ++r) {
    const double* g = d_loss_d_w + static_cast<std::size_t>(r) * out;
    const double* xr = raw.data() + static_cast<std::size_t>(r) * out;
    double* d = dy.data() + static_cast<std::size_t>(r) * out;
    const double c = rec.scale[r], s = rec.norm_sq[r];
    double dot = 0.0;
    for (int j = 0; j < out; ++j) dot += g[j] * xr[j];
    const double f = c / s * dot;
    for (int j = 0; j < out; ++j) d[j] = scale * (c * g[j] - f * xr[j]);
  }

  const double inv_keep = 1.0 / (1.0 - cfg_.dropout_p);
  std::vector<double>& scratch = sc.tr;
  std::vector<double>& dx = sc.dx;
  for (int l = nl - 1; l >= 0; --l) {
    const int in = dims_[l], outl = dims_[l + 1];
    // dW = X^T dY, db = column sums of dY.
    scratch.resize(static_cast<std::size_t>(in) * batch);
    kern::transpose(batch, in, rec.acts[l].data(), scratch.data());
    kern::gemm_nn(in, batch, outl, scratch.data(), dy.data(), grads.data() + w_off_[l], true);
    kern::col_sums(batch, outl, dy.data(), grads.data() + b_off_[l], true);
    if (l == 0) break;
    // dX = dY W^T, then back through dropout and the activation.
    scratch.resize(static_cast<std::size_t>(outl) * in);
    kern::transpose(in, outl, params_.data() + w_off_[l], scratch.data());
    dx.resize(static_cast<std::size_t>(batch) * in);
    kern::gemm_nn(batch, outl, in, dy.data(), scratch.data(), dx.data());
    const auto& act = rec.acts[l];
    const bool dropped = rec.mode == RunMode::Train && cfg_.dropout_p > 0.0;
    const std::int64_t total = static_cast<std::int64_t>(dx.size());
    const double slope = cfg_.leaky_slope;
    double* __restrict d = dx.data();
    const double* __restrict a = act.data();
    const std::uint8_t* keep = dropped ? rec.keep[l - 1].data() : nullptr;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
      double v = d[i];
      if (keep) v = keep[i] ? v * inv_keep : 0.0;
      d[i] = a[i] > 0.0 ? v : v * slope;
    }
    dy.swap(dx);
  }
}

void MlpModel::set_mask(const std::vector<std::uint8_t>& m) {
  if (m.size() != mask_.size()) throw std::invalid_argument("set_mask: size mismatch");
  mask_ = m;
}

void MlpModel::apply_mask() {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (!mask_[i]) params_[i] = 0.0;
}

void MlpModel::prune(double factor) {
  if (factor < 0.0 || factor > 1.0) throw std::invalid_argument("prune: factor must be in [0, 1]");
  std::vector<std::size_t> idx;
  for (int l = 0; l < n_layers(); ++l) {
    const std::size_t n = static_cast<std::size_t>(dims_[l]) * dims_[l + 1];
    for (std::size_t i = 0; i < n; ++i) idx.push_back(w_off_[l] + i);
  }
  const auto k = static_cast<std::size_t>(std::llround(factor * static_cast<double>(idx.size())));
  if (k == 0) return;
  auto cmp = [this](std::size_t a, std::size_t b) {
    const double ma = std::abs(params_[a]), mb = std::abs(params_[b]);
    if (ma != mb) return ma < mb;
    return a < b;  // deterministic tie-break
  };
  std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), cmp);
  for (std::size_t i = 0; i < k; ++i) {
    mask_[idx[i]] = 0;
    params_[idx[i]] = 0.0;
  }
}

std::int64_t MlpModel::parameter_count() const {
  return std::count(mask_.begin(), mask_.end(), std::uint8_t{1});
}

std::int64_t MlpModel::prunable_count() const {
  std::int64_t n = 0;
  for (int l = 0; l < n_layers(); ++l) n += static_cast<std::int64_t>(dims_[l]) * dims_[l + 1];
  return n;
}

std::vector<std::uint8_t> MlpModel::serialize() const {
  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), kMagic, kMagic + 8);
  io::put_u8(buf, kVersion);
  io::put_u32(buf, static_cast<std::uint32_t>(dims_.size()));
  for (int d : dims_) io::put_u32(buf, static_cast<std::uint32_t>(d));
  io::put_f64(buf, cfg_.leaky_slope);
  io::put_f64(buf, cfg_.dropout_p);
  const bool any_masked = std::find(mask_.begin(), mask_.end(), std::uint8_t{0}) != mask_.end();
  io::put_u8(buf, any_masked ? 1 : 0);
  io::put_u64(buf, seed_);
  for (double v : params_) io::put_f64(buf, v);
  if (any_masked) {
    for (std::size_t i = 0; i < mask_.size(); i += 8) {
      std::uint8_t b = 0;
      for (std::size_t j = 0; j < 8 && i + j < mask_.size(); ++j)
        if (mask_[i + j]) b |= static_cast<std::uint8_t>(1u << j);
      io::put_u8(buf, b);
    }
  }
  return buf;
}

MlpModel MlpModel::deserialize(const std::vector<std::uint8_t>& buf) {
  io::Reader r(buf);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("model: bad magic");
  if (r.u8() != kVersion) throw std::runtime_error("model: unsupported version");
  const std::uint32_t nd = r.u32();
  if (nd < 2) throw std::runtime_error("model: bad layer count");
  std::vector<int> dims(nd);
  for (auto& d : dims) d = static_cast<int>(r.u32());
  MlpModel m;
  m.cfg_.input_dim = dims.front();
  m.cfg_.output_dim = dims.back();
  m.cfg_.n_hidden = static_cast<int>(nd) - 2;
  m.cfg_.hidden_dim = nd > 2 ? dims[1] : 0;
  m.cfg_.leaky_slope = r.f64();
  m.cfg_.dropout_p = r.f64();
  const bool any_masked = r.u8() != 0;
  m.seed_ = r.u64();
  m.build_offsets();
  if (m.dims_ != dims) throw std::runtime_error("model: inconsistent layer dims");
  for (auto& v : m.params_) v = r.f64();
  if (any_masked) {
    for (std::size_t i = 0; i < m.mask_.size(); i += 8) {
      const std::uint8_t b = r.u8();
      for (std::size_t j = 0; j < 8 && i + j < m.mask_.size(); ++j)
        m.mask_[i + j] = (b >> j) & 1u;
    }
  }
  if (!r.at_end()) throw std::runtime_error("model: trailing bytes");
  return m;
}

void MlpModel::save(const std::string& path) const { io::write_file(path, serialize()); }

MlpModel MlpModel::load(const std::string& path) { return deserialize(io::read_file(path)); }

VarCMat MlpModel::forward_on_tape(ad::Tape& t, const std::vector<double>& x, double p_t, int nt,
                                  int k_users) const {
  if (static_cast<int>(x.size()) != cfg_.input_dim)
    throw std::invalid_argument("mlp tape forward: input length mismatch");
  std::vector<ad::NodeId> pid(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) pid[i] = t.leaf(params_[i]);

  std::vector<ad::NodeId> cur(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cur[i] = t.constant(x[i]);

  for (int l = 0; l < n_layers(); ++l) {
    const int in = dims_[l], out = dims_[l + 1];
    std::vector<ad::NodeId> next(out);
    std::vector<ad::NodeId> terms;
    for (int j = 0; j < out; ++j) {
      terms.clear();
      for (int i = 0; i < in; ++i)
        terms.push_back(t.mul(pid[w_off_[l] + static_cast<std::size_t>(i) * out + j], cur[i]));
      terms.push_back(pid[b_off_[l] + j]);
      ad::NodeId z = t.sum(terms);
      next[j] = l < cfg_.n_hidden ? t.leaky_relu(z, cfg_.leaky_slope) : z;
    }
    cur.swap(next);
  }

  VarCMat raw;
  raw.rows = nt;
  raw.cols = k_users;
  raw.v.resize(static_cast<std::size_t>(nt) * k_users);
  const int nk = nt * k_users;
  for (int j = 0; j < k_users; ++j)
    for (int i = 0; i < nt; ++i) raw.at(i, j) = {cur[j * nt + i], cur[nk + j * nt + i]};
  return normalize_power(t, raw, p_t);
}

}  // namespace isac
