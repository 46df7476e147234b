// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "isac/channel.hpp"
#include "isac/cmat.hpp"
#include "isac/metrics_graph.hpp"
#include "isac/rng.hpp"
#include "isac/tape.hpp"

namespace isac {

struct MlpConfig {
  int input_dim = 0;
  int hidden_dim = 512;
  int n_hidden = 4;
  int output_dim = 0;  // 2 * N_T * K
  double leaky_slope = 0.01;
  double dropout_p = 0.15;
};

enum class RunMode { Train, Eval };

/// Flattens [Re(H), Im(H), Re(G), Im(G)] with each block in column-major
/// channel order. Length = 2 * N_T * (H.cols + G.cols).
std::vector<double> encode_input(const CMat& h, const CMat& g);

/// Inverse of encode_input given the original shapes.
void decode_input(const std::vector<double>& x, int nt, int h_cols, int g_cols, CMat& h, CMat& g);

/// Model input for BS m: local channels with columns rotated so the serving
/// cell always occupies block 0 (cell j of the rotated layout is cell
/// (m + j) mod M). The rotation gives every BS the same input semantics,
/// which is what makes one shared set of weights meaningful across BSs.
/// With serving_only, interfered-cell columns are zeroed (the per-cell
/// benchmark's view).
std::vector<double> encode_for_bs(const NetworkConfig& cfg, const ChannelSample& sample, int m,
                                  bool serving_only = false);

/// Activations and per-sample normalization state captured by one batched
/// forward pass; feeds exactly one backward pass.
struct ForwardBatch {
  int batch = 0;
  RunMode mode = RunMode::Eval;
  std::vector<std::vector<double>> acts;       // acts[0] = input, then per layer
  std::vector<std::vector<std::uint8_t>> keep; // dropout keep masks (train mode)
  std::vector<double> norm_sq;                 // tr(raw raw^H) per sample
  std::vector<double> scale;                   // sqrt(p_t / norm_sq) per sample
  double min_abs_preact = std::numeric_limits<double>::infinity();
  std::vector<CMat> w_out;                     // normalized complex beamformers
};

/// Fully-connected LeakyReLU stack with inverted dropout, a total-power
/// normalization layer, and complex reconstruction of the N_T x K beamformer
/// from the real/imaginary halves of the output.
class MlpModel {
 public:
  MlpModel() = default;

  static MlpModel init(const MlpConfig& cfg, std::uint64_t seed);

  const MlpConfig& config() const { return cfg_; }
  int n_layers() const { return cfg_.n_hidden + 1; }
  const std::vector<int>& dims() const { return dims_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  void set_mask(const std::vector<std::uint8_t>& m);
  std::uint64_t seed_lineage() const { return seed_; }

  std::span<double> weight(int layer);
  std::span<double> bias(int layer);
  std::span<const double> weight(int layer) const;
  std::span<const double> bias(int layer) const;

  /// X is batch x input_dim row-major. Throws std::runtime_error
  /// ("degenerate output") when a sample's raw output is identically zero,
  /// since the power normalization is undefined there.
  void forward_batch(const double* x, int batch, double p_t, int nt, int k_users,
                     RunMode mode, Rng* dropout_rng, ForwardBatch& rec) const;

  /// Single-sample eval-mode convenience.
  CMat forward_eval(const std::vector<double>& x, double p_t, int nt, int k_users) const;

  /// d_loss_d_w is batch x output_dim: gradients w.r.t. the *normalized*
  /// output (re block then im block, column-major). Accumulates parameter
  /// gradients scaled by `scale` into `grads` (same layout as params()).
  struct Scratch {
    std::vector<double> dy, dx, tr;
  };
  void backward_batch(const ForwardBatch& rec, const double* d_loss_d_w, double scale,
                      std::vector<double>& grads, Scratch& scratch) const;
  void backward_batch(const ForwardBatch& rec, const double* d_loss_d_w, double scale,
                      std::vector<double>& grads) const;

  /// Zeroes the masked parameters; call after every optimizer step so pruned
  /// weights stay pruned.
  void apply_mask();

  /// Global unstructured magnitude pruning over all weight matrices (biases
  /// exempt). factor is the fraction of prunable weights to mask.
  void prune(double factor);

  /// Unmasked parameters (weights and biases).
  std::int64_t parameter_count() const;
  std::int64_t parameter_bits() const { return 64 * parameter_count(); }
  std::int64_t prunable_count() const;

  void save(const std::string& path) const;
  static MlpModel load(const std::string& path);
  std::vector<std::uint8_t> serialize() const;
  static MlpModel deserialize(const std::vector<std::uint8_t>& buf);

  /// Eval-mode forward expressed entirely on the tape, with every parameter
  /// registered as a leaf (in params() order) and the input as constants.
  /// Returns the normalized beamformer entries. Small-model reference path;
  /// the batched forward/backward above is the production path.
  VarCMat forward_on_tape(ad::Tape& t, const std::vector<double>& x, double p_t, int nt,
                          int k_users) const;

 private:
  void build_offsets();

  MlpConfig cfg_;
  std::vector<int> dims_;
  std::vector<double> params_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> w_off_, b_off_;
  std::uint64_t seed_ = 0;
};

/// Architecture for a given scenario: input 2*N_T*(MK+M), output 2*N_T*K.
MlpConfig mlp_config_for(const NetworkConfig& cfg, int hidden_dim = 512, int n_hidden = 4);

}  // namespace isac
