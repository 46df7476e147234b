// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isac/channel.hpp"
#include "isac/mlp.hpp"
#include "isac/optim.hpp"

namespace isac {

/// Counters of everything exchanged during training/deployment. The primary
/// complex/bit counters follow the per-iteration accounting of the overhead
/// comparison ((M+1)*K*N_T complex values per BS upload per round for the
/// feature-aggregating protocol; 2*M*B bits per round for model averaging).
/// The literal_* counters record the values actually serialized, which also
/// scale with the minibatch size; wire_bytes_* include message headers.
struct OverheadLedger {
  std::uint64_t complex_up = 0;
  std::uint64_t complex_down = 0;
  std::uint64_t bits_up = 0;
  std::uint64_t bits_down = 0;
  std::uint64_t rounds = 0;

  std::uint64_t literal_complex_up = 0;
  std::uint64_t literal_complex_down = 0;
  std::uint64_t wire_bytes_up = 0;
  std::uint64_t wire_bytes_down = 0;
  /// Channel-sample payload moved, in complex values. Stays zero during
  /// model-averaging rounds: only parameter tensors may cross the replica
  /// boundary there.
  std::uint64_t channel_complex_up = 0;

  double flops_forward = 0.0;
  double flops_training = 0.0;
  double flops_wmmse = 0.0;

  std::string report(const NetworkConfig& cfg, std::uint64_t model_bits) const;
};

/// Closed-form overhead/complexity figures.
std::uint64_t vfl_training_complex_values(std::uint64_t m, std::uint64_t k, std::uint64_t n_t,
                                          std::uint64_t t_rounds);
std::uint64_t hfl_training_bits(std::uint64_t m, std::uint64_t model_bits, std::uint64_t t_rounds);
std::uint64_t wmmse_deployment_complex_values(std::uint64_t m, std::uint64_t k, std::uint64_t n_t);

enum class ComplexityPhase { Forward, Training, WmmseDeployment };
double estimate_complexity(const NetworkConfig& cfg, int hidden_dim, int n_hidden,
                           ComplexityPhase phase, int wmmse_iters = 100);

namespace wire {

enum class MsgType : std::uint8_t { VflUpload = 1, VflGrads = 2, ModelParams = 3 };

/// Per-round upload of one BS: its designed beamformers plus the input
/// channel samples of the minibatch.
struct VflUpload {
  std::uint32_t bs = 0;
  std::uint64_t round = 0;
  std::uint32_t nt = 0, k = 0, h_cols = 0, g_cols = 0;
  std::vector<std::uint32_t> sample_idx;
  std::vector<cdouble> w;  // batch x (nt*k), concatenated
  std::vector<cdouble> h;  // batch x (nt*h_cols)
  std::vector<cdouble> g;  // batch x (nt*g_cols)

  std::vector<std::uint8_t> serialize() const;
  static VflUpload parse(const std::vector<std::uint8_t>& buf);
};

/// Per-branch loss gradients returned by the server.
struct VflGrads {
  std::uint32_t bs = 0;
  std::uint64_t round = 0;
  std::uint32_t nt = 0, k = 0;
  double mean_loss = 0.0;
  std::vector<std::uint32_t> sample_idx;
  std::vector<cdouble> dw;  // batch x (nt*k)

  std::vector<std::uint8_t> serialize() const;
  static VflGrads parse(const std::vector<std::uint8_t>& buf);
};

/// Full parameter tensor broadcast/upload for model averaging.
struct ModelParams {
  std::uint64_t round = 0;
  std::vector<double> params;

  std::vector<std::uint8_t> serialize() const;
  static ModelParams parse(const std::vector<std::uint8_t>& buf);
};

}  // namespace wire

struct TrainHyper {
  OptimizerConfig opt;
  int batch = 64;
  double rho = 0.5;
  /// Base leakage weights; the effective weights are alpha/noise_comm and
  /// beta/noise_sense, ramped linearly from zero over the first anneal_frac
  /// of the planned steps.
  double alpha = 0.1;
  double beta = 0.1;
  double anneal_frac = 0.1;
  std::uint64_t seed = 1;
};

struct RoundStats {
  double loss = 0.0;
  double r_comm = 0.0;
  double r_sense = 0.0;
};

/// Elementwise mean of the replicas' parameters. Masks are combined so that
/// a weight pruned in every replica stays pruned; a weight alive anywhere
/// stays alive. Throws on architecture mismatch.
MlpModel fedavg(const std::vector<const MlpModel*>& replicas);

/// Fisher-Yates permutation of 0..n-1 driven by the named counter generator
/// (platform-independent, unlike std::shuffle).
std::vector<int> shuffled_indices(int n, Rng& rng);

/// Feature-aggregating protocol: per round every BS designs beamformers from
/// its local channels, uploads them with the input sample, the server builds
/// the global loss on one tape spanning all M branches and returns each
/// branch's gradients, and every BS updates its own model. The exchange runs
/// through serialized messages so the ledger counts what actually moves.
class VflSession {
 public:
  VflSession(const NetworkConfig& cfg, const MlpConfig& arch, const TrainHyper& hp,
             int planned_steps);

  RoundStats round(const Dataset& ds, std::span<const int> indices);

  const std::vector<MlpModel>& models() const { return models_; }
  std::vector<MlpModel>& models() { return models_; }
  const OverheadLedger& ledger() const { return ledger_; }
  std::uint64_t rounds_done() const { return round_; }

 private:
  NetworkConfig cfg_;
  TrainHyper hp_;
  int planned_steps_;
  std::uint64_t round_ = 0;
  std::vector<MlpModel> models_;
  std::vector<Optimizer> opts_;
  OverheadLedger ledger_;
  // Reused per-BS step buffers (BS-side work runs concurrently).
  std::vector<ForwardBatch> recs_;
  std::vector<MlpModel::Scratch> scratch_;
  std::vector<std::vector<double>> grads_, x_, dldw_;
  std::vector<std::vector<double>> dw_;
};

/// Reusable buffers for the batched local training step.
struct LocalWorkspace {
  ForwardBatch rec;
  MlpModel::Scratch scratch;
  std::vector<double> x, dldw, grads;
};

/// One local minibatch step on the leakage-penalized local loss (or its
/// alpha = beta = 0 degenerate form). With serving_only the encoder zeroes
/// every interfered-cell column. Reads only BS m's H_m / G_m.
RoundStats local_minibatch_step(MlpModel& model, Optimizer& opt, const NetworkConfig& cfg,
                                const Dataset& ds, int m, std::span<const int> indices, double rho,
                                double alpha_eff, double beta_eff, bool serving_only,
                                Rng& dropout_rng, LocalWorkspace& ws);

/// E epochs of local training for replica m. Throws on an empty dataset.
RoundStats hfl_local_train(MlpModel& model, Optimizer& opt, const NetworkConfig& cfg,
                           const Dataset& ds, int m, const TrainHyper& hp, int epochs,
                           double anneal, std::uint64_t round_index, LocalWorkspace& ws);

/// Model-averaging protocol: broadcast global parameters, train locally on
/// leakage-penalized losses for E epochs per BS, upload parameters, average.
class HflSession {
 public:
  HflSession(const NetworkConfig& cfg, const MlpConfig& arch, const TrainHyper& hp,
             int planned_rounds, int local_epochs);

  RoundStats round(const Dataset& ds);

  const MlpModel& global_model() const { return global_; }
  MlpModel& global_model() { return global_; }
  const std::vector<MlpModel>& replicas() const { return replicas_; }
  const OverheadLedger& ledger() const { return ledger_; }
  std::uint64_t rounds_done() const { return round_; }
  int local_epochs() const { return local_epochs_; }

 private:
  NetworkConfig cfg_;
  TrainHyper hp_;
  int planned_rounds_;
  int local_epochs_;
  std::uint64_t round_ = 0;
  MlpModel global_;
  std::vector<MlpModel> replicas_;
  std::vector<Optimizer> opts_;
  OverheadLedger ledger_;
  std::vector<LocalWorkspace> ws_;  // one per BS; local training runs concurrently
};

}  // namespace isac
