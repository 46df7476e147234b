// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isac/baselines.hpp"
#include "isac/channel.hpp"
#include "isac/federate.hpp"
#include "isac/metrics.hpp"
#include "isac/mlp.hpp"

namespace isac {

/// Step/round budgets for the trained methods.
struct TrainBudget {
  int vfl_steps = 6200;
  int hfl_rounds = 200;
  int hfl_local_epochs = 1;
  int percell_steps = 3720;
};

struct ExperimentSpec {
  NetworkConfig scenario;
  TrainHyper hp;
  TrainBudget budget;
  int hidden_dim = 512;
  int n_hidden = 4;
  int n_train = 2000;
  int n_test = 500;

  std::string sweep_axis = "snr_db";  // snr_db | n_t | rho | prune_factor | none
  std::vector<double> sweep_values = {20.0};
  std::vector<std::string> methods = {"mrt"};

  bool emit_beampatterns = false;
  double beampattern_step_deg = 0.1;
  std::string output_dir;
  std::string save_models_dir;  // empty: don't persist trained models

  void validate() const;  // throws std::invalid_argument
};

struct ResultRow {
  std::string axis;
  double sweep_value = 0.0;
  std::string method;
  double rho = 0.0;
  double snr_db = 0.0;
  int n_t = 0;
  double r_comm = 0.0;
  double r_sense = 0.0;
  double cil_mean = 0.0;
  double sil_mean = 0.0;
  int n_test = 0;
  std::uint64_t ledger_complex_up = 0;
  std::uint64_t ledger_bits_up = 0;
  std::uint64_t ledger_rounds = 0;
  double wall_seconds = 0.0;  // emitted to timings.csv, not results.csv
};

struct EvalStats {
  double r_comm = 0.0;
  double r_sense = 0.0;
  double cil_mean = 0.0;
  double sil_mean = 0.0;
};

/// Per-sample beamformer map (all M BSs at once).
using BeamformerFn = std::function<std::vector<CMat>(const ChannelSample&)>;

EvalStats evaluate_fn(const NetworkConfig& cfg, const Dataset& test, const BeamformerFn& fn);

/// Batched eval-mode evaluation of per-BS models on the whole test set.
EvalStats evaluate_models(const NetworkConfig& cfg, const Dataset& test,
                          const std::vector<MlpModel>& models, bool serving_only = false);

/// Beamformers produced by per-BS models for one sample (eval mode).
std::vector<CMat> models_beamform(const NetworkConfig& cfg, const std::vector<MlpModel>& models,
                                  const ChannelSample& sample, bool serving_only = false);

struct TrainedMethod {
  std::vector<MlpModel> models;
  OverheadLedger ledger;
};

/// Optional sink receiving one row per round/epoch during training.
struct TrainLogRow {
  std::uint64_t round = 0;
  double loss = 0.0;
  double r_comm = 0.0;
  double r_sense = 0.0;
  std::uint64_t complex_up = 0;
  std::uint64_t bits_up = 0;
  double wall_seconds = 0.0;
};
using TrainLogSink = std::function<void(const TrainLogRow&)>;

TrainedMethod train_vfl(const NetworkConfig& cfg, const Dataset& train, const TrainHyper& hp,
                        int steps, int hidden_dim = 512, int n_hidden = 4,
                        const TrainLogSink& log = {});
TrainedMethod train_hfl(const NetworkConfig& cfg, const Dataset& train, const TrainHyper& hp,
                        int rounds, int local_epochs, int hidden_dim = 512, int n_hidden = 4,
                        const TrainLogSink& log = {});
TrainedMethod train_percell(const NetworkConfig& cfg, const Dataset& train, const TrainHyper& hp,
                            int steps, int hidden_dim = 512, int n_hidden = 4);

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> written_files;
};

/// Runs the sweep: per point, derive the scenario, generate seeded train/test
/// datasets, train the requested learned methods, evaluate everything on the
/// shared test set, and emit results.csv (+ beampatterns) and timings.csv
/// under output_dir. Fully deterministic in (spec, seed) except timings.csv.
ExperimentResult run_experiment(const ExperimentSpec& spec);

std::string results_csv(const std::vector<ResultRow>& rows);
std::string timings_csv(const std::vector<ResultRow>& rows);

/// Mean beampattern of one BS's beams over the test set, peak-normalized,
/// as "angle_deg,power_db" rows.
std::string beampattern_csv(const NetworkConfig& cfg, const Dataset& test, const BeamformerFn& fn,
                            int bs, double step_deg = 0.1);

/// Built-in experiment profiles ("desk" is the default acceptance scale).
ExperimentSpec desk_profile();
ExperimentSpec smoke_profile();
ExperimentSpec paper_profile();
ExperimentSpec profile_by_name(const std::string& name);

/// JSON round trip for config files (schema documented in the README).
ExperimentSpec spec_from_json_text(const std::string& text);
std::string spec_to_json_text(const ExperimentSpec& spec);

int worker_count();  // ISAC_WORKERS, default 1

void ensure_dir(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace isac
