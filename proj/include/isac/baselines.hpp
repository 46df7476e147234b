// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "isac/channel.hpp"
#include "isac/cmat.hpp"
#include "isac/federate.hpp"
#include "isac/mlp.hpp"

namespace isac {

enum class BaselineKind { Wmmse, Mrt, Imt, Cbf, PerCellDl, TimeSharing };

/// Matched-filter beams toward the served users, P_T/K per beam.
std::vector<CMat> mrt(const ChannelSample& sample, const NetworkConfig& cfg);

/// MRT beams projected onto the null space of every interfered channel
/// (other cells' users plus other BSs' sensing receivers). When the null
/// space is empty the beams are projected onto the least-leakage eigenspace
/// instead and `fallback` is set.
struct ImtResult {
  std::vector<CMat> beams;
  bool fallback = false;
};
ImtResult imt(const ChannelSample& sample, const NetworkConfig& cfg);

/// All beams steered at the cell's target direction.
std::vector<CMat> cbf(const ChannelSample& sample, const NetworkConfig& cfg);

/// Iterative weighted-MMSE sum-rate beamforming (communication objective)
/// with a per-BS power constraint enforced by bisection on the multiplier.
/// rate_log holds the sum rate after every beamformer update.
struct WmmseResult {
  std::vector<CMat> beams;
  std::vector<double> rate_log;
  int iterations = 0;
};
WmmseResult wmmse(const ChannelSample& sample, const NetworkConfig& cfg, int max_iters = 100,
                  double tol = 1e-8, double init_scale = 1.0);

struct PerCellTrainOptions {
  TrainHyper hp;
  int steps = 2000;      // minibatch steps per BS
  int hidden_dim = 512;
  int n_hidden = 4;
};

/// Independently trains one network per BS on the no-leakage local losses,
/// seeing only serving-cell channel columns (zero-padded to the shared
/// encoder width).
std::vector<MlpModel> per_cell_dl_train(const Dataset& train, const NetworkConfig& cfg, double rho,
                                        const PerCellTrainOptions& opts);

/// Line segment between the communication-optimal and sensing-optimal
/// operating points, used as the time-sharing reference.
struct TimeSharing {
  std::array<double, 2> corner_comm;   // (R_c, R_s) of the comm-heavy corner
  std::array<double, 2> corner_sense;  // (R_c, R_s) of the sensing-heavy corner

  std::array<double, 2> point(double lambda) const;
  /// Signed distance of p to the corner line, positive when p dominates
  /// (lies on the far side from the origin).
  double signed_distance(const std::array<double, 2>& p) const;
};

}  // namespace isac
