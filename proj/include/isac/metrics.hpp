// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "isac/channel.hpp"
#include "isac/cmat.hpp"

namespace isac {

/// Per-BS transmit beamformer, N_T x K, subject to tr(W W^H) <= P_T.
struct Beamformer {
  CMat W;
  int owner = 0;
  bool power_ok(double p_t, double tol = 1e-9) const { return W.frobenius_sq() <= p_t + tol; }
};

/// Borrowed view over one evaluated network configuration: channels plus the
/// beamformers of all M BSs.
struct NetworkState {
  const NetworkConfig& cfg;
  const ChannelSample& sample;
  const std::vector<CMat>& beams;  // beams[m] is N_T x K
};

/// Downlink SINR of user k in cell m (intra-cell + inter-cell interference
/// in the denominator). Throws std::out_of_range on bad indices.
double comm_sinr(const NetworkState& st, int m, int k);

/// sum_{m,k} log2(1 + comm_sinr)
double sum_comm_rate(const NetworkState& st);

/// Sensing SINR at BS m: N_R-weighted target illumination over inter-cell
/// leakage plus noise.
double sensing_sinr(const NetworkState& st, int m);

/// sum_m log2(1 + sensing_sinr)
double sum_radar_rate(const NetworkState& st);

/// Communication interference leakage of BS m onto users of other cells.
double cil(const NetworkState& st, int m);

/// Sensing interference leakage of BS m onto other BSs' receivers.
double sil(const NetworkState& st, int m);

/// Transmit power pattern sum_k |a(theta)^H w_k|^2 per grid angle (linear).
std::vector<double> beampattern(const CMat& w, const std::vector<double>& grid_rad);

/// Converts a linear pattern to dB normalized so the peak sits at 0 dB.
std::vector<double> to_db_normalized(const std::vector<double>& linear);

/// Uniform angle grid in radians, inclusive of both endpoints.
std::vector<double> angle_grid_deg(double start_deg, double stop_deg, double step_deg);

}  // namespace isac
