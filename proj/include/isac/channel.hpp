// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "isac/cmat.hpp"
#include "isac/rng.hpp"

namespace isac {

/// Static scenario constants for a multi-cell downlink with one sensed target
/// per cell. Power and channel gains are normalized: the transmit budget is
/// `tx_power` (1.0 by default) and path loss is expressed relative to the
/// median intended-link distance, so SNR = tx_power / noise variance.
struct NetworkConfig {
  int cells = 3;           // M
  int users_per_cell = 2;  // K
  int tx_antennas = 6;     // N_T
  int rx_antennas = 6;     // N_R

  double tx_power = 1.0;      // P_T, per BS
  double noise_comm = 1e-2;   // sigma_c^2
  double noise_sense = 1e-2;  // sigma_s^2

  double cell_radius = 500.0;  // m
  double guard_radius = 10.0;  // m, keep-out around each BS
  double pl_comm_exp = 3.6;
  double pl_sense_exp = 2.0;
  double rician_factor = 3.0;  // linear power ratio
  double rcs = 1.0;            // m^2

  double rho = 0.5;    // communication/sensing weight in [0, 1]
  double alpha = 0.1;  // CIL weight, scaled by 1/noise_comm where applied
  double beta = 0.1;   // SIL weight, scaled by 1/noise_sense where applied

  // Optional geometry overrides. When empty, BSs sit on a regular polygon
  // with inter-site distance 2 * cell_radius. A NaN target angle entry means
  // "draw uniformly".
  std::vector<std::array<double, 2>> bs_positions_override;
  std::vector<double> target_angle_override;

  void validate() const;  // throws std::invalid_argument

  int total_users() const { return cells * users_per_cell; }
  /// Median user distance for uniform placement on the guarded disc; the
  /// communication path-loss reference.
  double comm_ref_distance() const;
  /// Median target range for uniform range on [guard, radius]; the sensing
  /// path-loss reference.
  double sense_ref_distance() const;

  double path_loss_comm(double distance) const;
  double path_loss_sense_one_way(double distance) const;
  double path_loss_sense_round_trip(double distance) const;

  /// Sets both noise variances from an SNR in dB (SNR = tx_power / sigma^2).
  void set_snr_db(double snr_db);
  double snr_db() const;
};

std::vector<std::array<double, 2>> bs_positions(const NetworkConfig& cfg);

/// Half-wavelength ULA response: entry i = exp(j * pi * i * sin(theta)).
CMat steering_vector(double theta, int n);

/// One network realization as seen by every BS.
/// H[m] is N_T x (M*K): column (n*K + k) is the channel from BS m to user k
/// of cell n. G[m] is N_T x M: column m holds the intended-target response
/// alpha_m * a(theta_m); column n != m is the (equivalent) sensing
/// interference channel from BS m toward BS n's receiver.
struct ChannelSample {
  std::vector<CMat> H;
  std::vector<CMat> G;
  std::vector<double> target_angle;  // radians, one per cell
};

struct Dataset {
  NetworkConfig cfg;
  std::uint64_t seed = 0;
  std::vector<ChannelSample> samples;
};

/// User positions and target polar coordinates for one realization.
struct DrawnPositions {
  std::vector<std::array<double, 2>> users;  // cell-major: index n*K + k
  std::vector<double> target_angle;          // per cell, radians
  std::vector<double> target_range;          // per cell, m
};

DrawnPositions draw_positions(const NetworkConfig& cfg, Rng& rng);

/// Rician downlink channel toward a receiver at the given distance/LoS angle.
/// E||h||^2 = N_T * path_loss_comm(distance). Throws on distance <= 0.
std::vector<cdouble> gen_comm_channel(const NetworkConfig& cfg, double distance, double los_angle,
                                      Rng& rng);

ChannelSample generate_sample(const NetworkConfig& cfg, Rng sample_rng);

/// Deterministic in (cfg, seed); sample i only depends on the stream forked
/// with tag i, so generation parallelizes over samples and matches the
/// serial order exactly.
Dataset generate_dataset(const NetworkConfig& cfg, int n_samples, std::uint64_t seed,
                         bool parallel = true);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

std::vector<std::uint8_t> serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(const std::vector<std::uint8_t>& buf);

}  // namespace isac
