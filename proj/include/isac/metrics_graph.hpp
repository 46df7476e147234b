// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "isac/channel.hpp"
#include "isac/cmat.hpp"
#include "isac/tape.hpp"

namespace isac {

/// A complex scalar on the tape as a (re, im) node pair.
struct VarC {
  ad::NodeId re, im;
};

/// Column-major matrix of tape-resident complex entries.
struct VarCMat {
  int rows = 0, cols = 0;
  std::vector<VarC> v;
  VarC& at(int i, int j) { return v[static_cast<std::size_t>(j) * rows + i]; }
  const VarC& at(int i, int j) const { return v[static_cast<std::size_t>(j) * rows + i]; }
};

/// Registers every entry of `init` as a pair of leaves (column-major order:
/// all re/im pairs of column 0 first). Leaf order is the contract for reading
/// gradients back out of Tape::backward.
VarCMat leaf_cmat(ad::Tape& t, const CMat& init);

/// Power normalization W = sqrt(p_t / tr(X X^H)) * X on the tape.
VarCMat normalize_power(ad::Tape& t, const VarCMat& x, double p_t);

/// |sum_i conj(h_i) w_i|^2 with h a fixed column of a channel matrix.
ad::NodeId abs2_herm_dot(ad::Tape& t, const CMat& h_mat, int hcol, const VarCMat& w, int wcol);

/// rho * (-sum comm rate) + (1 - rho) * (-sum radar rate), spanning the
/// beamformers of all M BSs.
ad::NodeId vfl_global_loss(ad::Tape& t, const NetworkConfig& cfg, const ChannelSample& sample,
                           const std::vector<VarCMat>& w_all, double rho);

/// Leakage-penalized local loss of BS m. Reads only H_m / G_m (the BS's own
/// channel knowledge): the communication term keeps intra-cell interference
/// but not inter-cell interference, the sensing term is noise-only, and the
/// alpha/beta penalties charge the leakage the BS itself produces.
ad::NodeId hfl_local_loss(ad::Tape& t, const NetworkConfig& cfg, const CMat& h_m, const CMat& g_m,
                          int m, const VarCMat& w_m, double rho, double alpha, double beta);

/// Plain-number twins of the differentiable losses (used for dual-path
/// checks and reporting).
double vfl_global_loss_value(const NetworkConfig& cfg, const ChannelSample& sample,
                             const std::vector<CMat>& w_all, double rho);
double hfl_local_loss_value(const NetworkConfig& cfg, const CMat& h_m, const CMat& g_m, int m,
                            const CMat& w_m, double rho, double alpha, double beta);

}  // namespace isac
