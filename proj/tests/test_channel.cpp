// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "isac/channel.hpp"
#include "isac/io.hpp"
#include "isac/rng.hpp"

using namespace isac;

TEST_CASE("steering vector basics") {
  const CMat one = steering_vector(0.7, 1);
  CHECK(std::abs(one(0, 0) - cdouble(1.0, 0.0)) < 1e-15);

  const CMat flat = steering_vector(0.0, 4);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(flat(i, 0) - cdouble(1.0, 0.0)) < 1e-15);

  const CMat pi2 = steering_vector(M_PI / 2.0, 2);
  CHECK(std::abs(pi2(0, 0) - cdouble(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(pi2(1, 0) - cdouble(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("steering vector entries are unit modulus, squared norm = n") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(16));
    const double theta = rng.uniform(-M_PI / 2, M_PI / 2);
    const CMat a = steering_vector(theta, n);
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(std::abs(a(i, 0)) - 1.0) < 1e-12);
      nrm += std::norm(a(i, 0));
    }
    CHECK(nrm == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
  }
}

TEST_CASE("draw_positions: guard radius, target angle statistics") {
  NetworkConfig cfg;
  cfg.validate();
  Rng rng(32);
  const int n_draws = 100000;
  const auto bs = bs_positions(cfg);
  double angle_sum = 0.0;
  double min_dist = 1e18;
  // chi-square over 20 bins of the user angle around its serving BS
  const int bins = 20;
  std::vector<int> hist(bins, 0);
  int users_counted = 0;
  for (int d = 0; d < n_draws / 100; ++d) {
    const auto pos = draw_positions(cfg, rng);
    for (int m = 0; m < cfg.cells; ++m) {
      angle_sum += pos.target_angle[m];
      for (int k = 0; k < cfg.users_per_cell; ++k) {
        const auto& u = pos.users[m * cfg.users_per_cell + k];
        const double dx = u[0] - bs[m][0], dy = u[1] - bs[m][1];
        min_dist = std::min(min_dist, std::hypot(dx, dy));
        const double phi = std::atan2(dy, dx);  // uniform on (-pi, pi]
        int b = static_cast<int>((phi + M_PI) / (2 * M_PI) * bins);
        if (b == bins) b = bins - 1;
        ++hist[b];
        ++users_counted;
      }
    }
  }
  const int n_targets = (n_draws / 100) * cfg.cells;
  // uniform on [-pi/2, pi/2]: sd = pi/sqrt(12); mean within 3 standard errors
  const double se = (M_PI / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n_targets));
  CHECK(std::abs(angle_sum / n_targets) < 3.0 * se);
  CHECK(min_dist >= cfg.guard_radius);

  const double expect = static_cast<double>(users_counted) / bins;
  double chi2 = 0.0;
  for (int b = 0; b < bins; ++b) chi2 += (hist[b] - expect) * (hist[b] - expect) / expect;
  CHECK(chi2 < 36.19);  // chi-square(19 dof) critical value at the 1% level
}

TEST_CASE("comm channel: kappa -> infinity limit is the array response") {
  NetworkConfig cfg;
  cfg.rician_factor = 1e12;
  Rng rng(33);
  const double d = 300.0, phi = 0.3;
  const auto h = gen_comm_channel(cfg, d, phi, rng);
  const CMat a = steering_vector(phi, cfg.tx_antennas);
  const double amp = std::sqrt(cfg.path_loss_comm(d));
  for (int i = 0; i < cfg.tx_antennas; ++i) CHECK(std::abs(h[i] - amp * a(i, 0)) < 1e-4 * amp);
}

TEST_CASE("comm channel: mean power and K-factor match the model") {
  NetworkConfig cfg;
  Rng rng(34);
  const double d = 320.0;
  const int n = 100000;
  const double pl = cfg.path_loss_comm(d);
  double pow_sum = 0.0;
  cdouble mean0 = 0.0;
  double pow0 = 0.0;
  for (int t = 0; t < n; ++t) {
    const auto h = gen_comm_channel(cfg, d, 0.45, rng);
    for (const auto& z : h) pow_sum += std::norm(z);
    mean0 += h[0];
    pow0 += std::norm(h[0]);
  }
  const double mean_pow = pow_sum / n;
  CHECK(mean_pow == doctest::Approx(cfg.tx_antennas * pl).epsilon(0.01));

  // moment estimator: K = |mean|^2 / (E|h|^2 - |mean|^2)
  const cdouble mu = mean0 / static_cast<double>(n);
  const double p = pow0 / n;
  const double khat = std::norm(mu) / (p - std::norm(mu));
  CHECK(khat == doctest::Approx(cfg.rician_factor).epsilon(0.05));
}

TEST_CASE("comm channel rejects nonpositive distance") {
  NetworkConfig cfg;
  Rng rng(35);
  CHECK_THROWS_AS(gen_comm_channel(cfg, 0.0, 0.1, rng), std::invalid_argument);
}

TEST_CASE("sensing channels: intended column finite, cross power calibrated") {
  NetworkConfig cfg;
  Rng root(36);
  // intended column: alpha * a(theta), norm^2 = |alpha|^2 * N_T, finite
  const auto s = generate_sample(cfg, root.fork(0));
  for (int m = 0; m < cfg.cells; ++m) {
    CHECK(s.G[m].all_finite());
    CHECK(s.H[m].all_finite());
    const auto own = s.G[m].col(m);
    const CMat a = steering_vector(s.target_angle[m], cfg.tx_antennas);
    // all entries share |alpha|
    const double mag = std::abs(own[0]);
    for (int i = 0; i < cfg.tx_antennas; ++i)
      CHECK(std::abs(own[i] - mag * a(i, 0)) < 1e-9 * std::max(mag, 1e-12));
  }

  // cross column power: E||g||^2 = N_T * PL(d) over many draws
  const auto bs = bs_positions(cfg);
  const double d01 = std::hypot(bs[1][0] - bs[0][0], bs[1][1] - bs[0][1]);
  const double want = cfg.tx_antennas * cfg.path_loss_sense_one_way(d01);
  double acc = 0.0;
  const int draws = 100000;
  // estimate over full samples is slow; draw the one column via fresh samples
  Rng rng(37);
  for (int t = 0; t < draws / 50; ++t) {
    const auto smp = generate_sample(cfg, rng.fork(t));
    acc += norm_sq(smp.G[0].col(1));
  }
  CHECK(acc / (draws / 50) == doctest::Approx(want).epsilon(0.05));
}

TEST_CASE("dataset generation is deterministic and parallel == serial") {
  NetworkConfig cfg;
  const Dataset a = generate_dataset(cfg, 64, 99, true);
  const Dataset b = generate_dataset(cfg, 64, 99, false);
  const auto ba = serialize_dataset(a);
  const auto bb = serialize_dataset(b);
  CHECK(ba == bb);
  const Dataset c = generate_dataset(cfg, 64, 99, true);
  CHECK(serialize_dataset(c) == ba);
  const Dataset d = generate_dataset(cfg, 64, 100, true);
  CHECK(serialize_dataset(d) != ba);
}

TEST_CASE("dataset round-trips bit-exactly through the file format") {
  NetworkConfig cfg;
  cfg.target_angle_override = {0.25, std::nan(""), -0.5};
  const Dataset ds = generate_dataset(cfg, 16, 7);
  const auto path = std::filesystem::temp_directory_path() / "isac_ds_test.bin";
  save_dataset(ds, path.string());
  const Dataset back = load_dataset(path.string());
  CHECK(serialize_dataset(back) == serialize_dataset(ds));
  CHECK(back.cfg.cells == cfg.cells);
  CHECK(back.seed == ds.seed);
  REQUIRE(back.samples.size() == ds.samples.size());
  // override honored where finite
  for (const auto& s : back.samples) {
    CHECK(s.target_angle[0] == 0.25);
    CHECK(s.target_angle[2] == -0.5);
  }
  std::filesystem::remove(path);
}

TEST_CASE("dataset loader rejects corrupt headers") {
  NetworkConfig cfg;
  const Dataset ds = generate_dataset(cfg, 2, 3);
  auto bytes = serialize_dataset(ds);
  bytes[0] ^= 0xFF;
  CHECK_THROWS_AS(deserialize_dataset(bytes), std::runtime_error);
  auto truncated = serialize_dataset(ds);
  truncated.resize(truncated.size() / 2);
  CHECK_THROWS_AS(deserialize_dataset(truncated), std::runtime_error);
}

TEST_CASE("H and G dimensions are N_T x MK and N_T x M for every BS") {
  NetworkConfig cfg;
  cfg.cells = 2;
  cfg.users_per_cell = 3;
  cfg.tx_antennas = 5;
  const Dataset ds = generate_dataset(cfg, 4, 11);
  for (const auto& s : ds.samples)
    for (int m = 0; m < cfg.cells; ++m) {
      CHECK(s.H[m].rows() == 5);
      CHECK(s.H[m].cols() == 6);
      CHECK(s.G[m].rows() == 5);
      CHECK(s.G[m].cols() == 2);
    }
}

TEST_CASE("config validation rejects bad scenarios") {
  NetworkConfig cfg;
  cfg.cells = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.rho = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.noise_comm = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
