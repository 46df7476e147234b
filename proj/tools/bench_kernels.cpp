// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
//
// Compares the serial reference kernels against the OpenMP ones on the
// matrix shapes the batched network paths actually use, then times one full
// training step end to end.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "isac/channel.hpp"
#include "isac/federate.hpp"
#include "isac/harness.hpp"
#include "isac/kernels.hpp"
#include "isac/rng.hpp"

using namespace isac;

namespace {

using Clock = std::chrono::steady_clock;

double time_gemm(int m, int k, int n, bool parallel, int reps) {
  std::vector<double> a(static_cast<std::size_t>(m) * k), b(static_cast<std::size_t>(k) * n),
      c(static_cast<std::size_t>(m) * n);
  Rng rng(42);
  for (auto& v : a) v = rng.uniform(-1, 1);
  for (auto& v : b) v = rng.uniform(-1, 1);
  auto run = [&] {
    if (parallel)
      kern::gemm_nn(m, k, n, a.data(), b.data(), c.data());
    else
      kern::serial::gemm_nn(m, k, n, a.data(), b.data(), c.data());
  };
  run();  // warm
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) run();
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  return 2.0 * m * k * n * reps / s * 1e-9;  // GFLOP/s
}

double time_train_step(int threads) {
  omp_set_num_threads(threads);
  NetworkConfig cfg;
  cfg.set_snr_db(20.0);
  const Dataset ds = generate_dataset(cfg, 256, 7);
  TrainHyper hp;
  hp.seed = 3;
  VflSession sess(cfg, mlp_config_for(cfg), hp, 16);
  std::vector<int> idx(hp.batch);
  for (int i = 0; i < hp.batch; ++i) idx[i] = i;
  sess.round(ds, idx);  // warm
  const int reps = 12;
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) sess.round(ds, idx);
  return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

}  // namespace

int main() {
  const int max_threads = omp_get_max_threads();
  std::printf("threads available: %d\n\n", max_threads);

  struct Shape {
    int m, k, n, reps;
    const char* what;
  };
  const Shape shapes[] = {
      {64, 108, 512, 400, "input layer forward (batch x in x hidden)"},
      {64, 512, 512, 400, "hidden layer forward"},
      {512, 64, 512, 400, "weight gradient (in x batch x out)"},
      {64, 512, 24, 400, "output layer forward"},
  };
  std::printf("%-46s %10s %10s %8s\n", "gemm shape", "serial", "openmp", "speedup");
  for (const auto& s : shapes) {
    const double gs = time_gemm(s.m, s.k, s.n, false, s.reps);
    const double gp = time_gemm(s.m, s.k, s.n, true, s.reps);
    std::printf("%-46s %7.2f GF %7.2f GF %7.2fx\n", s.what, gs, gp, gp / gs);
  }

  std::printf("\nfull training step (batch 64, M=3, d_H=512):\n");
  const double t1 = time_train_step(1);
  std::printf("  1 thread : %7.1f ms/step\n", t1 * 1e3);
  if (max_threads > 1) {
    const double tn = time_train_step(max_threads);
    std::printf("  %d threads: %7.1f ms/step (%.2fx)\n", max_threads, tn * 1e3, t1 / tn);
  }
  return 0;
}
