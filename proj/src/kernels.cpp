// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/kernels.hpp"

#include <cstring>

namespace isac::kern {

void gemm_nn(int m, int k, int n, const double* a, const double* b, double* c, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* __restrict crow = c + static_cast<std::size_t>(i) * n;
    const double* __restrict arow = a + static_cast<std::size_t>(i) * k;
    if (!accumulate) std::memset(crow, 0, sizeof(double) * n);
    int kk = 0;
    for (; kk + 8 <= k; kk += 8) {
      const double a0 = arow[kk + 0], a1 = arow[kk + 1], a2 = arow[kk + 2], a3 = arow[kk + 3];
      const double a4 = arow[kk + 4], a5 = arow[kk + 5], a6 = arow[kk + 6], a7 = arow[kk + 7];
      const double* __restrict b0 = b + static_cast<std::size_t>(kk + 0) * n;
      const double* __restrict b1 = b + static_cast<std::size_t>(kk + 1) * n;
      const double* __restrict b2 = b + static_cast<std::size_t>(kk + 2) * n;
      const double* __restrict b3 = b + static_cast<std::size_t>(kk + 3) * n;
      const double* __restrict b4 = b + static_cast<std::size_t>(kk + 4) * n;
      const double* __restrict b5 = b + static_cast<std::size_t>(kk + 5) * n;
      const double* __restrict b6 = b + static_cast<std::size_t>(kk + 6) * n;
      const double* __restrict b7 = b + static_cast<std::size_t>(kk + 7) * n;
      for (int j = 0; j < n; ++j)
        crow[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j] + a4 * b4[j] + a5 * b5[j] +
                   a6 * b6[j] + a7 * b7[j];
    }
    for (; kk < k; ++kk) {
      const double av = arow[kk];
      const double* __restrict brow = b + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void transpose(int m, int n, const double* a, double* b) {
  constexpr int kTile = 32;
#pragma omp parallel for schedule(static)
  for (int ib = 0; ib < m; ib += kTile) {
    const int ie = ib + kTile < m ? ib + kTile : m;
    for (int jb = 0; jb < n; jb += kTile) {
      const int je = jb + kTile < n ? jb + kTile : n;
      for (int i = ib; i < ie; ++i)
        for (int j = jb; j < je; ++j)
          b[static_cast<std::size_t>(j) * m + i] = a[static_cast<std::size_t>(i) * n + j];
    }
  }
}

void col_sums(int m, int n, const double* a, double* y, bool accumulate) {
  if (!accumulate) std::memset(y, 0, sizeof(double) * n);
  for (int i = 0; i < m; ++i) {
    const double* __restrict row = a + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) y[j] += row[j];
  }
}

namespace serial {

void gemm_nn(int m, int k, int n, const double* a, const double* b, double* c, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) std::memset(crow, 0, sizeof(double) * n);
    for (int kk = 0; kk < k; ++kk) {
      const double av = a[static_cast<std::size_t>(i) * k + kk];
      const double* brow = b + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void transpose(int m, int n, const double* a, double* b) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      b[static_cast<std::size_t>(j) * m + i] = a[static_cast<std::size_t>(i) * n + j];
}

void col_sums(int m, int n, const double* a, double* y, bool accumulate) {
  if (!accumulate) std::memset(y, 0, sizeof(double) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) y[j] += a[static_cast<std::size_t>(i) * n + j];
}

}  // namespace serial

}  // namespace isac::kern
