// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace isac::kern {

/// Dense f64 kernels used by the batched network forward/backward paths.
/// Each kernel has an OpenMP-parallel implementation and a plain serial
/// reference (namespace serial) kept for testing; tools/bench_kernels
/// compares the two. Per output element both variants accumulate in the
/// same k-ascending order, so the parallel result does not depend on the
/// thread count.

/// C (m x n) = [accumulate ? C : 0] + A (m x k) * B (k x n), row-major.
void gemm_nn(int m, int k, int n, const double* a, const double* b, double* c,
             bool accumulate = false);

/// B (n x m) = A^T for row-major A (m x n).
void transpose(int m, int n, const double* a, double* b);

/// y[j] += sum_i a[i * n + j] (column sums of an m x n matrix).
void col_sums(int m, int n, const double* a, double* y, bool accumulate = false);

namespace serial {
void gemm_nn(int m, int k, int n, const double* a, const double* b, double* c,
             bool accumulate = false);
void transpose(int m, int n, const double* a, double* b);
void col_sums(int m, int n, const double* a, double* y, bool accumulate = false);
}  // namespace serial

}  // namespace isac::kern
