// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "isac/cmat.hpp"

namespace isac {

/// Solves A x = b for square complex A via partial-pivot LU.
/// Throws std::runtime_error when A is numerically singular.
std::vector<cdouble> solve_lu(const CMat& a, const std::vector<cdouble>& b);

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Eigenvalues ascending; eigenvectors are the columns of V.
struct HermEig {
  std::vector<double> values;
  CMat vectors;
};
HermEig herm_eig(const CMat& a, int max_sweeps = 64, double tol = 1e-13);

/// Orthonormal basis (modified Gram-Schmidt with one re-orthogonalization
/// pass) of the span of the given vectors. Vectors with residual norm below
/// `drop_tol` relative to their original norm are dropped.
std::vector<std::vector<cdouble>> orthonormal_basis(const std::vector<std::vector<cdouble>>& vs,
                                                    double drop_tol = 1e-10);

/// Projects v onto the orthogonal complement of span(basis); basis must be
/// orthonormal.
std::vector<cdouble> project_out(const std::vector<std::vector<cdouble>>& basis,
                                 const std::vector<cdouble>& v);

/// Projects v onto span(basis); basis must be orthonormal.
std::vector<cdouble> project_onto(const std::vector<std::vector<cdouble>>& basis,
                                  const std::vector<cdouble>& v);

}  // namespace isac
