// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace isac {

using cdouble = std::complex<double>;

/// Dense complex matrix, row-major, double precision.
class CMat {
 public:
  CMat() : rows_(0), cols_(0) {}
  CMat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

  static CMat identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return a_.size(); }

  cdouble& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const cdouble& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  cdouble* data() { return a_.data(); }
  const cdouble* data() const { return a_.data(); }

  std::vector<cdouble> col(int j) const;
  void set_col(int j, const std::vector<cdouble>& v);

  CMat hermitian() const;
  double frobenius_sq() const;  // == tr(A A^H)
  bool all_finite() const;

  CMat& operator*=(cdouble s);
  CMat operator+(const CMat& o) const;
  CMat operator-(const CMat& o) const;

 private:
  int rows_, cols_;
  std::vector<cdouble> a_;
};

/// Standard complex matrix product. Throws std::invalid_argument on dimension
/// mismatch.
CMat cmat_mul(const CMat& a, const CMat& b);

/// sum_i conj(a[i]) * b[i]
cdouble cdot_herm(const std::vector<cdouble>& a, const std::vector<cdouble>& b);

double norm_sq(const std::vector<cdouble>& v);

}  // namespace isac
