// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/cmat.hpp"

#include <cmath>
#include <stdexcept>

namespace isac {

CMat CMat::identity(int n) {
  CMat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<cdouble> CMat::col(int j) const {
  std::vector<cdouble> v(rows_);
  for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void CMat::set_col(int j, const std::vector<cdouble>& v) {
  if (static_cast<int>(v.size()) != rows_) throw std::invalid_argument("set_col: length mismatch");
  for (int i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

CMat CMat::hermitian() const {
  CMat r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

double CMat::frobenius_sq() const {
  double s = 0.0;
  for (const auto& z : a_) s += std::norm(z);
  return s;
}

bool CMat::all_finite() const {
  for (const auto& z : a_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

CMat& CMat::operator*=(cdouble s) {
  for (auto& z : a_) z *= s;
  return *this;
}

CMat CMat::operator+(const CMat& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("CMat+: shape mismatch");
  CMat r(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + o.a_[i];
  return r;
}

CMat CMat::operator-(const CMat& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("CMat-: shape mismatch");
  CMat r(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
  return r;
}

CMat cmat_mul(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("cmat_mul: inner dimension mismatch");
  CMat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const cdouble av = a(i, k);
      for (int j = 0; j < b.cols(); ++j) c(i, j) += av * b(k, j);
    }
  return c;
}

cdouble cdot_herm(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cdot_herm: length mismatch");
  cdouble s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm_sq(const std::vector<cdouble>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

}  // namespace isac
