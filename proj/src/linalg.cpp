// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace isac {

std::vector<cdouble> solve_lu(const CMat& a, const std::vector<cdouble>& b) {
  const int n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("solve_lu: matrix not square");
  if (static_cast<int>(b.size()) != n) throw std::invalid_argument("solve_lu: rhs length mismatch");

  CMat lu = a;
  std::vector<cdouble> x = b;
  std::vector<int> piv(n);
  std::iota(piv.begin(), piv.end(), 0);

  for (int c = 0; c < n; ++c) {
    int p = c;
    double best = std::abs(lu(c, c));
    for (int r = c + 1; r < n; ++r) {
      double v = std::abs(lu(r, c));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (best < 1e-300) throw std::runtime_error("solve_lu: singular matrix");
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(lu(c, j), lu(p, j));
      std::swap(x[c], x[p]);
    }
    const cdouble inv = 1.0 / lu(c, c);
    for (int r = c + 1; r < n; ++r) {
      const cdouble f = lu(r, c) * inv;
      lu(r, c) = f;
      for (int j = c + 1; j < n; ++j) lu(r, j) -= f * lu(c, j);
      x[r] -= f * x[c];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    cdouble s = x[r];
    for (int j = r + 1; j < n; ++j) s -= lu(r, j) * x[j];
    x[r] = s / lu(r, r);
  }
  return x;
}

HermEig herm_eig(const CMat& a, int max_sweeps, double tol) {
  const int n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("herm_eig: matrix not square");

  CMat m = a;
  CMat v = CMat::identity(n);

  const double scale = std::sqrt(std::max(m.frobenius_sq(), 1e-300));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(m(p, q));
    if (std::sqrt(off) <= tol * scale) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cdouble apq = m(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double app = m(p, p).real();
        const double aqq = m(q, q).real();
        // Unitary 2x2 rotation zeroing m(p,q): diagonalize [[app, apq],[apq*, aqq]].
        const double phi = std::arg(apq);
        const double amag = std::abs(apq);
        const double theta = 0.5 * std::atan2(2.0 * amag, app - aqq);
        const double c = std::cos(theta);
        const cdouble s = std::sin(theta) * std::exp(cdouble(0.0, -phi));
        for (int j = 0; j < n; ++j) {
          const cdouble mp = m(p, j), mq = m(q, j);
          m(p, j) = c * mp + std::conj(s) * mq;
          m(q, j) = -s * mp + c * mq;
        }
        for (int i = 0; i < n; ++i) {
          const cdouble mp = m(i, p), mq = m(i, q);
          m(i, p) = c * mp + s * mq;
          m(i, q) = -std::conj(s) * mp + c * mq;
          const cdouble vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp + s * vq;
          v(i, q) = -std::conj(s) * vp + c * vq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = m(i, i).real();
  std::sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] < diag[y]; });

  HermEig out;
  out.values.resize(n);
  out.vectors = CMat(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = diag[order[j]];
    for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

std::vector<std::vector<cdouble>> orthonormal_basis(const std::vector<std::vector<cdouble>>& vs,
                                                    double drop_tol) {
  std::vector<std::vector<cdouble>> basis;
  for (const auto& v0 : vs) {
    const double n0 = std::sqrt(norm_sq(v0));
    if (n0 <= 0.0) continue;
    std::vector<cdouble> v = v0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const cdouble c = cdot_herm(b, v);
        for (size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
      }
    const double nr = std::sqrt(norm_sq(v));
    if (nr <= drop_tol * n0) continue;
    for (auto& z : v) z /= nr;
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<cdouble> project_out(const std::vector<std::vector<cdouble>>& basis,
                                 const std::vector<cdouble>& v) {
  std::vector<cdouble> r = v;
  for (const auto& b : basis) {
    const cdouble c = cdot_herm(b, r);
    for (size_t i = 0; i < r.size(); ++i) r[i] -= c * b[i];
  }
  return r;
}

std::vector<cdouble> project_onto(const std::vector<std::vector<cdouble>>& basis,
                                  const std::vector<cdouble>& v) {
  std::vector<cdouble> r(v.size(), cdouble(0.0, 0.0));
  for (const auto& b : basis) {
    const cdouble c = cdot_herm(b, v);
    for (size_t i = 0; i < r.size(); ++i) r[i] += c * b[i];
  }
  return r;
}

}  // namespace isac
