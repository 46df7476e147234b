// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace isac {

void Optimizer::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("optimizer: shape mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i]))
      throw std::runtime_error("optimizer: non-finite gradient at index " + std::to_string(i));

  ++t_;
  const double lr = cfg_.learning_rate;
  const std::int64_t n = static_cast<std::int64_t>(params.size());
  if (cfg_.kind == OptKind::Sgd) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) params[i] -= lr * grads[i];
    return;
  }

  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double inv_c1 = 1.0 / (1.0 - std::pow(b1, static_cast<double>(t_)));
  const double inv_c2 = 1.0 / (1.0 - std::pow(b2, static_cast<double>(t_)));
  const double decay = 1.0 - lr * cfg_.weight_decay;
  const double eps = cfg_.eps;
  double* __restrict p = params.data();
  double* __restrict m = m_.data();
  double* __restrict v = v_.data();
  const double* __restrict g = grads.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double pi = p[i] * decay;
    const double gi = g[i];
    const double mi = b1 * m[i] + (1.0 - b1) * gi;
    const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
    m[i] = mi;
    v[i] = vi;
    p[i] = pi - lr * (mi * inv_c1) / (std::sqrt(vi * inv_c2) + eps);
  }
}

OptKind opt_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptKind::Sgd;
  if (s == "adam") return OptKind::Adam;
  throw std::invalid_argument("unknown optimizer: " + s);
}

}  // namespace isac
