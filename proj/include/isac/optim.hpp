// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace isac {

enum class OptKind { Sgd, Adam };

struct OptimizerConfig {
  OptKind kind = OptKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-6;  // decoupled, applied before the Adam delta
};

/// First-order optimizer over a flat parameter vector.
/// SGD:  p <- p - lr * g
/// Adam: bias-corrected moment update; decoupled weight decay is applied as
///       p <- p - lr * wd * p before the Adam delta.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  const OptimizerConfig& config() const { return cfg_; }
  std::int64_t step_count() const { return t_; }

  /// Throws std::runtime_error (with the offending index) on a non-finite
  /// gradient.
  void step(std::span<double> params, std::span<const double> grads);

 private:
  OptimizerConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<double> m_, v_;
};

OptKind opt_kind_from_string(const std::string& s);

}  // namespace isac
