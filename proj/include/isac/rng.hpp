// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace isac {

/// Counter-based pseudo-random generator (splitmix64 finalizer applied to
/// key + counter * golden gamma). Output is a pure function of (key, counter),
/// so streams can be split without any shared state and results are identical
/// on every platform. This generator is the reproducibility contract for all
/// dataset generation and training randomness.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key), ctr_(0) {}

  /// Derives an independent child stream. fork(a) != fork(b) for a != b, and
  /// child output never collides with the parent's by construction of the key.
  Rng fork(std::uint64_t tag) const {
    std::uint64_t k = mix(key_ ^ (0x9E3779B97F4A7C15ULL + mix(tag + 0x632BE59BD9B4E019ULL)));
    return Rng(k);
  }
  Rng fork2(std::uint64_t a, std::uint64_t b) const { return fork(a).fork(b); }

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform on [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Index uniform on [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// Two independent standard normals (Box-Muller; no rejection, so the
  /// draw count per call is fixed and streams stay aligned).
  void normal_pair(double& g0, double& g1) {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    g0 = r * std::cos(2.0 * M_PI * u2);
    g1 = r * std::sin(2.0 * M_PI * u2);
  }

  double normal() {
    double a, b;
    normal_pair(a, b);
    return a;
  }

  /// Circularly-symmetric complex normal CN(0, 1).
  std::complex<double> cnormal() {
    double a, b;
    normal_pair(a, b);
    return {a * M_SQRT1_2, b * M_SQRT1_2};
  }

  std::uint64_t key() const { return key_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace isac
