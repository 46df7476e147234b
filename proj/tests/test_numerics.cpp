// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "isac/cmat.hpp"
#include "isac/linalg.hpp"
#include "isac/optim.hpp"
#include "isac/rng.hpp"
#include "isac/tape.hpp"

using namespace isac;

namespace {

CMat random_cmat(int r, int c, Rng& rng) {
  CMat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.cnormal();
  return m;
}

}  // namespace

TEST_CASE("cmat_mul identity and unit cases") {
  Rng rng(11);
  CMat x = random_cmat(2, 2, rng);
  CMat ix = cmat_mul(CMat::identity(2), x);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(ix(i, j) - x(i, j)) == 0.0);

  CMat j1(1, 1);
  j1(0, 0) = {0.0, 1.0};
  const CMat jj = cmat_mul(j1, j1);
  CHECK(jj(0, 0).real() == doctest::Approx(-1.0));
  CHECK(jj(0, 0).imag() == doctest::Approx(0.0));
}

TEST_CASE("cmat_mul matches triple-loop oracle on random 3x3") {
  Rng rng(12);
  const CMat a = random_cmat(3, 3, rng);
  const CMat b = random_cmat(3, 3, rng);
  const CMat c = cmat_mul(a, b);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      cdouble s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      CHECK(std::abs(c(i, j) - s) < 1e-12);
    }
}

TEST_CASE("cmat_mul rejects dimension mismatch") {
  CHECK_THROWS_AS(cmat_mul(CMat(2, 3), CMat(2, 3)), std::invalid_argument);
}

TEST_CASE("matrix product associativity on well-conditioned triples") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat a = random_cmat(4, 3, rng);
    const CMat b = random_cmat(3, 5, rng);
    const CMat c = random_cmat(5, 2, rng);
    const CMat l = cmat_mul(cmat_mul(a, b), c);
    const CMat r = cmat_mul(a, cmat_mul(b, c));
    const CMat d = l - r;
    CHECK(std::sqrt(d.frobenius_sq()) < 1e-10 * std::sqrt(l.frobenius_sq()));
  }
}

TEST_CASE("lu solve reproduces the right-hand side") {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6;
    CMat a = random_cmat(n, n, rng);
    for (int i = 0; i < n; ++i) a(i, i) += 2.0;  // keep well conditioned
    std::vector<cdouble> b(n);
    for (auto& z : b) z = rng.cnormal();
    const auto x = solve_lu(a, b);
    for (int i = 0; i < n; ++i) {
      cdouble s = 0.0;
      for (int j = 0; j < n; ++j) s += a(i, j) * x[j];
      CHECK(std::abs(s - b[i]) < 1e-10);
    }
  }
}

TEST_CASE("hermitian eigendecomposition reconstructs the matrix") {
  Rng rng(15);
  const int n = 6;
  CMat a(n, n);
  const CMat g = random_cmat(n, n, rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cdouble s = 0.0;
      for (int k = 0; k < n; ++k) s += g(i, k) * std::conj(g(j, k));
      a(i, j) = s;
    }
  const auto eig = herm_eig(a);
  for (int j = 1; j < n; ++j) CHECK(eig.values[j] >= eig.values[j - 1]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cdouble s = 0.0;
      for (int k = 0; k < n; ++k)
        s += eig.vectors(i, k) * eig.values[k] * std::conj(eig.vectors(j, k));
      CHECK(std::abs(s - a(i, j)) < 1e-9);
    }
}

TEST_CASE("backward on simple functions") {
  SUBCASE("f(x) = x^2 at x = 3") {
    ad::Tape t;
    const auto x = t.leaf(3.0);
    const auto y = t.mul(x, x);
    const auto g = t.backward(y);
    CHECK(g[0] == doctest::Approx(6.0));
  }
  SUBCASE("f(x) = log2(1 + x) at x = 1") {
    ad::Tape t;
    const auto x = t.leaf(1.0);
    const auto y = t.log2(t.add_const(x, 1.0));
    const auto g = t.backward(y);
    CHECK(g[0] == doctest::Approx(1.0 / (2.0 * std::log(2.0))).epsilon(1e-12));
  }
}

TEST_CASE("backward is deterministic: two sweeps are bitwise identical") {
  Rng rng(16);
  ad::Tape t;
  std::vector<ad::NodeId> xs;
  for (int i = 0; i < 8; ++i) xs.push_back(t.leaf(rng.uniform(0.5, 2.0)));
  auto acc = t.abs2(xs[0], xs[1]);
  acc = t.add(acc, t.mul(xs[2], xs[3]));
  acc = t.div(acc, t.add_const(t.abs2(xs[4], xs[5]), 1.0));
  acc = t.log2(t.add_const(t.mul(acc, t.leaky_relu(xs[6], 0.01)), 2.0));
  acc = t.add(acc, t.sqrt(t.recip(t.add_const(t.abs2(xs[7], xs[0]), 1.0))));
  const auto g1 = t.backward(acc);
  const auto g2 = t.backward(acc);
  REQUIRE(g1.size() == g2.size());
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);
}

TEST_CASE("backward rejects an out-of-range output node") {
  ad::Tape t;
  t.leaf(1.0);
  CHECK_THROWS_AS(t.backward(42), std::invalid_argument);
}

namespace {

template <typename F>
double fd_grad(F&& build, std::vector<double> xs, std::size_t i, double h = 1e-5) {
  xs[i] += h;
  const double up = build(xs);
  xs[i] -= 2 * h;
  const double dn = build(xs);
  return (up - dn) / (2 * h);
}

}  // namespace

TEST_CASE("per-node gradient check against central differences") {
  Rng rng(17);
  struct OpCase {
    const char* name;
    int arity;
    std::function<ad::NodeId(ad::Tape&, const std::vector<ad::NodeId>&)> apply;
  };
  const std::vector<OpCase> cases = {
      {"add", 2, [](ad::Tape& t, const auto& x) { return t.add(x[0], x[1]); }},
      {"sub", 2, [](ad::Tape& t, const auto& x) { return t.sub(x[0], x[1]); }},
      {"neg", 1, [](ad::Tape& t, const auto& x) { return t.neg(x[0]); }},
      {"mul", 2, [](ad::Tape& t, const auto& x) { return t.mul(x[0], x[1]); }},
      {"div", 2, [](ad::Tape& t, const auto& x) { return t.div(x[0], x[1]); }},
      {"mul_const", 1, [](ad::Tape& t, const auto& x) { return t.mul_const(x[0], 1.7); }},
      {"add_const", 1, [](ad::Tape& t, const auto& x) { return t.add_const(x[0], -0.3); }},
      {"log2", 1, [](ad::Tape& t, const auto& x) { return t.log2(x[0]); }},
      {"abs2", 2, [](ad::Tape& t, const auto& x) { return t.abs2(x[0], x[1]); }},
      {"sum", 3,
       [](ad::Tape& t, const auto& x) {
         return t.sum(std::span<const ad::NodeId>(x.data(), 3));
       }},
      {"leaky_relu", 1, [](ad::Tape& t, const auto& x) { return t.leaky_relu(x[0], 0.01); }},
      {"sqrt", 1, [](ad::Tape& t, const auto& x) { return t.sqrt(x[0]); }},
      {"recip", 1, [](ad::Tape& t, const auto& x) { return t.recip(x[0]); }},
  };
  for (const auto& oc : cases) {
    CAPTURE(oc.name);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> xs(oc.arity);
      // positive and away from zero: log/sqrt/recip domains and the relu kink
      for (auto& v : xs) v = rng.uniform(0.2, 2.0);
      auto build = [&](const std::vector<double>& v) {
        ad::Tape t;
        std::vector<ad::NodeId> leaves;
        for (double y : v) leaves.push_back(t.leaf(y));
        return t.value(oc.apply(t, leaves));
      };
      ad::Tape t;
      std::vector<ad::NodeId> leaves;
      for (double y : xs) leaves.push_back(t.leaf(y));
      const auto grads = t.backward(oc.apply(t, leaves));
      for (int i = 0; i < oc.arity; ++i) {
        const double fd = fd_grad(build, xs, i);
        const double scale = std::max({std::abs(fd), std::abs(grads[i]), 1e-8});
        CHECK(std::abs(grads[i] - fd) / scale < 1e-4);
      }
    }
  }
  for (int trial = 0; trial < 5; ++trial) {
    Rng nrng(100 + trial);
    const double x0 = -nrng.uniform(0.2, 2.0);
    ad::Tape t;
    const auto x = t.leaf(x0);
    const auto g = t.backward(t.leaky_relu(x, 0.01));
    CHECK(g[0] == doctest::Approx(0.01));
  }
}

TEST_CASE("optimizer: eta = 0 leaves parameters unchanged") {
  OptimizerConfig oc;
  oc.kind = OptKind::Adam;
  oc.learning_rate = 0.0;
  oc.weight_decay = 0.0;
  Optimizer opt(oc);
  std::vector<double> p = {1.0, -2.0, 3.0};
  const std::vector<double> g = {0.5, 0.5, 0.5};
  const auto before = p;
  opt.step(p, g);
  CHECK(p == before);
}

TEST_CASE("sgd step: p=1, g=2, eta=0.1 -> 0.8") {
  OptimizerConfig oc;
  oc.kind = OptKind::Sgd;
  oc.learning_rate = 0.1;
  Optimizer opt(oc);
  std::vector<double> p = {1.0};
  opt.step(p, std::vector<double>{2.0});
  CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("adam first step from zero moments matches the hand recurrence") {
  // g = 1: m_hat = 1, v_hat = 1, delta = -lr / (1 + eps)
  OptimizerConfig oc;
  oc.kind = OptKind::Adam;
  oc.learning_rate = 0.05;
  oc.weight_decay = 0.0;
  Optimizer opt(oc);
  std::vector<double> p = {0.0};
  opt.step(p, std::vector<double>{1.0});
  CHECK(p[0] == doctest::Approx(-0.05 / (1.0 + 1e-8)).epsilon(1e-14));
}

TEST_CASE("adam applies decoupled weight decay before the delta") {
  OptimizerConfig oc;
  oc.kind = OptKind::Adam;
  oc.learning_rate = 0.1;
  oc.weight_decay = 0.5;
  Optimizer opt(oc);
  std::vector<double> p = {2.0};
  opt.step(p, std::vector<double>{1.0});
  // decay first: 2 * (1 - 0.1 * 0.5) = 1.9, then the unit-gradient delta
  CHECK(p[0] == doctest::Approx(1.9 - 0.1 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("optimizer aborts on non-finite gradients") {
  Optimizer opt(OptimizerConfig{});
  std::vector<double> p = {1.0};
  CHECK_THROWS_AS(opt.step(p, std::vector<double>{std::nan("")}), std::runtime_error);
}

TEST_CASE("counter rng: reproducible streams, independent forks") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c = Rng(42).fork(1);
  Rng d = Rng(42).fork(2);
  bool differ = false;
  for (int i = 0; i < 8; ++i) differ |= c.next_u64() != d.next_u64();
  CHECK(differ);
}
