// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace isac::ad {

using NodeId = std::uint32_t;

enum class Op : std::uint8_t {
  Leaf,       // differentiable input
  Const,      // fixed value, no gradient
  Add,        // a + b
  Sub,        // a - b
  Neg,        // -a
  Mul,        // a * b
  Div,        // a / b
  MulConst,   // a * aux
  AddConst,   // a + aux
  Log2,       // log2(a), a > 0
  Abs2,       // a^2 + b^2 (squared magnitude of a complex (re, im) pair)
  Sum,        // n-ary sum; children stored out of line
  LeakyRelu,  // a > 0 ? a : aux * a
  Sqrt,       // sqrt(a), a >= 0
  Recip,      // 1 / a
};

/// Scalar computation graph with eager forward evaluation and a single-pass
/// reverse sweep. Nodes are appended in topological order by construction
/// (children must already exist), so the backward pass is one reverse scan.
/// A Tape is single-threaded; use one instance per thread and clear() to
/// reuse its storage.
class Tape {
 public:
  NodeId leaf(double v);
  NodeId constant(double v);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId neg(NodeId a);
  NodeId mul(NodeId a, NodeId b);
  NodeId div(NodeId a, NodeId b);
  NodeId mul_const(NodeId a, double c);
  NodeId add_const(NodeId a, double c);
  NodeId log2(NodeId a);
  NodeId abs2(NodeId re, NodeId im);
  NodeId sum(std::span<const NodeId> xs);
  NodeId leaky_relu(NodeId a, double slope);
  NodeId sqrt(NodeId a);
  NodeId recip(NodeId a);

  double value(NodeId id) const { return nodes_[id].val; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const { return leaves_.size(); }

  /// Reverse sweep from the given scalar output node. Returns d(output)/d(leaf)
  /// for every leaf, in leaf creation order. The adjoint buffer is cleared on
  /// exit so the tape can be swept again (two sweeps give bitwise-identical
  /// results). Throws std::invalid_argument for an out-of-range output id.
  std::vector<double> backward(NodeId output);

  /// Like backward(), but writes leaf adjoints into `out` (resized as needed).
  void backward_into(NodeId output, std::vector<double>& out);

  void clear();
  void reserve(std::size_t nodes);

 private:
  struct Node {
    Op op;
    NodeId a = 0, b = 0;  // for Sum: a = offset into kids_, b = count
    double val = 0.0;
    double aux = 0.0;
  };

  NodeId push(Node n);
  NodeId check(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<NodeId> kids_;
  std::vector<NodeId> leaves_;
  std::vector<double> adj_;
};

}  // namespace isac::ad
