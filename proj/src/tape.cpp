// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace isac::ad {

namespace {
constexpr double kInvLn2 = 1.4426950408889634074;  // 1/ln(2)
}

NodeId Tape::push(Node n) {
  nodes_.push_back(n);
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::check(NodeId id) const {
  if (id >= nodes_.size()) throw std::invalid_argument("tape: node id out of range");
  return id;
}

NodeId Tape::leaf(double v) {
  NodeId id = push({Op::Leaf, 0, 0, v, 0.0});
  leaves_.push_back(id);
  return id;
}

NodeId Tape::constant(double v) { return push({Op::Const, 0, 0, v, 0.0}); }

NodeId Tape::add(NodeId a, NodeId b) {
  return push({Op::Add, check(a), check(b), nodes_[a].val + nodes_[b].val, 0.0});
}

NodeId Tape::sub(NodeId a, NodeId b) {
  return push({Op::Sub, check(a), check(b), nodes_[a].val - nodes_[b].val, 0.0});
}

NodeId Tape::neg(NodeId a) { return push({Op::Neg, check(a), 0, -nodes_[a].val, 0.0}); }

NodeId Tape::mul(NodeId a, NodeId b) {
  return push({Op::Mul, check(a), check(b), nodes_[a].val * nodes_[b].val, 0.0});
}

NodeId Tape::div(NodeId a, NodeId b) {
  return push({Op::Div, check(a), check(b), nodes_[a].val / nodes_[b].val, 0.0});
}

NodeId Tape::mul_const(NodeId a, double c) {
  return push({Op::MulConst, check(a), 0, nodes_[a].val * c, c});
}

NodeId Tape::add_const(NodeId a, double c) {
  return push({Op::AddConst, check(a), 0, nodes_[a].val + c, c});
}

NodeId Tape::log2(NodeId a) {
  return push({Op::Log2, check(a), 0, std::log2(nodes_[a].val), 0.0});
}

NodeId Tape::abs2(NodeId re, NodeId im) {
  const double r = nodes_[check(re)].val, i = nodes_[check(im)].val;
  return push({Op::Abs2, re, im, r * r + i * i, 0.0});
}

NodeId Tape::sum(std::span<const NodeId> xs) {
  double s = 0.0;
  const NodeId off = static_cast<NodeId>(kids_.size());
  for (NodeId x : xs) {
    kids_.push_back(check(x));
    s += nodes_[x].val;
  }
  return push({Op::Sum, off, static_cast<NodeId>(xs.size()), s, 0.0});
}

NodeId Tape::leaky_relu(NodeId a, double slope) {
  const double v = nodes_[check(a)].val;
  return push({Op::LeakyRelu, a, 0, v > 0.0 ? v : slope * v, slope});
}

NodeId Tape::sqrt(NodeId a) {
  return push({Op::Sqrt, check(a), 0, std::sqrt(nodes_[a].val), 0.0});
}

NodeId Tape::recip(NodeId a) {
  return push({Op::Recip, check(a), 0, 1.0 / nodes_[a].val, 0.0});
}

std::vector<double> Tape::backward(NodeId output) {
  std::vector<double> out;
  backward_into(output, out);
  return out;
}

void Tape::backward_into(NodeId output, std::vector<double>& out) {
  check(output);
  adj_.assign(nodes_.size(), 0.0);
  adj_[output] = 1.0;
  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    const Node& n = nodes_[idx];
    const double g = adj_[idx];
    if (g == 0.0) continue;
    switch (n.op) {
      case Op::Leaf:
      case Op::Const:
        break;
      case Op::Add:
        adj_[n.a] += g;
        adj_[n.b] += g;
        break;
      case Op::Sub:
        adj_[n.a] += g;
        adj_[n.b] -= g;
        break;
      case Op::Neg:
        adj_[n.a] -= g;
        break;
      case Op::Mul:
        adj_[n.a] += g * nodes_[n.b].val;
        adj_[n.b] += g * nodes_[n.a].val;
        break;
      case Op::Div: {
        const double bv = nodes_[n.b].val;
        adj_[n.a] += g / bv;
        adj_[n.b] -= g * nodes_[n.a].val / (bv * bv);
        break;
      }
      case Op::MulConst:
        adj_[n.a] += g * n.aux;
        break;
      case Op::AddConst:
        adj_[n.a] += g;
        break;
      case Op::Log2:
        adj_[n.a] += g * kInvLn2 / nodes_[n.a].val;
        break;
      case Op::Abs2:
        adj_[n.a] += g * 2.0 * nodes_[n.a].val;
        adj_[n.b] += g * 2.0 * nodes_[n.b].val;
        break;
      case Op::Sum:
        for (NodeId c = 0; c < n.b; ++c) adj_[kids_[n.a + c]] += g;
        break;
      case Op::LeakyRelu:
        adj_[n.a] += g * (nodes_[n.a].val > 0.0 ? 1.0 : n.aux);
        break;
      case Op::Sqrt:
        adj_[n.a] += g * 0.5 / n.val;
        break;
      case Op::Recip:
        adj_[n.a] -= g * n.val * n.val;
        break;
    }
  }
  out.resize(leaves_.size());
  for (std::size_t i = 0; i < leaves_.size(); ++i) out[i] = adj_[leaves_[i]];
  adj_.clear();
}

void Tape::clear() {
  nodes_.clear();
  kids_.clear();
  leaves_.clear();
  adj_.clear();
}

void Tape::reserve(std::size_t nodes) {
  nodes_.reserve(nodes);
  kids_.reserve(nodes);
}

}  // namespace isac::ad
