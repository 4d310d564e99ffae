#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "zclassifier/tensor.hpp"

namespace zc {

/// One vertex of a define-by-run computation graph. Graphs are rebuilt per
/// forward pass and are confined to one thread; distinct graphs may run in
/// parallel.
class Node {
 public:
  Tensor value;
  Tensor grad;  // same shape as value; allocated by backward()
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates local-derivative contributions
  // into the parents' grads.
  std::function<void(Node&)> backward_fn;
};

using NodePtr = std::shared_ptr<Node>;

/// Value-semantics handle to a graph node.
class Var {
 public:
  Var() = default;

  /// Trainable leaf: participates in backward().
  static Var param(Tensor value);
  /// Non-trainable leaf (inputs, targets, fixed tensors).
  static Var constant(Tensor value);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  const NodePtr& node() const { return node_; }

  explicit Var(NodePtr node) : node_(std::move(node)) {}

 private:
  NodePtr node_;
};

// Elementwise; operands must have identical shapes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);
Var exp(const Var& a);
Var log(const Var& a);
Var relu(const Var& a);
Var square(const Var& a);
/// Hard clamp; gradient is identity strictly inside [lo, hi], zero outside.
Var clamp(const Var& a, double lo, double hi);

/// [m x k] * [k x n] -> [m x n].
Var matmul(const Var& a, const Var& b);
/// [m x n] + row vector [n], broadcast over rows.
Var add_rowvec(const Var& a, const Var& bias);
/// Repeat each element d times along a new trailing axis.
Var expand_last(const Var& a, std::size_t d);
/// Mean over the trailing axis.
Var mean_last(const Var& a);

Var reduce_sum(const Var& a);
Var reduce_mean(const Var& a);
Var reshape(const Var& a, Shape shape);
/// Column range [c0, c1) of a matrix.
Var slice_cols(const Var& a, std::size_t c0, std::size_t c1);

/// Mean over rows of softmax cross-entropy; numerically stable log-sum-exp.
Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels);

/// x: [N x C x H x W], w: [O x C x kh x kw]; zero padding, positive stride.
Var conv2d(const Var& x, const Var& w, std::size_t stride, std::size_t pad);
Var add_channel_bias(const Var& x, const Var& bias);
Var avg_pool2d(const Var& x, std::size_t k, std::size_t stride);

/// Reverse-mode sweep from a scalar root. Zeroes the grads of every
/// reachable node, then accumulates droot/dnode additively across paths.
void backward(const Var& root);

/// Row-major softmax of a matrix (plain values, no graph).
Tensor softmax_rows(const Tensor& logits);

}  // namespace zc
