#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "geopath/tensor.hpp"

namespace geopath {

// A trainable weight or bias. Gradients accumulate across Tape::backward
// calls until the optimizer clears them.
struct Parameter {
  std::string name;
  Tensor2 value;
  Tensor2 grad;

  Parameter(std::string n, Tensor2 v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}
};

struct ValueId {
  std::uint32_t index = 0;
};

// Reverse-mode tape over dense primitives. Nodes are replayed for the
// backward pass in exact reverse creation order; a parameter bound twice
// resolves to the same node, so its gradient contributions merge.
// Single-owner: a Tape must not be shared across threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  ValueId input(Tensor2 x);        // constant leaf, never differentiated
  ValueId param(Parameter& p);     // registered leaf; idempotent per parameter

  ValueId affine(ValueId x, ValueId w, ValueId b);  // x*W + b, b broadcast over rows
  ValueId relu(ValueId x);
  ValueId sigmoid(ValueId x);
  ValueId exp(ValueId x);
  ValueId add(ValueId a, ValueId b);
  ValueId scale(ValueId x, double c);
  ValueId clamp(ValueId x, double lo, double hi);
  // y[i, :] = weights[i] * x[i, :]; weights are constants.
  ValueId row_scale(ValueId x, std::vector<double> weights);
  ValueId sum(ValueId x);  // 1x1
  // Mean negative log-likelihood over the batch, numerically stable.
  ValueId softmax_cross_entropy(ValueId logits, std::vector<int> labels);
  // Per-row sum_n log(s p + (1-s)(1-p)) for a constant 0/1 matrix; Bx1 output.
  ValueId bernoulli_log_likelihood(ValueId s, Tensor2 bits);

  const Tensor2& value(ValueId id) const;
  // Gradient of the last backward() target w.r.t. this node; zero tensor if
  // the node was unreachable.
  const Tensor2& grad(ValueId id) const;

  // Seeds d(loss)/d(loss) = 1, replays nodes in reverse creation order and
  // accumulates into Parameter::grad for every registered parameter.
  void backward(ValueId loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor2 value;
    Tensor2 grad;
    std::function<void(Tape&)> backprop;  // empty for leaves
    bool requires_grad = false;
    Parameter* bound = nullptr;
  };

  Node& node(ValueId id) { return nodes_[id.index]; }
  const Tensor2& val(ValueId id) const { return nodes_[id.index].value; }
  Tensor2& grad_ref(ValueId id) { return nodes_[id.index].grad; }
  bool needs(ValueId id) const { return nodes_[id.index].requires_grad; }
  ValueId push(Tensor2 value, bool requires_grad, const char* op);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::uint32_t> registry_;
};

}  // namespace geopath
