#pragma once

#include <vector>

#include "geopath/nn.hpp"
#include "geopath/rewards.hpp"
#include "geopath/rng.hpp"
#include "geopath/tape.hpp"

namespace geopath {

struct CostReport {
  int active_blocks = 0;
  double pr = 0.0;          // |p|0 / N
  double cost_units = 0.0;  // multiply-accumulate proxy
};

// Gated residual classifier: stem (affine + ReLU), N shape-preserving
// residual blocks x <- x + p_n * F_n(x) with F_n = affine + ReLU + affine,
// and an affine head to class logits. Every block keeps width `hidden` so
// any subset of blocks can be skipped.
class BlockNet {
 public:
  BlockNet(int n_blocks, int feature_dim, int hidden, int classes, Rng& rng);

  // x: Bxd features; gates: BxN 0/1 matrix, one policy per row.
  ValueId infer(Tape& tape, ValueId x, const Tensor2& gates);

  // Convenience: same policy applied to every row.
  Tensor2 gates_for(const Policy& p, int batch) const;
  static Tensor2 gates_from(const std::vector<Policy>& policies);

  CostReport sparsity(const Policy& p) const;

  // argmax with ties broken toward the lowest index.
  static int predict_row(const Tensor2& logits, int row);

  std::vector<Parameter*> parameters();

  int n_blocks() const { return n_blocks_; }
  int feature_dim() const { return feature_dim_; }
  int hidden_dim() const { return hidden_; }
  int classes() const { return classes_; }

  double stem_cost() const;
  double block_cost() const;
  double head_cost() const;

 private:
  struct Block {
    DenseLayer fc1;
    DenseLayer fc2;
    Block(const std::string& name, int h, Rng& rng)
        : fc1(name + ".fc1", h, h, rng), fc2(name + ".fc2", h, h, rng) {}
  };

  int n_blocks_, feature_dim_, hidden_, classes_;
  DenseLayer stem_;
  std::vector<Block> blocks_;
  DenseLayer head_;
};

}  // namespace geopath
