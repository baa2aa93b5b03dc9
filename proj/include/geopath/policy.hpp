#pragma once

#include <vector>

#include "geopath/nn.hpp"
#include "geopath/rewards.hpp"
#include "geopath/rng.hpp"
#include "geopath/tape.hpp"

namespace geopath {

// Per-block keep probabilities for one sample, clamped to
// [epsilon, 1-epsilon] by the fusion step.
struct KeepProbs {
  std::vector<double> s;
};

// Two-branch policy network. The location branch is the fixed
// 8-128-256-256-128-N stack; the image branch maps precomputed feature
// vectors through two hidden layers. Branch outputs are blended
// pre-sigmoid: s = clamp(sigmoid(alpha*loc + (1-alpha)*img), eps, 1-eps).
class PolicyNetwork {
 public:
  PolicyNetwork(int n_blocks, int feature_dim, int img_hidden, Rng& rng);

  // x_loc: Bx8 normalized geo vectors; x_img: Bxd feature vectors.
  // With remove_loc the location branch output is replaced by zeros and the
  // image term keeps its (1-alpha) weight.
  ValueId fuse(Tape& tape, ValueId x_loc, ValueId x_img);

  std::vector<Parameter*> parameters();
  std::vector<Parameter*> loc_parameters() { return loc_.parameters(); }
  std::vector<Parameter*> img_parameters() { return img_.parameters(); }

  int n_blocks() const { return n_blocks_; }
  int feature_dim() const { return img_.input_dim(); }

  double alpha = 0.7;
  double epsilon = 0.05;
  bool remove_loc = false;

 private:
  int n_blocks_;
  Mlp loc_;
  Mlp img_;
};

// Extracts row `row` of a BxN keep-probability matrix.
KeepProbs keep_probs_row(const Tensor2& s, int row);

// Independent Bernoulli draw per block; consumes one rng draw per bit in
// index order.
Policy sample_policy(const KeepProbs& probs, Rng& rng);

// Maximally probable configuration: bit n = 1 iff s_n > 0.5 (ties to 0).
Policy greedy_policy(const KeepProbs& probs);

// sum_n log(s p + (1-s)(1-p)) as a plain value.
double log_likelihood_value(const KeepProbs& probs, const Policy& p);

// Same quantity as a tape node (Bx1 for a batch), differentiable through
// fuse(); `bits` holds one policy per row as 0/1 entries.
ValueId log_likelihood(Tape& tape, ValueId s, Tensor2 bits);

}  // namespace geopath
