#include "geopath/policy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace geopath {

PolicyNetwork::PolicyNetwork(int n_blocks, int feature_dim, int img_hidden, Rng& rng)
    : n_blocks_(n_blocks),
      loc_("policy.loc", {8, 128, 256, 256, 128, n_blocks}, rng),
      img_("policy.img", {feature_dim, img_hidden, img_hidden, n_blocks}, rng) {
  if (n_blocks < 1) throw std::invalid_argument("PolicyNetwork: n_blocks must be >= 1");
  if (feature_dim < 1) throw std::invalid_argument("PolicyNetwork: feature_dim must be >= 1");
}

ValueId PolicyNetwork::fuse(Tape& tape, ValueId x_loc, ValueId x_img) {
  const Tensor2& lv = tape.value(x_loc);
  const Tensor2& iv = tape.value(x_img);
  if (lv.cols != 8)
    throw std::invalid_argument("fuse: x_loc must have 8 columns, got " + lv.shape_str());
  if (iv.cols != img_.input_dim())
    throw std::invalid_argument("fuse: x_img must have " + std::to_string(img_.input_dim()) +
                                " columns, got " + iv.shape_str());
  if (lv.rows != iv.rows)
    throw std::invalid_argument("fuse: batch sizes disagree, " + lv.shape_str() + " vs " +
                                iv.shape_str());
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("fuse: alpha must lie in [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("fuse: epsilon must lie in (0, 0.5)");

  ValueId img_term = tape.scale(img_.forward(tape, x_img), 1.0 - alpha);
  ValueId logits;
  if (remove_loc) {
    // Location branch ablated: its contribution is a zero matrix, so only
    // the image term reaches the sigmoid.
    logits = img_term;
  } else {
    ValueId loc_term = tape.scale(loc_.forward(tape, x_loc), alpha);
    logits = tape.add(loc_term, img_term);
  }
  return tape.clamp(tape.sigmoid(logits), epsilon, 1.0 - epsilon);
}

std::vector<Parameter*> PolicyNetwork::parameters() {
  std::vector<Parameter*> ps = loc_.parameters();
  for (Parameter* p : img_.parameters()) ps.push_back(p);
  return ps;
}

KeepProbs keep_probs_row(const Tensor2& s, int row) {
  if (row < 0 || row >= s.rows) throw std::out_of_range("keep_probs_row: bad row");
  KeepProbs kp;
  kp.s.resize(static_cast<std::size_t>(s.cols));
  for (int j = 0; j < s.cols; ++j) kp.s[static_cast<std::size_t>(j)] = s.at(row, j);
  return kp;
}

Policy sample_policy(const KeepProbs& probs, Rng& rng) {
  Policy p;
  p.bits.resize(probs.s.size());
  for (std::size_t n = 0; n < probs.s.size(); ++n)
    p.bits[n] = uniform01(rng) < probs.s[n] ? 1 : 0;
  return p;
}

Policy greedy_policy(const KeepProbs& probs) {
  Policy p;
  p.bits.resize(probs.s.size());
  for (std::size_t n = 0; n < probs.s.size(); ++n) p.bits[n] = probs.s[n] > 0.5 ? 1 : 0;
  return p;
}

double log_likelihood_value(const KeepProbs& probs, const Policy& p) {
  if (probs.s.size() != p.bits.size())
    throw std::invalid_argument("log_likelihood: length mismatch");
  double ll = 0.0;
  for (std::size_t n = 0; n < probs.s.size(); ++n)
    ll += p.bits[n] ? std::log(probs.s[n]) : std::log(1.0 - probs.s[n]);
  return ll;
}

ValueId log_likelihood(Tape& tape, ValueId s, Tensor2 bits) {
  return tape.bernoulli_log_likelihood(s, std::move(bits));
}

}  // namespace geopath
