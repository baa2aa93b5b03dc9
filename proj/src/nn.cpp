#include "geopath/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace geopath {

Tensor2 xavier_uniform(int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor2 w(fan_in, fan_out);
  for (auto& v : w.data) v = uniform_range(rng, -bound, bound);
  return w;
}

DenseLayer::DenseLayer(const std::string& name, int in, int out, Rng& rng)
    : weight(name + ".W", xavier_uniform(in, out, rng)), bias(name + ".b", Tensor2(1, out)) {}

Mlp::Mlp(const std::string& name, const std::vector<int>& widths, Rng& rng) : widths_(widths) {
  if (widths.size() < 2) throw std::invalid_argument("Mlp: need at least input and output width");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    layers_.emplace_back(name + ".fc" + std::to_string(i + 1), widths[i], widths[i + 1], rng);
}

ValueId Mlp::forward(Tape& tape, ValueId x) {
  ValueId h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = tape.affine(h, tape.param(layers_[i].weight), tape.param(layers_[i].bias));
    if (i + 1 < layers_.size()) h = tape.relu(h);
  }
  return h;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> ps;
  for (auto& l : layers_) {
    ps.push_back(&l.weight);
    ps.push_back(&l.bias);
  }
  return ps;
}

}  // namespace geopath
