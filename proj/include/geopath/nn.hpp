#pragma once

#include <string>
#include <vector>

#include "geopath/rng.hpp"
#include "geopath/tape.hpp"

namespace geopath {

// Uniform in [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))].
Tensor2 xavier_uniform(int fan_in, int fan_out, Rng& rng);

struct DenseLayer {
  Parameter weight;
  Parameter bias;

  DenseLayer(const std::string& name, int in, int out, Rng& rng);
};

// Fully connected stack with ReLU between layers and a linear output layer.
class Mlp {
 public:
  Mlp(const std::string& name, const std::vector<int>& widths, Rng& rng);

  ValueId forward(Tape& tape, ValueId x);

  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  std::vector<Parameter*> parameters();

 private:
  std::vector<int> widths_;
  std::vector<DenseLayer> layers_;
};

}  // namespace geopath
