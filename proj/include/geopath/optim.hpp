#pragma once

#include <unordered_map>
#include <vector>

#include "geopath/tape.hpp"

namespace geopath {

// SGD with classical momentum: v <- mu*v - lr*g; w <- w + v.
class SgdMomentum {
 public:
  SgdMomentum(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void step(const std::vector<Parameter*>& params) {
    for (Parameter* p : params) {
      Tensor2& v = velocity_.try_emplace(p, Tensor2(p->value.rows, p->value.cols))
                       .first->second;
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        v.data[i] = momentum_ * v.data[i] - lr_ * p->grad.data[i];
        p->value.data[i] += v.data[i];
      }
    }
  }

  static void zero_grad(const std::vector<Parameter*>& params) {
    for (Parameter* p : params) p->grad.fill(0.0);
  }

  double learning_rate() const { return lr_; }

 private:
  double lr_;
  double momentum_;
  std::unordered_map<Parameter*, Tensor2> velocity_;
};

}  // namespace geopath
