#include "geopath/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace geopath {

namespace {

void ensure_finite(const Tensor2& t, const char* op) {
  if (!t.all_finite())
    throw std::runtime_error(std::string(op) + ": produced non-finite values");
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

ValueId Tape::push(Tensor2 value, bool requires_grad, const char* op) {
  ensure_finite(value, op);
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return ValueId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

ValueId Tape::input(Tensor2 x) { return push(std::move(x), false, "input"); }

ValueId Tape::param(Parameter& p) {
  auto it = registry_.find(&p);
  if (it != registry_.end()) return ValueId{it->second};
  ValueId id = push(p.value, true, "param");
  nodes_[id.index].bound = &p;
  registry_.emplace(&p, id.index);
  return id;
}

ValueId Tape::affine(ValueId x, ValueId w, ValueId b) {
  const Tensor2& xv = val(x);
  const Tensor2& wv = val(w);
  const Tensor2& bv = val(b);
  if (xv.cols != wv.rows)
    throw std::invalid_argument("affine: inner dimensions disagree, x is " + xv.shape_str() +
                                ", W is " + wv.shape_str());
  if (bv.rows != 1 || bv.cols != wv.cols)
    throw std::invalid_argument("affine: bias must be 1x" + std::to_string(wv.cols) +
                                ", got " + bv.shape_str());

  Tensor2 y(xv.rows, wv.cols);
  for (int i = 0; i < xv.rows; ++i) {
    double* yi = y.row_ptr(i);
    for (int j = 0; j < wv.cols; ++j) yi[j] = bv.at(0, j);
    for (int k = 0; k < xv.cols; ++k) {
      const double xik = xv.at(i, k);
      const double* wk = wv.row_ptr(k);
      for (int j = 0; j < wv.cols; ++j) yi[j] += xik * wk[j];
    }
  }

  const bool rg = needs(x) || needs(w) || needs(b);
  ValueId out = push(std::move(y), rg, "affine");
  if (rg) {
    node(out).backprop = [x, w, b, out](Tape& t) {
      const Tensor2& g = t.grad_ref(out);
      const Tensor2& xv = t.val(x);
      const Tensor2& wv = t.val(w);
      if (t.needs(x)) {
        Tensor2& gx = t.grad_ref(x);
        for (int i = 0; i < xv.rows; ++i)
          for (int k = 0; k < xv.cols; ++k) {
            const double* gi = g.row_ptr(i);
            const double* wk = wv.row_ptr(k);
            double acc = 0.0;
            for (int j = 0; j < wv.cols; ++j) acc += gi[j] * wk[j];
            gx.at(i, k) += acc;
          }
      }
      if (t.needs(w)) {
        Tensor2& gw = t.grad_ref(w);
        for (int k = 0; k < xv.cols; ++k)
          for (int i = 0; i < xv.rows; ++i) {
            const double xik = xv.at(i, k);
            const double* gi = g.row_ptr(i);
            double* gwk = gw.row_ptr(k);
            for (int j = 0; j < wv.cols; ++j) gwk[j] += xik * gi[j];
          }
      }
      if (t.needs(b)) {
        Tensor2& gb = t.grad_ref(b);
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < g.cols; ++j) gb.at(0, j) += g.at(i, j);
      }
    };
  }
  return out;
}

ValueId Tape::relu(ValueId x) {
  const Tensor2& xv = val(x);
  Tensor2 y = xv;
  for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
  const bool rg = needs(x);
  ValueId out = push(std::move(y), rg, "relu");
  if (rg) {
    node(out).backprop = [x, out](Tape& t) {
      const Tensor2& g = t.grad_ref(out);
      const Tensor2& xv = t.val(x);
      Tensor2& gx = t.grad_ref(x);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (xv.data[i] > 0.0) gx.data[i] += g.data[i];
    };
  }
  return out;
}

ValueId Tape::sigmoid(ValueId x) {
  Tensor2 y = val(x);
  for (auto& v : y.data) v = stable_sigmoid(v);
  const bool rg = needs(x);
  ValueId out = push(std::move(y), rg, "sigmoid");
  if (rg) {
    node(out).backprop = [x, out](Tape& t) {
      const Tensor2& g = t.grad_ref(out);
      const Tensor2& yv = t.val(out);
      Tensor2& gx = t.grad_ref(x);
      for (std::size_t i = 0; i < g.size(); ++i)
        gx.data[i] += g.data[i] * yv.data[i] * (1.0 - yv.data[i]);
    };
  }
  return out;
}

ValueId Tape::exp(ValueId x) {
  Tensor2 y = val(x);
  for (auto& v : y.data) v = std::exp(v);
  const bool rg = needs(x);
  ValueId out = push(std::move(y), rg, "exp");
  if (rg) {
    node(out).backprop = [x, out](Tape& t) {
      const Tensor2& g = t.grad_ref(out);
      const Tensor2& yv = t.val(out);
      Tensor2& gx = t.grad_ref(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += g.data[i] * yv.data[i];
    };
  }
  return out;
}

ValueId Tape::add(ValueId a, ValueId b) {
  const Tensor2& av = val(a);
  const Tensor2& bv = val(b);
  if (!av.same_shape(bv))
    throw std::invalid_argument("add: shape mismatch, " + av.shape_str() + " vs " +
                                bv.shape_str());
  Tensor2 y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += bv.data[i];
  const bool rg = needs(a) || needs(b);
  ValueId out = push(std::move(y), rg, "add");
  if (rg) {
    node(out).backprop = [a, b, out](Tape& t) {
      const Tensor2& g = t.grad_ref(out);
      if (t.needs(a)) {
        Tensor2& ga = t.grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
      }
      if (t.needs(b)) {
        Tensor2& gb = t.grad_ref(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i];
      }
    };
  }
  return out;
}

ValueId Tape::scale(ValueId x, double c) {
  Tensor2 y = val(x);
  for (auto& v : y.data) v *= c;
  const bool rg = needs(x);
  ValueId out = push(std::move(y), rg, "scale");
  if (rg) {
    node(out).backprop = [x, c, out](Tape& t) {
      const Tensor2& g = t.grad_ref(out);
      Tensor2& gx = t.grad_ref(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += c * g.data[i];
    };
  }
  return out;
}

ValueId Tape::clamp(ValueId x, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be < hi");
  Tensor2 y = val(x);
  for (auto& v : y.data) v = std::min(std::max(v, lo), hi);
  const bool rg = needs(x);
  ValueId out = push(std::move(y), rg, "clamp");
  if (rg) {
    node(out).backprop = [x, lo, hi, out](Tape& t) {
      const Tensor2& g = t.grad_ref(out);
      const Tensor2& xv = t.val(x);
      Tensor2& gx = t.grad_ref(x);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (xv.data[i] > lo && xv.data[i] < hi) gx.data[i] += g.data[i];
    };
  }
  return out;
}

ValueId Tape::row_scale(ValueId x, std::vector<double> weights) {
  const Tensor2& xv = val(x);
  if (static_cast<int>(weights.size()) != xv.rows)
    throw std::invalid_argument("row_scale: weight count " + std::to_string(weights.size()) +
                                " does not match row count " + std::to_string(xv.rows));
  Tensor2 y = xv;
  for (int i = 0; i < y.rows; ++i) {
    const double wi = weights[static_cast<std::size_t>(i)];
    for (int j = 0; j < y.cols; ++j) y.at(i, j) *= wi;
  }
  const bool rg = needs(x);
  ValueId out = push(std::move(y), rg, "row_scale");
  if (rg) {
    node(out).backprop = [x, out, ws = std::move(weights)](Tape& t) {
      const Tensor2& g = t.grad_ref(out);
      Tensor2& gx = t.grad_ref(x);
      for (int i = 0; i < g.rows; ++i) {
        const double wi = ws[static_cast<std::size_t>(i)];
        for (int j = 0; j < g.cols; ++j) gx.at(i, j) += wi * g.at(i, j);
      }
    };
  }
  return out;
}

ValueId Tape::sum(ValueId x) {
  const Tensor2& xv = val(x);
  double s = 0.0;
  for (double v : xv.data) s += v;
  const bool rg = needs(x);
  ValueId out = push(Tensor2::scalar(s), rg, "sum");
  if (rg) {
    node(out).backprop = [x, out](Tape& t) {
      const double g = t.grad_ref(out).data[0];
      Tensor2& gx = t.grad_ref(x);
      for (auto& v : gx.data) v += g;
    };
  }
  return out;
}

ValueId Tape::softmax_cross_entropy(ValueId logits, std::vector<int> labels) {
  const Tensor2& lv = val(logits);
  if (static_cast<int>(labels.size()) != lv.rows)
    throw std::invalid_argument("softmax_cross_entropy: got " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(lv.rows) + " rows");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= lv.cols)
      throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(labels[i]) +
                                  " out of range for " + std::to_string(lv.cols) +
                                  " classes at row " + std::to_string(i));

  // Cache the softmax for the backward pass.
  Tensor2 probs(lv.rows, lv.cols);
  double loss = 0.0;
  for (int i = 0; i < lv.rows; ++i) {
    double mx = lv.at(i, 0);
    for (int j = 1; j < lv.cols; ++j) mx = std::max(mx, lv.at(i, j));
    double z = 0.0;
    for (int j = 0; j < lv.cols; ++j) z += std::exp(lv.at(i, j) - mx);
    const double logz = std::log(z) + mx;
    for (int j = 0; j < lv.cols; ++j) probs.at(i, j) = std::exp(lv.at(i, j) - logz);
    loss += logz - lv.at(i, labels[static_cast<std::size_t>(i)]);
  }
  loss /= static_cast<double>(lv.rows);

  const bool rg = needs(logits);
  ValueId out = push(Tensor2::scalar(loss), rg, "softmax_cross_entropy");
  if (rg) {
    node(out).backprop = [logits, out, ls = std::move(labels), p = std::move(probs)](Tape& t) {
      const double g = t.grad_ref(out).data[0];
      Tensor2& gx = t.grad_ref(logits);
      const double inv_b = 1.0 / static_cast<double>(p.rows);
      for (int i = 0; i < p.rows; ++i)
        for (int j = 0; j < p.cols; ++j) {
          const double ind = (j == ls[static_cast<std::size_t>(i)]) ? 1.0 : 0.0;
          gx.at(i, j) += g * (p.at(i, j) - ind) * inv_b;
        }
    };
  }
  return out;
}

ValueId Tape::bernoulli_log_likelihood(ValueId s, Tensor2 bits) {
  const Tensor2& sv = val(s);
  if (!sv.same_shape(bits))
    throw std::invalid_argument("bernoulli_log_likelihood: shape mismatch, s is " +
                                sv.shape_str() + ", bits is " + bits.shape_str());
  Tensor2 y(sv.rows, 1);
  for (int i = 0; i < sv.rows; ++i) {
    double ll = 0.0;
    for (int j = 0; j < sv.cols; ++j) {
      const double p = sv.at(i, j);
      ll += bits.at(i, j) != 0.0 ? std::log(p) : std::log(1.0 - p);
    }
    y.at(i, 0) = ll;
  }
  const bool rg = needs(s);
  ValueId out = push(std::move(y), rg, "bernoulli_log_likelihood");
  if (rg) {
    node(out).backprop = [s, out, bs = std::move(bits)](Tape& t) {
      const Tensor2& g = t.grad_ref(out);
      const Tensor2& sv = t.val(s);
      Tensor2& gs = t.grad_ref(s);
      for (int i = 0; i < sv.rows; ++i) {
        const double gi = g.at(i, 0);
        for (int j = 0; j < sv.cols; ++j) {
          const double p = sv.at(i, j);
          gs.at(i, j) += gi * (bs.at(i, j) != 0.0 ? 1.0 / p : -1.0 / (1.0 - p));
        }
      }
    };
  }
  return out;
}

const Tensor2& Tape::value(ValueId id) const {
  if (id.index >= nodes_.size()) throw std::out_of_range("Tape::value: bad id");
  return nodes_[id.index].value;
}

const Tensor2& Tape::grad(ValueId id) const {
  if (id.index >= nodes_.size()) throw std::out_of_range("Tape::grad: bad id");
  return nodes_[id.index].grad;
}

void Tape::backward(ValueId loss) {
  const Tensor2& lv = val(loss);
  if (lv.rows != 1 || lv.cols != 1)
    throw std::invalid_argument("backward: loss must be a 1x1 scalar, got " + lv.shape_str());

  for (auto& n : nodes_) {
    if (n.requires_grad)
      n.grad = Tensor2(n.value.rows, n.value.cols);
    else
      n.grad = Tensor2(0, 0);
  }
  if (nodes_[loss.index].requires_grad) {
    nodes_[loss.index].grad.data[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      Node& n = nodes_[i];
      if (n.requires_grad && n.backprop) n.backprop(*this);
    }
  }
  for (const auto& entry : registry_) {
    const Tensor2& g = nodes_[entry.second].grad;
    Parameter* bound = nodes_[entry.second].bound;
    for (std::size_t i = 0; i < g.size(); ++i) bound->grad.data[i] += g.data[i];
  }
}

}  // namespace geopath
