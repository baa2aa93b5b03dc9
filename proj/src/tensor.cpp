#include "geopath/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace geopath {

Tensor2::Tensor2(int r, int c) : rows(r), cols(c) {
  if (r < 0 || c < 0) throw std::invalid_argument("Tensor2: negative dimension");
  data.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0);
}

Tensor2::Tensor2(int r, int c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
  if (r < 0 || c < 0) throw std::invalid_argument("Tensor2: negative dimension");
  if (data.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c))
    throw std::invalid_argument("Tensor2: data length " + std::to_string(data.size()) +
                                " does not match shape " + std::to_string(r) + "x" +
                                std::to_string(c));
}

std::string Tensor2::shape_str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

void Tensor2::fill(double v) {
  for (auto& x : data) x = v;
}

bool Tensor2::all_finite() const {
  for (double x : data)
    if (!std::isfinite(x)) return false;
  return true;
}

Tensor2 Tensor2::row(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor2(1, n, std::move(values));
}

Tensor2 Tensor2::scalar(double v) { return Tensor2(1, 1, {v}); }

bool operator==(const Tensor2& a, const Tensor2& b) {
  return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

}  // namespace geopath
