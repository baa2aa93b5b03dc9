#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace geopath {

// Dense row-major matrix of doubles. Everything is rank 2: row vectors are
// 1xN, scalars 1x1.
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(int r, int c);                         // zero-filled
  Tensor2(int r, int c, std::vector<double> d);  // size must equal r*c

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const;

  void fill(double v);
  bool all_finite() const;

  static Tensor2 row(std::vector<double> values);
  static Tensor2 scalar(double v);
};

bool operator==(const Tensor2& a, const Tensor2& b);

}  // namespace geopath
