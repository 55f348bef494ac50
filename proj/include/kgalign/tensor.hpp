#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace kgalign {

/// Dense row-major matrix of 64-bit floats. Row/column vectors are [n,1]
/// and [1,n]; scalars are [1,1].
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.values[0] = v;
    return t;
  }

  static Tensor from(std::size_t r, std::size_t c,
                     std::initializer_list<double> v) {
    Tensor t(r, c);
    t.values.assign(v.begin(), v.end());
    return t;
  }

  std::size_t numel() const { return rows * cols; }
  bool is_scalar() const { return numel() == 1; }

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  double* data() { return values.data(); }
  const double* data() const { return values.data(); }

  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  std::string shape_str() const {
    return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
  }

  bool operator==(const Tensor& o) const {
    return rows == o.rows && cols == o.cols && values == o.values;
  }
};

}  // namespace kgalign
