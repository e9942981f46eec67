#include "spanparse/tensor.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "spanparse/errors.h"

namespace spanparse {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("tensor value count " + std::to_string(data_.size()) +
                     " does not match shape [" + std::to_string(rows) + ", " +
                     std::to_string(cols) + "]");
  }
}

Tensor Tensor::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(1, n, std::move(values));
}

std::string Tensor::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_inplace(const Tensor& other) {
  if (!same_shape(other)) {
    throw ShapeError("add_inplace: " + shape_string() + " vs " + other.shape_string());
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace spanparse
