#include "introspect/tensor.hpp"

#include <cmath>
#include <sstream>

#include "introspect/error.hpp"

namespace introspect {

std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) raise(ErrorCode::kDimension, "tensor shape has non-positive dimension " + std::to_string(d));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(shape_product(shape_), 0.0f);
}

Tensor::Tensor(std::vector<int> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    raise(ErrorCode::kDimension,
          "tensor data length " + std::to_string(data_.size()) +
              " does not match shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::full(std::vector<int> shape, float value) {
  Tensor t(std::move(shape));
  for (float& v : t.data_) v = value;
  return t;
}

int Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) {
    raise(ErrorCode::kDimension,
          "axis " + std::to_string(axis) + " out of range for rank " + std::to_string(rank()));
  }
  return shape_[static_cast<std::size_t>(axis)];
}

void Tensor::require_finite(const char* what) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      raise(ErrorCode::kNumeric, std::string(what) + ": non-finite value at flat index " +
                                     std::to_string(i));
    }
  }
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

}  // namespace introspect
