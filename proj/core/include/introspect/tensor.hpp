#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace introspect {

/// Dense row-major float32 array tagged with its shape. The single value
/// carrier for images, weights, logits and gradients. Tensors are plain
/// values: copyable, no views, no aliasing.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<float> data);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, float value);
  static Tensor scalar(float value) { return Tensor({1}, {value}); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  float& at(std::size_t flat) { return data_[flat]; }
  float at(std::size_t flat) const { return data_[flat]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  /// Throws kNumeric naming `what` if any entry is NaN or infinite.
  void require_finite(const char* what) const;

  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

std::size_t shape_product(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

}  // namespace introspect
