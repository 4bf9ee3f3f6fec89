#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace stae {

/// Dense row-major tensor of doubles: the carrier for frames, filters,
/// activations and gradients. Shapes are fixed at construction; all
/// arithmetic helpers preserve shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor full(std::vector<std::size_t> shape, double value);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  double& at(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
  }
  double at(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
    return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_string() const;

  void fill(double value);
  void add(const Tensor& other);                 // this += other
  void sub(const Tensor& other);                 // this -= other
  void scale(double s);                          // this *= s
  void axpy(double a, const Tensor& x);          // this += a * x
  void hadamard(const Tensor& other);            // this *= other, elementwise

  double sum() const;
  double min() const;
  double max() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

bool all_finite(const Tensor& t);

/// Throws std::invalid_argument naming `what` when shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

double dot(const Tensor& a, const Tensor& b);

/// Stacks rank-3 tensors [C_k,H,W] along the channel axis.
Tensor concat_channels(const std::vector<const Tensor*>& parts);

/// Copies `count` channels of `src` starting at src channel 0 into `dst`
/// starting at channel `dst_offset`, accumulating.
void add_into_channels(Tensor& dst, std::size_t dst_offset, const Tensor& src);

/// Extracts channels [from, from+count) of a rank-3 tensor.
Tensor slice_channels(const Tensor& t, std::size_t from, std::size_t count);

}  // namespace stae
