#include "stae/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace stae {

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
  for (std::size_t d : shape_) {
    if (d == 0) {
      throw std::invalid_argument("tensor: zero dimension in shape " + shape_to_string(shape_));
    }
  }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_product(shape_)) {
    throw std::invalid_argument("tensor: data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

std::string Tensor::shape_string() const { return shape_to_string(shape_); }

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::add(const Tensor& other) {
  require_same_shape(*this, other, "tensor add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

void Tensor::sub(const Tensor& other) {
  require_same_shape(*this, other, "tensor sub");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
}

void Tensor::scale(double s) {
  for (double& v : data_) v *= s;
}

void Tensor::axpy(double a, const Tensor& x) {
  require_same_shape(*this, x, "tensor axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
}

void Tensor::hadamard(const Tensor& other) {
  require_same_shape(*this, other, "tensor hadamard");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] *= other.data_[i];
}

double Tensor::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Tensor::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::min(m, v);
  return m;
}

double Tensor::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::max(m, v);
  return m;
}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

bool all_finite(const Tensor& t) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_string() +
                                " vs " + b.shape_string());
  }
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
  const std::size_t h = parts[0]->dim(1), w = parts[0]->dim(2);
  std::size_t channels = 0;
  for (const Tensor* p : parts) {
    if (p->rank() != 3 || p->dim(1) != h || p->dim(2) != w) {
      throw std::invalid_argument("concat_channels: spatial mismatch " + p->shape_string());
    }
    channels += p->dim(0);
  }
  Tensor out({channels, h, w});
  double* dst = out.data();
  for (const Tensor* p : parts) {
    std::copy(p->values().begin(), p->values().end(), dst);
    dst += p->size();
  }
  return out;
}

void add_into_channels(Tensor& dst, std::size_t dst_offset, const Tensor& src) {
  const std::size_t plane = dst.dim(1) * dst.dim(2);
  if (src.dim(1) * src.dim(2) != plane || dst_offset + src.dim(0) > dst.dim(0)) {
    throw std::invalid_argument("add_into_channels: shape mismatch " + src.shape_string() +
                                " into " + dst.shape_string());
  }
  double* d = dst.data() + dst_offset * plane;
  const double* s = src.data();
  for (std::size_t i = 0; i < src.size(); ++i) d[i] += s[i];
}

Tensor slice_channels(const Tensor& t, std::size_t from, std::size_t count) {
  if (from + count > t.dim(0)) {
    throw std::invalid_argument("slice_channels: range out of bounds for " + t.shape_string());
  }
  const std::size_t plane = t.dim(1) * t.dim(2);
  Tensor out({count, t.dim(1), t.dim(2)});
  std::copy(t.data() + from * plane, t.data() + (from + count) * plane, out.data());
  return out;
}

}  // namespace stae
