#pragma once

#include <cstddef>

#include "stae/tensor.hpp"

namespace stae {

/// Square-filter 2D convolution geometry. `in_channels`/`out_channels`
/// describe the op from its own perspective: conv2d filters are laid out
/// [out, in, m, m], deconv2d filters [in, out, m, m] so a conv and its
/// mirrored deconv can share one filter tensor.
struct ConvSpec {
  std::size_t filter_size = 1;
  std::size_t stride = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t padding = 0;
};

/// floor((n + 2*pad - m) / stride) + 1; rejects m > n + 2*pad.
std::size_t conv_out_size(std::size_t n, std::size_t m, std::size_t stride, std::size_t pad);

/// (n - 1)*stride + m - 2*pad, the size conv_out_size maps back onto.
std::size_t deconv_out_size(std::size_t n, std::size_t m, std::size_t stride, std::size_t pad);

/// input [C_in,H,W], filters [C_out,C_in,m,m], bias [C_out] -> [C_out,H',W'].
Tensor conv2d(const Tensor& input, const Tensor& filters, const Tensor& bias,
              const ConvSpec& spec);

struct ConvGrads {
  Tensor input;
  Tensor filters;
  Tensor bias;
};

/// Gradients of sum(grad_out * conv2d(input, filters, bias)) with respect to
/// input, filters and bias.
ConvGrads conv2d_backward(const Tensor& grad_out, const Tensor& saved_input,
                          const Tensor& filters, const ConvSpec& spec);

/// Transposed convolution, the adjoint of conv2d under shared filters:
/// input [C_in,H,W], filters [C_in,C_out,m,m], bias [C_out] -> [C_out,H'',W''].
Tensor deconv2d(const Tensor& input, const Tensor& filters, const Tensor& bias,
                const ConvSpec& spec);

ConvGrads deconv2d_backward(const Tensor& grad_out, const Tensor& saved_input,
                            const Tensor& filters, const ConvSpec& spec);

enum class Activation { kTanh, kSigmoid };

Tensor activation(const Tensor& input, Activation kind);

/// Backward from the activation *output* y: tanh' = 1 - y^2, sigmoid' = y(1-y).
Tensor activation_backward(const Tensor& grad_out, const Tensor& output, Activation kind);

}  // namespace stae
