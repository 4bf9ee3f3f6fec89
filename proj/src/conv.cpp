#include "stae/conv.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stae {

namespace {

// First index i with i*stride + k - pad >= 0.
std::size_t lo_index(std::size_t k, std::size_t stride, std::size_t pad) {
  if (pad <= k) return 0;
  return (pad - k + stride - 1) / stride;
}

// Last index i (exclusive) with i*stride + k - pad <= limit - 1.
std::size_t hi_index(std::size_t k, std::size_t stride, std::size_t pad, std::size_t limit,
                     std::size_t count) {
  const std::size_t top = limit - 1 + pad;
  if (top < k) return 0;
  const std::size_t last = (top - k) / stride;
  return last + 1 < count ? last + 1 : count;
}

void check_conv_args(const Tensor& input, const Tensor& filters, const Tensor& bias,
                     const ConvSpec& spec, bool transposed) {
  const char* op = transposed ? "deconv2d" : "conv2d";
  if (input.rank() != 3) {
    throw std::invalid_argument(std::string(op) + ": input must be rank 3 [C,H,W], got " +
                                input.shape_string());
  }
  if (filters.rank() != 4) {
    throw std::invalid_argument(std::string(op) + ": filters must be rank 4, got " +
                                filters.shape_string());
  }
  const std::size_t m = spec.filter_size;
  if (spec.stride == 0 || m == 0) {
    throw std::invalid_argument(std::string(op) + ": stride and filter size must be positive");
  }
  if (filters.dim(2) != m || filters.dim(3) != m) {
    throw std::invalid_argument(std::string(op) + ": filter tensor " + filters.shape_string() +
                                " does not match filter_size " + std::to_string(m));
  }
  // filters: conv [out,in,m,m], deconv [in,out,m,m]
  const std::size_t f_in = transposed ? filters.dim(0) : filters.dim(1);
  const std::size_t f_out = transposed ? filters.dim(1) : filters.dim(0);
  if (f_in != spec.in_channels || f_out != spec.out_channels) {
    throw std::invalid_argument(std::string(op) + ": filter tensor " + filters.shape_string() +
                                " does not match channels in=" + std::to_string(spec.in_channels) +
                                " out=" + std::to_string(spec.out_channels));
  }
  if (input.dim(0) != spec.in_channels) {
    throw std::invalid_argument(std::string(op) + ": input has " + std::to_string(input.dim(0)) +
                                " channels, spec expects " + std::to_string(spec.in_channels));
  }
  if (bias.rank() != 1 || bias.dim(0) != spec.out_channels) {
    throw std::invalid_argument(std::string(op) + ": bias " + bias.shape_string() +
                                " does not match out_channels " +
                                std::to_string(spec.out_channels));
  }
}

}  // namespace

std::size_t conv_out_size(std::size_t n, std::size_t m, std::size_t stride, std::size_t pad) {
  if (stride == 0) throw std::invalid_argument("conv_out_size: stride must be positive");
  if (n + 2 * pad < m) {
    throw std::invalid_argument("conv_out_size: filter size " + std::to_string(m) +
                                " exceeds padded input " + std::to_string(n + 2 * pad) +
                                " (n=" + std::to_string(n) + ", padding=" + std::to_string(pad) +
                                ")");
  }
  return (n + 2 * pad - m) / stride + 1;
}

std::size_t deconv_out_size(std::size_t n, std::size_t m, std::size_t stride, std::size_t pad) {
  if (stride == 0) throw std::invalid_argument("deconv_out_size: stride must be positive");
  const std::size_t grown = (n - 1) * stride + m;
  if (grown <= 2 * pad) {
    throw std::invalid_argument("deconv_out_size: padding " + std::to_string(pad) +
                                " consumes the whole output (n=" + std::to_string(n) +
                                ", m=" + std::to_string(m) + ")");
  }
  return grown - 2 * pad;
}

Tensor conv2d(const Tensor& input, const Tensor& filters, const Tensor& bias,
              const ConvSpec& spec) {
  check_conv_args(input, filters, bias, spec, false);
  const std::size_t m = spec.filter_size, s = spec.stride, p = spec.padding;
  const std::size_t ch_in = spec.in_channels, ch_out = spec.out_channels;
  const std::size_t in_h = input.dim(1), in_w = input.dim(2);
  const std::size_t out_h = conv_out_size(in_h, m, s, p);
  const std::size_t out_w = conv_out_size(in_w, m, s, p);

  Tensor out({ch_out, out_h, out_w});
  const double* in = input.data();
  const double* f = filters.data();
  double* o = out.data();

  for (std::size_t co = 0; co < ch_out; ++co) {
    double* oplane = o + co * out_h * out_w;
    const double b = bias[co];
    for (std::size_t i = 0; i < out_h * out_w; ++i) oplane[i] = b;
    for (std::size_t ci = 0; ci < ch_in; ++ci) {
      const double* iplane = in + ci * in_h * in_w;
      const double* fbank = f + (co * ch_in + ci) * m * m;
      for (std::size_t u = 0; u < m; ++u) {
        const std::size_t i_lo = lo_index(u, s, p);
        const std::size_t i_hi = hi_index(u, s, p, in_h, out_h);
        for (std::size_t v = 0; v < m; ++v) {
          const double w = fbank[u * m + v];
          if (w == 0.0) continue;
          const std::size_t j_lo = lo_index(v, s, p);
          const std::size_t j_hi = hi_index(v, s, p, in_w, out_w);
          for (std::size_t i = i_lo; i < i_hi; ++i) {
            const double* irow = iplane + (i * s + u - p) * in_w;
            double* orow = oplane + i * out_w;
            for (std::size_t j = j_lo; j < j_hi; ++j) {
              orow[j] += w * irow[j * s + v - p];
            }
          }
        }
      }
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& grad_out, const Tensor& saved_input,
                          const Tensor& filters, const ConvSpec& spec) {
  Tensor bias({spec.out_channels});
  check_conv_args(saved_input, filters, bias, spec, false);
  const std::size_t m = spec.filter_size, s = spec.stride, p = spec.padding;
  const std::size_t ch_in = spec.in_channels, ch_out = spec.out_channels;
  const std::size_t in_h = saved_input.dim(1), in_w = saved_input.dim(2);
  const std::size_t out_h = conv_out_size(in_h, m, s, p);
  const std::size_t out_w = conv_out_size(in_w, m, s, p);
  if (grad_out.rank() != 3 || grad_out.dim(0) != ch_out || grad_out.dim(1) != out_h ||
      grad_out.dim(2) != out_w) {
    throw std::invalid_argument("conv2d_backward: grad_out " + grad_out.shape_string() +
                                " does not match forward output " +
                                shape_to_string({ch_out, out_h, out_w}));
  }

  ConvGrads grads{Tensor(saved_input.shape()), Tensor(filters.shape()), Tensor(bias.shape())};
  const double* in = saved_input.data();
  const double* f = filters.data();
  const double* g = grad_out.data();

  for (std::size_t co = 0; co < ch_out; ++co) {
    const double* gplane = g + co * out_h * out_w;
    double acc = 0.0;
    for (std::size_t i = 0; i < out_h * out_w; ++i) acc += gplane[i];
    grads.bias[co] = acc;
    for (std::size_t ci = 0; ci < ch_in; ++ci) {
      const double* iplane = in + ci * in_h * in_w;
      double* giplane = grads.input.data() + ci * in_h * in_w;
      const double* fbank = f + (co * ch_in + ci) * m * m;
      double* gfbank = grads.filters.data() + (co * ch_in + ci) * m * m;
      for (std::size_t u = 0; u < m; ++u) {
        const std::size_t i_lo = lo_index(u, s, p);
        const std::size_t i_hi = hi_index(u, s, p, in_h, out_h);
        for (std::size_t v = 0; v < m; ++v) {
          const double w = fbank[u * m + v];
          const std::size_t j_lo = lo_index(v, s, p);
          const std::size_t j_hi = hi_index(v, s, p, in_w, out_w);
          double wsum = 0.0;
          for (std::size_t i = i_lo; i < i_hi; ++i) {
            const double* irow = iplane + (i * s + u - p) * in_w;
            double* girow = giplane + (i * s + u - p) * in_w;
            const double* grow = gplane + i * out_w;
            for (std::size_t j = j_lo; j < j_hi; ++j) {
              const double gval = grow[j];
              wsum += gval * irow[j * s + v - p];
              girow[j * s + v - p] += w * gval;
            }
          }
          gfbank[u * m + v] += wsum;
        }
      }
    }
  }
  return grads;
}

Tensor deconv2d(const Tensor& input, const Tensor& filters, const Tensor& bias,
                const ConvSpec& spec) {
  check_conv_args(input, filters, bias, spec, true);
  const std::size_t m = spec.filter_size, s = spec.stride, p = spec.padding;
  const std::size_t ch_in = spec.in_channels, ch_out = spec.out_channels;
  const std::size_t in_h = input.dim(1), in_w = input.dim(2);
  const std::size_t out_h = deconv_out_size(in_h, m, s, p);
  const std::size_t out_w = deconv_out_size(in_w, m, s, p);

  Tensor out({ch_out, out_h, out_w});
  const double* in = input.data();
  const double* f = filters.data();

  for (std::size_t k = 0; k < ch_out; ++k) {
    double* oplane = out.data() + k * out_h * out_w;
    const double b = bias[k];
    for (std::size_t i = 0; i < out_h * out_w; ++i) oplane[i] = b;
  }
  for (std::size_t c = 0; c < ch_in; ++c) {
    const double* iplane = in + c * in_h * in_w;
    for (std::size_t k = 0; k < ch_out; ++k) {
      double* oplane = out.data() + k * out_h * out_w;
      const double* fbank = f + (c * ch_out + k) * m * m;
      for (std::size_t u = 0; u < m; ++u) {
        // scatter rows: y = i*s + u - p must land inside [0, out_h)
        const std::size_t i_lo = lo_index(u, s, p);
        const std::size_t i_hi = hi_index(u, s, p, out_h, in_h);
        for (std::size_t v = 0; v < m; ++v) {
          const double w = fbank[u * m + v];
          if (w == 0.0) continue;
          const std::size_t j_lo = lo_index(v, s, p);
          const std::size_t j_hi = hi_index(v, s, p, out_w, in_w);
          for (std::size_t i = i_lo; i < i_hi; ++i) {
            const double* irow = iplane + i * in_w;
            double* orow = oplane + (i * s + u - p) * out_w;
            for (std::size_t j = j_lo; j < j_hi; ++j) {
              orow[j * s + v - p] += w * irow[j];
            }
          }
        }
      }
    }
  }
  return out;
}

ConvGrads deconv2d_backward(const Tensor& grad_out, const Tensor& saved_input,
                            const Tensor& filters, const ConvSpec& spec) {
  Tensor bias({spec.out_channels});
  check_conv_args(saved_input, filters, bias, spec, true);
  const std::size_t m = spec.filter_size, s = spec.stride, p = spec.padding;
  const std::size_t ch_in = spec.in_channels, ch_out = spec.out_channels;
  const std::size_t in_h = saved_input.dim(1), in_w = saved_input.dim(2);
  const std::size_t out_h = deconv_out_size(in_h, m, s, p);
  const std::size_t out_w = deconv_out_size(in_w, m, s, p);
  if (grad_out.rank() != 3 || grad_out.dim(0) != ch_out || grad_out.dim(1) != out_h ||
      grad_out.dim(2) != out_w) {
    throw std::invalid_argument("deconv2d_backward: grad_out " + grad_out.shape_string() +
                                " does not match forward output " +
                                shape_to_string({ch_out, out_h, out_w}));
  }

  ConvGrads grads{Tensor(saved_input.shape()), Tensor(filters.shape()), Tensor(bias.shape())};
  const double* in = saved_input.data();
  const double* f = filters.data();
  const double* g = grad_out.data();

  for (std::size_t k = 0; k < ch_out; ++k) {
    const double* gplane = g + k * out_h * out_w;
    double acc = 0.0;
    for (std::size_t i = 0; i < out_h * out_w; ++i) acc += gplane[i];
    grads.bias[k] = acc;
  }
  for (std::size_t c = 0; c < ch_in; ++c) {
    const double* iplane = in + c * in_h * in_w;
    double* giplane = grads.input.data() + c * in_h * in_w;
    for (std::size_t k = 0; k < ch_out; ++k) {
      const double* gplane = g + k * out_h * out_w;
      const double* fbank = f + (c * ch_out + k) * m * m;
      double* gfbank = grads.filters.data() + (c * ch_out + k) * m * m;
      for (std::size_t u = 0; u < m; ++u) {
        const std::size_t i_lo = lo_index(u, s, p);
        const std::size_t i_hi = hi_index(u, s, p, out_h, in_h);
        for (std::size_t v = 0; v < m; ++v) {
          const double w = fbank[u * m + v];
          const std::size_t j_lo = lo_index(v, s, p);
          const std::size_t j_hi = hi_index(v, s, p, out_w, in_w);
          double wsum = 0.0;
          for (std::size_t i = i_lo; i < i_hi; ++i) {
            const double* irow = iplane + i * in_w;
            double* girow = giplane + i * in_w;
            const double* grow = gplane + (i * s + u - p) * out_w;
            for (std::size_t j = j_lo; j < j_hi; ++j) {
              const double gval = grow[j * s + v - p];
              wsum += gval * irow[j];
              girow[j] += w * gval;
            }
          }
          gfbank[u * m + v] += wsum;
        }
      }
    }
  }
  return grads;
}

Tensor activation(const Tensor& input, Activation kind) {
  Tensor out(input.shape());
  const double* x = input.data();
  double* y = out.data();
  const std::size_t n = input.size();
  if (kind == Activation::kTanh) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x[i];
      // split form avoids overflow in exp for large |v|
      y[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
  }
  return out;
}

Tensor activation_backward(const Tensor& grad_out, const Tensor& output, Activation kind) {
  require_same_shape(grad_out, output, "activation_backward");
  Tensor grad(grad_out.shape());
  const double* g = grad_out.data();
  const double* y = output.data();
  double* d = grad.data();
  const std::size_t n = grad_out.size();
  if (kind == Activation::kTanh) {
    for (std::size_t i = 0; i < n; ++i) d[i] = g[i] * (1.0 - y[i] * y[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) d[i] = g[i] * y[i] * (1.0 - y[i]);
  }
  return grad;
}

}  // namespace stae
