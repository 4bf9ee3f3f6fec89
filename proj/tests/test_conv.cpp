#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stae/conv.hpp"
#include "stae/rng.hpp"

using stae::Activation;
using stae::ConvSpec;
using stae::Tensor;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, stae::Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("output size rule") {
  CHECK(stae::conv_out_size(227, 11, 1, 0) == 217);  // (n-m+1) at stride 1
  CHECK(stae::conv_out_size(227, 11, 4, 0) == 55);
  CHECK(stae::conv_out_size(55, 5, 2, 0) == 26);
  CHECK(stae::conv_out_size(26, 3, 1, 1) == 26);
  CHECK_THROWS_AS(stae::conv_out_size(4, 7, 1, 1), std::invalid_argument);

  CHECK(stae::deconv_out_size(217, 11, 1, 0) == 227);
  CHECK(stae::deconv_out_size(26, 5, 2, 0) == 55);
  CHECK(stae::deconv_out_size(55, 11, 4, 0) == 227);
}

TEST_CASE("size law holds over random accepted tuples") {
  stae::Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    const std::size_t m = 1 + rng.below(12);
    const std::size_t s = 1 + rng.below(4);
    const std::size_t p = rng.below(4);
    if (n + 2 * p < m) {
      CHECK_THROWS_AS(stae::conv_out_size(n, m, s, p), std::invalid_argument);
      continue;
    }
    const std::size_t expected = (n + 2 * p - m) / s + 1;
    CHECK(stae::conv_out_size(n, m, s, p) == expected);

    Tensor input({1, n, n});
    Tensor filters({1, 1, m, m});
    Tensor bias({1});
    const Tensor out =
        stae::conv2d(input, filters, bias, ConvSpec{m, s, 1, 1, p});
    CHECK(out.dim(1) == expected);
    CHECK(out.dim(2) == expected);
  }
}

TEST_CASE("ascending 4x4 input with all-ones 3x3 filter") {
  Tensor input({1, 4, 4});
  for (std::size_t i = 0; i < 16; ++i) input[i] = static_cast<double>(i + 1);
  Tensor filters = Tensor::full({1, 1, 3, 3}, 1.0);
  Tensor bias({1});
  const Tensor out = stae::conv2d(input, filters, bias, ConvSpec{3, 1, 1, 1, 0});
  // frozen from the patch-dot-product oracle
  CHECK(out.at(0, 0, 0) == 54.0);
  CHECK(out.at(0, 0, 1) == 63.0);
  CHECK(out.at(0, 1, 0) == 90.0);
  CHECK(out.at(0, 1, 1) == 99.0);
  const Tensor ref = oracle::conv2d_naive(input, filters, bias, 1, 0);
  CHECK(out.values() == ref.values());
}

TEST_CASE("1x1 unit filter is the identity for conv and deconv") {
  stae::Rng rng(7);
  Tensor input = random_tensor({1, 5, 5}, rng);
  Tensor filters = Tensor::full({1, 1, 1, 1}, 1.0);
  Tensor bias({1});
  const ConvSpec spec{1, 1, 1, 1, 0};
  CHECK(stae::conv2d(input, filters, bias, spec).values() == input.values());
  CHECK(stae::deconv2d(input, filters, bias, spec).values() == input.values());
}

TEST_CASE("forward matches the naive oracle on random shapes") {
  stae::Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t ci = 1 + rng.below(3), co = 1 + rng.below(3);
    const std::size_t m = 1 + rng.below(4);
    const std::size_t s = 1 + rng.below(3);
    const std::size_t p = rng.below(3);
    std::size_t n = m + rng.below(6);
    if (n + 2 * p < m) n = m;
    Tensor input = random_tensor({ci, n, n}, rng);
    Tensor filters = random_tensor({co, ci, m, m}, rng);
    Tensor bias = random_tensor({co}, rng);
    const Tensor got = stae::conv2d(input, filters, bias, ConvSpec{m, s, ci, co, p});
    const Tensor ref = oracle::conv2d_naive(input, filters, bias, s, p);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv2d rejects mismatched shapes with a diagnostic") {
  Tensor input({2, 4, 4});
  Tensor filters({1, 3, 3, 3});
  Tensor bias({1});
  CHECK_THROWS_WITH_AS(stae::conv2d(input, filters, bias, ConvSpec{3, 1, 3, 1, 0}),
                       doctest::Contains("channels"), std::invalid_argument);
  Tensor big_filter({1, 2, 7, 7});
  CHECK_THROWS_AS(stae::conv2d(input, big_filter, bias, ConvSpec{7, 1, 2, 1, 0}),
                  std::invalid_argument);
}

TEST_CASE("conv gradients match central finite differences") {
  stae::Rng rng(99);
  Tensor input = random_tensor({2, 5, 5}, rng);
  Tensor filters = random_tensor({3, 2, 3, 3}, rng);
  Tensor bias = random_tensor({3}, rng);
  const ConvSpec spec{3, 1, 2, 3, 0};
  Tensor grad_out = random_tensor({3, 3, 3}, rng);

  const auto loss = [&] { return stae::dot(grad_out, stae::conv2d(input, filters, bias, spec)); };
  const auto grads = stae::conv2d_backward(grad_out, input, filters, spec);

  const Tensor fd_input = oracle::finite_difference(input, loss);
  const Tensor fd_filters = oracle::finite_difference(filters, loss);
  const Tensor fd_bias = oracle::finite_difference(bias, loss);
  CHECK(oracle::max_rel_err(grads.input.values(), fd_input.values()) <= 1e-4);
  CHECK(oracle::max_rel_err(grads.filters.values(), fd_filters.values()) <= 1e-4);
  CHECK(oracle::max_rel_err(grads.bias.values(), fd_bias.values()) <= 1e-4);
}

TEST_CASE("strided padded conv gradients match finite differences") {
  stae::Rng rng(123);
  Tensor input = random_tensor({1, 6, 6}, rng);
  Tensor filters = random_tensor({2, 1, 3, 3}, rng);
  Tensor bias = random_tensor({2}, rng);
  const ConvSpec spec{3, 2, 1, 2, 1};
  Tensor grad_out({2, 3, 3});
  for (std::size_t i = 0; i < grad_out.size(); ++i) grad_out[i] = rng.uniform(-1, 1);

  const auto loss = [&] { return stae::dot(grad_out, stae::conv2d(input, filters, bias, spec)); };
  const auto grads = stae::conv2d_backward(grad_out, input, filters, spec);
  CHECK(oracle::max_rel_err(grads.input.values(),
                            oracle::finite_difference(input, loss).values()) <= 1e-4);
  CHECK(oracle::max_rel_err(grads.filters.values(),
                            oracle::finite_difference(filters, loss).values()) <= 1e-4);
}

TEST_CASE("zero upstream gradient produces zero gradients") {
  Tensor input({1, 4, 4});
  Tensor filters({1, 1, 3, 3});
  input.fill(0.5);
  filters.fill(0.25);
  Tensor grad_out({1, 2, 2});
  const auto grads = stae::conv2d_backward(grad_out, input, filters, ConvSpec{3, 1, 1, 1, 0});
  CHECK(grads.input.sum() == 0.0);
  CHECK(grads.filters.sum() == 0.0);
  CHECK(grads.bias.sum() == 0.0);
}

TEST_CASE("1x1 identity filter passes the gradient straight through") {
  stae::Rng rng(5);
  Tensor input = random_tensor({1, 4, 4}, rng);
  Tensor filters = Tensor::full({1, 1, 1, 1}, 1.0);
  Tensor grad_out = random_tensor({1, 4, 4}, rng);
  const auto grads = stae::conv2d_backward(grad_out, input, filters, ConvSpec{1, 1, 1, 1, 0});
  CHECK(grads.input.values() == grad_out.values());
}

TEST_CASE("deconv is the adjoint of conv under shared filters") {
  stae::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t ci = 1 + rng.below(3), co = 1 + rng.below(3);
    const std::size_t m = 1 + rng.below(4);
    const std::size_t s = 1 + rng.below(3);
    const std::size_t p = rng.below(std::min<std::size_t>(m, 3));
    // choose n so the conv size division is exact and the adjoint shapes line up
    const std::size_t blocks = 1 + rng.below(5);
    const std::size_t n = m + s * (blocks - 1) > 2 * p ? m + s * (blocks - 1) - 2 * p : m;
    if (n + 2 * p < m) continue;
    if ((n + 2 * p - m) % s != 0) continue;

    Tensor a = random_tensor({ci, n, n}, rng);
    Tensor filters = random_tensor({co, ci, m, m}, rng);
    Tensor zero_conv_bias({co});
    Tensor zero_deconv_bias({ci});
    const ConvSpec conv_spec{m, s, ci, co, p};
    const Tensor conv_a = stae::conv2d(a, filters, zero_conv_bias, conv_spec);
    Tensor b = random_tensor(conv_a.shape(), rng);
    const ConvSpec deconv_spec{m, s, co, ci, p};
    const Tensor adj_b = stae::deconv2d(b, filters, zero_deconv_bias, deconv_spec);
    REQUIRE(adj_b.same_shape(a));
    CHECK(std::fabs(stae::dot(conv_a, b) - stae::dot(a, adj_b)) <= 1e-10);
  }
}

TEST_CASE("deconv restores the strided encoder sizes") {
  Tensor x({4, 26, 26});
  Tensor f({4, 2, 5, 5});
  Tensor b({2});
  const Tensor up = stae::deconv2d(x, f, b, ConvSpec{5, 2, 4, 2, 0});
  CHECK(up.dim(1) == 55);
  Tensor f2({2, 1, 11, 11});
  Tensor b2({1});
  const Tensor up2 = stae::deconv2d(up, f2, b2, ConvSpec{11, 4, 2, 1, 0});
  CHECK(up2.dim(1) == 227);
}

TEST_CASE("deconv gradients match finite differences") {
  stae::Rng rng(77);
  Tensor input = random_tensor({2, 4, 4}, rng);
  Tensor filters = random_tensor({2, 3, 3, 3}, rng);
  Tensor bias = random_tensor({3}, rng);
  const ConvSpec spec{3, 2, 2, 3, 1};
  const Tensor out = stae::deconv2d(input, filters, bias, spec);
  Tensor grad_out = random_tensor(out.shape(), rng);

  const auto loss = [&] { return stae::dot(grad_out, stae::deconv2d(input, filters, bias, spec)); };
  const auto grads = stae::deconv2d_backward(grad_out, input, filters, spec);
  CHECK(oracle::max_rel_err(grads.input.values(),
                            oracle::finite_difference(input, loss).values()) <= 1e-4);
  CHECK(oracle::max_rel_err(grads.filters.values(),
                            oracle::finite_difference(filters, loss).values()) <= 1e-4);
  CHECK(oracle::max_rel_err(grads.bias.values(),
                            oracle::finite_difference(bias, loss).values()) <= 1e-4);
}

TEST_CASE("conv is linear in its input with zero bias") {
  stae::Rng rng(13);
  Tensor a = random_tensor({2, 6, 6}, rng);
  Tensor b = random_tensor({2, 6, 6}, rng);
  Tensor filters = random_tensor({3, 2, 3, 3}, rng);
  Tensor bias({3});
  const ConvSpec spec{3, 1, 2, 3, 0};
  Tensor summed = a;
  summed.add(b);
  Tensor lhs = stae::conv2d(summed, filters, bias, spec);
  Tensor rhs = stae::conv2d(a, filters, bias, spec);
  rhs.add(stae::conv2d(b, filters, bias, spec));
  for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(std::fabs(lhs[i] - rhs[i]) <= 1e-10);
}

TEST_CASE("activations hit their fixed points and ranges") {
  Tensor x({5}, {-30.0, -1.0, 0.0, 1.0, 30.0});
  const Tensor s = stae::activation(x, Activation::kSigmoid);
  const Tensor t = stae::activation(x, Activation::kTanh);
  CHECK(s[2] == 0.5);
  CHECK(t[2] == 0.0);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(s[i] > 0.0);
    CHECK(s[i] < 1.0);
    // tanh saturates to exactly +-1.0 in double precision for |x| ~ 19+
    CHECK(t[i] >= -1.0);
    CHECK(t[i] <= 1.0);
  }
  stae::Rng rng(8);
  Tensor moderate = random_tensor({64}, rng, -10.0, 10.0);
  const Tensor tm = stae::activation(moderate, Activation::kTanh);
  for (std::size_t i = 0; i < tm.size(); ++i) {
    CHECK(tm[i] > -1.0);
    CHECK(tm[i] < 1.0);
  }
}

TEST_CASE("activation backward matches finite differences") {
  stae::Rng rng(4);
  Tensor x = random_tensor({10}, rng, -2.0, 2.0);
  Tensor grad_out = random_tensor({10}, rng);
  for (Activation kind : {Activation::kTanh, Activation::kSigmoid}) {
    const Tensor y = stae::activation(x, kind);
    const Tensor analytic = stae::activation_backward(grad_out, y, kind);
    const auto loss = [&] { return stae::dot(grad_out, stae::activation(x, kind)); };
    const Tensor fd = oracle::finite_difference(x, loss);
    CHECK(oracle::max_rel_err(analytic.values(), fd.values()) <= 1e-4);
  }
  // tanh'(0) = 1
  Tensor zero({1});
  Tensor one({1}, {1.0});
  const Tensor y0 = stae::activation(zero, Activation::kTanh);
  CHECK(stae::activation_backward(one, y0, Activation::kTanh)[0] == 1.0);
}
