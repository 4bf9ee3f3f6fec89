#pragma once

#include <cstddef>
#include <vector>

#include "stae/conv.hpp"
#include "stae/tensor.hpp"

namespace stae {

/// How the previous cell state reaches the f/i/o gates when peepholes are on:
/// kConcat stacks it as extra input channels to the gate convolutions,
/// kElementwise adds a learned Hadamard term instead.
enum class PeepholeStyle { kConcat, kElementwise };

/// One cell's trainable parameters. Matrices [hidden, hidden+input] for the
/// fully connected cell; filter banks [hidden, C_gate, m, m] for the
/// convolutional cell. p_f/p_i/p_o are the elementwise peephole maps and stay
/// empty unless that style is selected.
struct LstmParams {
  Tensor w_f, w_i, w_c, w_o;
  Tensor b_f, b_i, b_c, b_o;
  Tensor p_f, p_i, p_o;
};

struct LstmState {
  Tensor h, c;
};

struct LstmGrads {
  Tensor w_f, w_i, w_c, w_o;
  Tensor b_f, b_i, b_c, b_o;
  Tensor p_f, p_i, p_o;
};

LstmGrads make_zero_grads(const LstmParams& p);

// ---------------------------------------------------------------------------
// Fully connected cell

LstmState fc_lstm_step(const Tensor& x, const LstmState& prev, const LstmParams& p);

struct FcLstmCache {
  std::vector<Tensor> x, f, i, chat, o, tanh_c;
  std::vector<Tensor> h, c;  // T+1 entries; index 0 holds the initial state
};

/// Unrolls the cell over xs from zero initial state, returning h_1..h_T.
std::vector<Tensor> fc_lstm_forward(const std::vector<Tensor>& xs, const LstmParams& p,
                                    FcLstmCache* cache = nullptr);

/// Backpropagation through time; returns the gradient for each input step and
/// accumulates parameter gradients into `grads`.
std::vector<Tensor> fc_lstm_backward(const FcLstmCache& cache, const LstmParams& p,
                                     const std::vector<Tensor>& grad_h, LstmGrads* grads);

// ---------------------------------------------------------------------------
// Convolutional cell

struct ConvLstmSpec {
  std::size_t in_channels = 1;
  std::size_t hidden_channels = 1;
  std::size_t kernel = 3;  // odd, so "same" padding keeps the state size fixed
  std::size_t stride = 1;  // anything else is rejected: state shape must hold
  bool peephole = true;
  PeepholeStyle style = PeepholeStyle::kConcat;
};

/// Channels seen by a gate convolution: [h, x] plus the cell state for the
/// f/i/o gates under concat peepholes.
std::size_t gate_in_channels(const ConvLstmSpec& spec, bool gate_sees_cell);

LstmState conv_lstm_step(const Tensor& x, const LstmState& prev, const LstmParams& p,
                         const ConvLstmSpec& spec);

struct ConvLstmLayer {
  ConvLstmSpec spec;
  LstmParams params;
};

struct ConvLstmCache {
  std::vector<Tensor> x, f, i, chat, o, tanh_c;
  std::vector<Tensor> h, c;  // T+1 entries
};

std::vector<Tensor> conv_lstm_layer_forward(const ConvLstmLayer& layer,
                                            const std::vector<Tensor>& xs,
                                            ConvLstmCache* cache = nullptr);

std::vector<Tensor> conv_lstm_layer_backward(const ConvLstmLayer& layer, const ConvLstmCache& cache,
                                             const std::vector<Tensor>& grad_h, LstmGrads* grads);

/// Runs a stack of layers left to right in time from zero initial states and
/// returns the top layer's hidden sequence.
std::vector<Tensor> conv_lstm_sequence(const std::vector<Tensor>& inputs,
                                       const std::vector<ConvLstmLayer>& layers);

}  // namespace stae
