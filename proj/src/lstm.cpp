#include "stae/lstm.hpp"

#include <stdexcept>
#include <string>

namespace stae {

namespace {

Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }

// y = W * v + b with W [rows, cols], v [cols]
Tensor matvec(const Tensor& w, const Tensor& v, const Tensor& b) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  if (v.size() != cols) {
    throw std::invalid_argument("lstm: weight " + w.shape_string() + " incompatible with input [" +
                                std::to_string(v.size()) + "]");
  }
  Tensor out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* wrow = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += wrow[c] * v[c];
    out[r] = acc;
  }
  return out;
}

// accumulate dW += outer(dz, v), db += dz, dv += W^T dz
void matvec_backward(const Tensor& w, const Tensor& v, const Tensor& dz, Tensor& dw, Tensor& db,
                     Tensor& dv) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dz[r];
    db[r] += g;
    const double* wrow = w.data() + r * cols;
    double* dwrow = dw.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      dwrow[c] += g * v[c];
      dv[c] += wrow[c] * g;
    }
  }
}

Tensor concat_vec(const Tensor& a, const Tensor& b) {
  Tensor out({a.size() + b.size()});
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[a.size() + i] = b[i];
  return out;
}

struct GateOut {
  Tensor f, i, chat, o, tanh_c;
  LstmState next;
};

// shared gate math once the four pre-activations are known
GateOut combine_gates(Tensor zf, Tensor zi, Tensor zc, Tensor zo, const Tensor& c_prev) {
  GateOut g;
  g.f = activation(zf, Activation::kSigmoid);
  g.i = activation(zi, Activation::kSigmoid);
  g.chat = activation(zc, Activation::kTanh);
  g.o = activation(zo, Activation::kSigmoid);
  Tensor c = g.f;
  c.hadamard(c_prev);
  Tensor ic = g.i;
  ic.hadamard(g.chat);
  c.add(ic);
  g.tanh_c = activation(c, Activation::kTanh);
  Tensor h = g.o;
  h.hadamard(g.tanh_c);
  g.next = LstmState{std::move(h), std::move(c)};
  return g;
}

}  // namespace

LstmGrads make_zero_grads(const LstmParams& p) {
  LstmGrads g;
  g.w_f = zeros_like(p.w_f);
  g.w_i = zeros_like(p.w_i);
  g.w_c = zeros_like(p.w_c);
  g.w_o = zeros_like(p.w_o);
  g.b_f = zeros_like(p.b_f);
  g.b_i = zeros_like(p.b_i);
  g.b_c = zeros_like(p.b_c);
  g.b_o = zeros_like(p.b_o);
  if (!p.p_f.empty()) {
    g.p_f = zeros_like(p.p_f);
    g.p_i = zeros_like(p.p_i);
    g.p_o = zeros_like(p.p_o);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Fully connected cell

LstmState fc_lstm_step(const Tensor& x, const LstmState& prev, const LstmParams& p) {
  require_same_shape(prev.h, prev.c, "fc_lstm_step state");
  const Tensor concat = concat_vec(prev.h, x);
  GateOut g = combine_gates(matvec(p.w_f, concat, p.b_f), matvec(p.w_i, concat, p.b_i),
                            matvec(p.w_c, concat, p.b_c), matvec(p.w_o, concat, p.b_o), prev.c);
  return g.next;
}

std::vector<Tensor> fc_lstm_forward(const std::vector<Tensor>& xs, const LstmParams& p,
                                    FcLstmCache* cache) {
  if (xs.empty()) throw std::invalid_argument("fc_lstm_forward: empty sequence");
  const std::size_t hidden = p.b_f.size();
  LstmState state{Tensor({hidden}), Tensor({hidden})};
  std::vector<Tensor> hs;
  hs.reserve(xs.size());
  if (cache) {
    *cache = FcLstmCache{};
    cache->h.push_back(state.h);
    cache->c.push_back(state.c);
  }
  for (const Tensor& x : xs) {
    const Tensor concat = concat_vec(state.h, x);
    GateOut g = combine_gates(matvec(p.w_f, concat, p.b_f), matvec(p.w_i, concat, p.b_i),
                              matvec(p.w_c, concat, p.b_c), matvec(p.w_o, concat, p.b_o), state.c);
    state = g.next;
    hs.push_back(state.h);
    if (cache) {
      cache->x.push_back(x);
      cache->f.push_back(std::move(g.f));
      cache->i.push_back(std::move(g.i));
      cache->chat.push_back(std::move(g.chat));
      cache->o.push_back(std::move(g.o));
      cache->tanh_c.push_back(std::move(g.tanh_c));
      cache->h.push_back(state.h);
      cache->c.push_back(state.c);
    }
  }
  return hs;
}

std::vector<Tensor> fc_lstm_backward(const FcLstmCache& cache, const LstmParams& p,
                                     const std::vector<Tensor>& grad_h, LstmGrads* grads) {
  const std::size_t steps = cache.x.size();
  if (grad_h.size() != steps) {
    throw std::invalid_argument("fc_lstm_backward: grad sequence length mismatch");
  }
  const std::size_t hidden = p.b_f.size();
  const std::size_t input = cache.x[0].size();
  std::vector<Tensor> dx(steps);
  Tensor dh_carry({hidden}), dc_carry({hidden});

  for (std::size_t t = steps; t-- > 0;) {
    Tensor dh = grad_h[t];
    dh.add(dh_carry);
    Tensor dc = dc_carry;

    Tensor dout = dh;
    dout.hadamard(cache.tanh_c[t]);
    Tensor dtc = dh;
    dtc.hadamard(cache.o[t]);
    dc.add(activation_backward(dtc, cache.tanh_c[t], Activation::kTanh));

    Tensor df = dc;
    df.hadamard(cache.c[t]);  // the previous cell state
    Tensor di = dc;
    di.hadamard(cache.chat[t]);
    Tensor dchat = dc;
    dchat.hadamard(cache.i[t]);

    const Tensor dzf = activation_backward(df, cache.f[t], Activation::kSigmoid);
    const Tensor dzi = activation_backward(di, cache.i[t], Activation::kSigmoid);
    const Tensor dzc = activation_backward(dchat, cache.chat[t], Activation::kTanh);
    const Tensor dzo = activation_backward(dout, cache.o[t], Activation::kSigmoid);

    const Tensor concat = concat_vec(cache.h[t], cache.x[t]);
    Tensor dconcat({hidden + input});
    matvec_backward(p.w_f, concat, dzf, grads->w_f, grads->b_f, dconcat);
    matvec_backward(p.w_i, concat, dzi, grads->w_i, grads->b_i, dconcat);
    matvec_backward(p.w_c, concat, dzc, grads->w_c, grads->b_c, dconcat);
    matvec_backward(p.w_o, concat, dzo, grads->w_o, grads->b_o, dconcat);

    for (std::size_t k = 0; k < hidden; ++k) dh_carry[k] = dconcat[k];
    Tensor dxt({input});
    for (std::size_t k = 0; k < input; ++k) dxt[k] = dconcat[hidden + k];
    dx[t] = std::move(dxt);

    dc_carry = dc;
    dc_carry.hadamard(cache.f[t]);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Convolutional cell

std::size_t gate_in_channels(const ConvLstmSpec& spec, bool gate_sees_cell) {
  std::size_t ch = spec.hidden_channels + spec.in_channels;
  if (gate_sees_cell && spec.peephole && spec.style == PeepholeStyle::kConcat) {
    ch += spec.hidden_channels;
  }
  return ch;
}

namespace {

void check_conv_lstm_spec(const ConvLstmSpec& spec) {
  if (spec.stride != 1) {
    throw std::invalid_argument(
        "conv_lstm: stride " + std::to_string(spec.stride) +
        " is not allowed in recurrent connections; the state must keep its size");
  }
  if (spec.kernel % 2 == 0) {
    throw std::invalid_argument("conv_lstm: kernel " + std::to_string(spec.kernel) +
                                " must be odd so the state keeps its size");
  }
}

ConvSpec gate_conv_spec(const ConvLstmSpec& spec, bool gate_sees_cell) {
  return ConvSpec{spec.kernel, 1, gate_in_channels(spec, gate_sees_cell), spec.hidden_channels,
                  (spec.kernel - 1) / 2};
}

struct ConvStepInputs {
  Tensor gate_in;  // [h, x] (+ c under concat peepholes)
  Tensor cand_in;  // [h, x]; the candidate never sees the cell state
};

ConvStepInputs build_step_inputs(const Tensor& x, const LstmState& prev, const ConvLstmSpec& spec) {
  if (x.rank() != 3 || x.dim(0) != spec.in_channels) {
    throw std::invalid_argument("conv_lstm: input " + x.shape_string() + " does not provide " +
                                std::to_string(spec.in_channels) + " channels");
  }
  if (prev.h.dim(1) != x.dim(1) || prev.h.dim(2) != x.dim(2)) {
    throw std::invalid_argument("conv_lstm: state " + prev.h.shape_string() + " and input " +
                                x.shape_string() + " disagree on spatial size");
  }
  ConvStepInputs in;
  in.cand_in = concat_channels({&prev.h, &x});
  if (spec.peephole && spec.style == PeepholeStyle::kConcat) {
    in.gate_in = concat_channels({&prev.h, &x, &prev.c});
  } else {
    in.gate_in = in.cand_in;
  }
  return in;
}

GateOut conv_step_gates(const ConvStepInputs& in, const LstmState& prev, const LstmParams& p,
                        const ConvLstmSpec& spec) {
  const ConvSpec gate_spec = gate_conv_spec(spec, true);
  const ConvSpec cand_spec = gate_conv_spec(spec, false);
  Tensor zf = conv2d(in.gate_in, p.w_f, p.b_f, gate_spec);
  Tensor zi = conv2d(in.gate_in, p.w_i, p.b_i, gate_spec);
  Tensor zc = conv2d(in.cand_in, p.w_c, p.b_c, cand_spec);
  Tensor zo = conv2d(in.gate_in, p.w_o, p.b_o, gate_spec);
  if (spec.peephole && spec.style == PeepholeStyle::kElementwise) {
    Tensor pf = p.p_f;
    pf.hadamard(prev.c);
    zf.add(pf);
    Tensor pi = p.p_i;
    pi.hadamard(prev.c);
    zi.add(pi);
    Tensor po = p.p_o;
    po.hadamard(prev.c);
    zo.add(po);
  }
  return combine_gates(std::move(zf), std::move(zi), std::move(zc), std::move(zo), prev.c);
}

}  // namespace

LstmState conv_lstm_step(const Tensor& x, const LstmState& prev, const LstmParams& p,
                         const ConvLstmSpec& spec) {
  check_conv_lstm_spec(spec);
  const ConvStepInputs in = build_step_inputs(x, prev, spec);
  return conv_step_gates(in, prev, p, spec).next;
}

std::vector<Tensor> conv_lstm_layer_forward(const ConvLstmLayer& layer,
                                            const std::vector<Tensor>& xs, ConvLstmCache* cache) {
  if (xs.empty()) throw std::invalid_argument("conv_lstm: empty sequence");
  check_conv_lstm_spec(layer.spec);
  const std::size_t h = xs[0].dim(1), w = xs[0].dim(2);
  LstmState state{Tensor({layer.spec.hidden_channels, h, w}),
                  Tensor({layer.spec.hidden_channels, h, w})};
  std::vector<Tensor> hs;
  hs.reserve(xs.size());
  if (cache) {
    *cache = ConvLstmCache{};
    cache->h.push_back(state.h);
    cache->c.push_back(state.c);
  }
  for (const Tensor& x : xs) {
    const ConvStepInputs in = build_step_inputs(x, state, layer.spec);
    GateOut g = conv_step_gates(in, state, layer.params, layer.spec);
    state = g.next;
    hs.push_back(state.h);
    if (cache) {
      cache->x.push_back(x);
      cache->f.push_back(std::move(g.f));
      cache->i.push_back(std::move(g.i));
      cache->chat.push_back(std::move(g.chat));
      cache->o.push_back(std::move(g.o));
      cache->tanh_c.push_back(std::move(g.tanh_c));
      cache->h.push_back(state.h);
      cache->c.push_back(state.c);
    }
  }
  return hs;
}

std::vector<Tensor> conv_lstm_layer_backward(const ConvLstmLayer& layer, const ConvLstmCache& cache,
                                             const std::vector<Tensor>& grad_h, LstmGrads* grads) {
  const ConvLstmSpec& spec = layer.spec;
  const LstmParams& p = layer.params;
  const std::size_t steps = cache.x.size();
  if (grad_h.size() != steps) {
    throw std::invalid_argument("conv_lstm_layer_backward: grad sequence length mismatch");
  }
  const bool concat_peep = spec.peephole && spec.style == PeepholeStyle::kConcat;
  const bool elementwise_peep = spec.peephole && spec.style == PeepholeStyle::kElementwise;
  const ConvSpec gate_spec = gate_conv_spec(spec, true);
  const ConvSpec cand_spec = gate_conv_spec(spec, false);
  const std::size_t hidden = spec.hidden_channels, input = spec.in_channels;

  std::vector<Tensor> dx(steps);
  Tensor dh_carry(cache.h[0].shape());
  Tensor dc_carry(cache.c[0].shape());

  for (std::size_t t = steps; t-- > 0;) {
    Tensor dh = grad_h[t];
    dh.add(dh_carry);
    Tensor dc = dc_carry;

    Tensor dout = dh;
    dout.hadamard(cache.tanh_c[t]);
    Tensor dtc = dh;
    dtc.hadamard(cache.o[t]);
    dc.add(activation_backward(dtc, cache.tanh_c[t], Activation::kTanh));

    Tensor df = dc;
    df.hadamard(cache.c[t]);
    Tensor di = dc;
    di.hadamard(cache.chat[t]);
    Tensor dchat = dc;
    dchat.hadamard(cache.i[t]);

    const Tensor dzf = activation_backward(df, cache.f[t], Activation::kSigmoid);
    const Tensor dzi = activation_backward(di, cache.i[t], Activation::kSigmoid);
    const Tensor dzc = activation_backward(dchat, cache.chat[t], Activation::kTanh);
    const Tensor dzo = activation_backward(dout, cache.o[t], Activation::kSigmoid);

    const ConvStepInputs in =
        build_step_inputs(cache.x[t], LstmState{cache.h[t], cache.c[t]}, spec);

    Tensor dgate_in(in.gate_in.shape());
    ConvGrads gf = conv2d_backward(dzf, in.gate_in, p.w_f, gate_spec);
    grads->w_f.add(gf.filters);
    grads->b_f.add(gf.bias);
    dgate_in.add(gf.input);
    ConvGrads gi = conv2d_backward(dzi, in.gate_in, p.w_i, gate_spec);
    grads->w_i.add(gi.filters);
    grads->b_i.add(gi.bias);
    dgate_in.add(gi.input);
    ConvGrads go = conv2d_backward(dzo, in.gate_in, p.w_o, gate_spec);
    grads->w_o.add(go.filters);
    grads->b_o.add(go.bias);
    dgate_in.add(go.input);
    ConvGrads gc = conv2d_backward(dzc, in.cand_in, p.w_c, cand_spec);
    grads->w_c.add(gc.filters);
    grads->b_c.add(gc.bias);

    dh_carry = slice_channels(dgate_in, 0, hidden);
    add_into_channels(dh_carry, 0, slice_channels(gc.input, 0, hidden));
    dx[t] = slice_channels(dgate_in, hidden, input);
    add_into_channels(dx[t], 0, slice_channels(gc.input, hidden, input));

    dc_carry = dc;
    dc_carry.hadamard(cache.f[t]);
    if (concat_peep) {
      dc_carry.add(slice_channels(dgate_in, hidden + input, hidden));
    }
    if (elementwise_peep) {
      Tensor term = dzf;
      term.hadamard(p.p_f);
      dc_carry.add(term);
      term = dzi;
      term.hadamard(p.p_i);
      dc_carry.add(term);
      term = dzo;
      term.hadamard(p.p_o);
      dc_carry.add(term);

      Tensor dpf = dzf;
      dpf.hadamard(cache.c[t]);
      grads->p_f.add(dpf);
      Tensor dpi = dzi;
      dpi.hadamard(cache.c[t]);
      grads->p_i.add(dpi);
      Tensor dpo = dzo;
      dpo.hadamard(cache.c[t]);
      grads->p_o.add(dpo);
    }
  }
  return dx;
}

std::vector<Tensor> conv_lstm_sequence(const std::vector<Tensor>& inputs,
                                       const std::vector<ConvLstmLayer>& layers) {
  if (inputs.empty()) throw std::invalid_argument("conv_lstm_sequence: empty sequence");
  if (layers.empty()) throw std::invalid_argument("conv_lstm_sequence: no layers");
  std::vector<Tensor> current = inputs;
  for (const ConvLstmLayer& layer : layers) {
    current = conv_lstm_layer_forward(layer, current, nullptr);
  }
  return current;
}

}  // namespace stae
