#pragma once

// Independent reference implementations used only by tests. Each oracle is a
// deliberately naive reformulation of the operation it checks and must stay
// decoupled from the library's implementation path.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "stae/tensor.hpp"

namespace oracle {

// Relative error with a small floor so near-zero gradients are compared
// absolutely instead of dividing by noise.
inline double rel_err(double a, double b) {
  const double denom = std::max({std::fabs(a), std::fabs(b), 1e-3});
  return std::fabs(a - b) / denom;
}

inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_err(a[i], b[i]));
  return worst;
}

// Plain patch-by-patch convolution: pads explicitly, then takes dot products.
inline stae::Tensor conv2d_naive(const stae::Tensor& input, const stae::Tensor& filters,
                                 const stae::Tensor& bias, std::size_t stride, std::size_t pad) {
  const std::size_t ch_in = input.dim(0), in_h = input.dim(1), in_w = input.dim(2);
  const std::size_t ch_out = filters.dim(0), m = filters.dim(2);
  stae::Tensor padded({ch_in, in_h + 2 * pad, in_w + 2 * pad});
  for (std::size_t c = 0; c < ch_in; ++c)
    for (std::size_t i = 0; i < in_h; ++i)
      for (std::size_t j = 0; j < in_w; ++j) padded.at(c, i + pad, j + pad) = input.at(c, i, j);
  const std::size_t out_h = (in_h + 2 * pad - m) / stride + 1;
  const std::size_t out_w = (in_w + 2 * pad - m) / stride + 1;
  stae::Tensor out({ch_out, out_h, out_w});
  for (std::size_t co = 0; co < ch_out; ++co)
    for (std::size_t i = 0; i < out_h; ++i)
      for (std::size_t j = 0; j < out_w; ++j) {
        double acc = bias[co];
        for (std::size_t ci = 0; ci < ch_in; ++ci)
          for (std::size_t u = 0; u < m; ++u)
            for (std::size_t v = 0; v < m; ++v)
              acc += filters.at(co, ci, u, v) * padded.at(ci, i * stride + u, j * stride + v);
        out.at(co, i, j) = acc;
      }
  return out;
}

// Central finite differences of a scalar function with respect to one tensor.
inline stae::Tensor finite_difference(stae::Tensor& param, const std::function<double()>& loss,
                                      double step = 1e-5) {
  stae::Tensor grad(param.shape());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double saved = param[i];
    param[i] = saved + step;
    const double up = loss();
    param[i] = saved - step;
    const double down = loss();
    param[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

// Scalar-loop LSTM step: gates over the concatenation [h_prev, x].
struct FcLstmOracleOut {
  std::vector<double> h, c;
};

inline FcLstmOracleOut fc_lstm_naive(const std::vector<double>& x, const std::vector<double>& h_prev,
                                     const std::vector<double>& c_prev,
                                     const std::vector<std::vector<double>>& wf,
                                     const std::vector<std::vector<double>>& wi,
                                     const std::vector<std::vector<double>>& wc,
                                     const std::vector<std::vector<double>>& wo,
                                     const std::vector<double>& bf, const std::vector<double>& bi,
                                     const std::vector<double>& bc, const std::vector<double>& bo) {
  const std::size_t k = h_prev.size();
  std::vector<double> concat(h_prev);
  concat.insert(concat.end(), x.begin(), x.end());
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  auto affine = [&](const std::vector<std::vector<double>>& w, const std::vector<double>& b,
                    std::size_t row) {
    double acc = b[row];
    for (std::size_t j = 0; j < concat.size(); ++j) acc += w[row][j] * concat[j];
    return acc;
  };
  FcLstmOracleOut out;
  out.h.resize(k);
  out.c.resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    const double f = sig(affine(wf, bf, r));
    const double i = sig(affine(wi, bi, r));
    const double chat = std::tanh(affine(wc, bc, r));
    const double c = f * c_prev[r] + i * chat;
    const double o = sig(affine(wo, bo, r));
    out.c[r] = c;
    out.h[r] = o * std::tanh(c);
  }
  return out;
}

// Exhaustive 1D persistence: the barrier of a local minimum is the smallest
// path maximum to any strictly deeper point; its persistence is barrier-value.
// Ties are broken by index so every value is effectively distinct.
struct MinimumOracle {
  std::size_t index;
  double value;
  double persistence;  // +inf for the global minimum
};

inline bool less_by_value(const std::vector<double>& s, std::size_t a, std::size_t b) {
  return s[a] < s[b] || (s[a] == s[b] && a < b);
}

inline std::vector<MinimumOracle> persistence_naive(const std::vector<double>& s) {
  const std::size_t n = s.size();
  std::vector<MinimumOracle> out;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(less_by_value(s, i, i - 1) && less_by_value(s, i, i + 1))) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!less_by_value(s, j, i)) continue;
      double barrier = -std::numeric_limits<double>::infinity();
      const auto [lo, hi] = std::minmax(i, j);
      for (std::size_t t = lo; t <= hi; ++t) barrier = std::max(barrier, s[t]);
      best = std::min(best, barrier);
    }
    const double persistence =
        std::isinf(best) ? std::numeric_limits<double>::infinity() : best - s[i];
    out.push_back({i, s[i], persistence});
  }
  return out;
}

// AUC as the probability a random positive outscores a random negative,
// counting ties as half.
inline double auc_pairwise(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Exhaustive event/truth matching: a detection is true when its representative
// frame lies in some not-yet-claimed truth interval.
struct EventCountOracle {
  std::size_t hits = 0, false_alarms = 0, missed = 0;
};

inline EventCountOracle count_events_naive(const std::vector<std::size_t>& representatives,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& truth) {
  EventCountOracle out;
  std::vector<bool> claimed(truth.size(), false);
  for (std::size_t rep : representatives) {
    bool matched = false;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      if (rep >= truth[t].first && rep <= truth[t].second) {
        matched = true;
        if (!claimed[t]) {
          claimed[t] = true;
          ++out.hits;
        }
        break;
      }
    }
    if (!matched) ++out.false_alarms;
  }
  for (bool c : claimed)
    if (!c) ++out.missed;
  return out;
}

}  // namespace oracle
