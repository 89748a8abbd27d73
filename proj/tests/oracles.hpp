#pragma once

// Test-only oracles. Everything here recomputes expected values through an
// independent code path (straight-line arithmetic, enumeration, Monte
// Carlo) and must never call into the implementation it checks.

#include <cmath>
#include <vector>

#include "evlogic/event.hpp"
#include "evlogic/mlp.hpp"
#include "evlogic/tensor.hpp"

namespace oracles {

// Straight-line recomputation of the two affine maps with tanh between,
// using plain loops over raw vectors.
inline std::vector<double> mlp_by_hand(const evlogic::Mlp& net,
                                       const std::vector<double>& input) {
  const std::size_t in = net.w1.cols;
  const std::size_t hidden = net.w1.rows;
  const std::size_t out = net.w2.rows;
  std::vector<double> h(hidden, 0.0);
  for (std::size_t r = 0; r < hidden; ++r) {
    double acc = net.b1.data[r];
    for (std::size_t c = 0; c < in; ++c) acc += net.w1.data[r * in + c] * input[c];
    h[r] = std::tanh(acc);
  }
  std::vector<double> y(out, 0.0);
  for (std::size_t r = 0; r < out; ++r) {
    double acc = net.b2.data[r];
    for (std::size_t c = 0; c < hidden; ++c) acc += net.w2.data[r * hidden + c] * h[c];
    y[r] = acc;
  }
  return y;
}

inline double sigmoid_by_hand(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Semantic edge score recomputed scalar by scalar.
inline double semantic_score_by_hand(const evlogic::Mlp& head,
                                     const std::vector<double>& va,
                                     const std::vector<double>& vb,
                                     const std::vector<double>& ez) {
  std::vector<double> input;
  input.insert(input.end(), va.begin(), va.end());
  input.insert(input.end(), vb.begin(), vb.end());
  input.insert(input.end(), ez.begin(), ez.end());
  return sigmoid_by_hand(mlp_by_hand(head, input)[0]);
}

// Sample mean and variance.
struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;
};

inline MeanVar mean_var(const std::vector<double>& xs) {
  MeanVar mv;
  for (double x : xs) mv.mean += x;
  mv.mean /= xs.size();
  for (double x : xs) mv.variance += (x - mv.mean) * (x - mv.mean);
  mv.variance /= xs.size() > 1 ? (xs.size() - 1) : 1;
  return mv;
}

}  // namespace oracles
