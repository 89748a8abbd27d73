#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "evlogic/rng.hpp"
#include "evlogic/tensor.hpp"

namespace evlogic {

// Named mutable view over one parameter tensor's storage. The registry of
// views is what the optimizer, checkpointing and gradient checks operate on.
struct ParamView {
  std::string name;
  double* data = nullptr;
  std::size_t size = 0;
};

inline ParamView view_of(const std::string& name, Vec& v) {
  return {name, v.data.data(), v.size()};
}

inline ParamView view_of(const std::string& name, Mat& m) {
  return {name, m.data.data(), m.data.size()};
}

// Two affine layers with a tanh between them:
//   h = tanh(w1 x + b1),  y = w2 h + b2
struct Mlp {
  Mat w1;  // hidden x in
  Vec b1;  // hidden
  Mat w2;  // out x hidden
  Vec b2;  // out

  Mlp() = default;
  Mlp(std::size_t in, std::size_t hidden, std::size_t out)
      : w1(hidden, in), b1(hidden), w2(out, hidden), b2(out) {}

  std::size_t in_width() const { return w1.cols; }
  std::size_t hidden_width() const { return w1.rows; }
  std::size_t out_width() const { return w2.rows; }

  void init(Rng& rng, double scale) {
    for (double& x : w1.data) x = scale * rng.normal();
    for (double& x : b1.data) x = 0.0;
    for (double& x : w2.data) x = scale * rng.normal();
    for (double& x : b2.data) x = 0.0;
  }

  void collect_params(const std::string& prefix, std::vector<ParamView>& out) {
    out.push_back(view_of(prefix + ".w1", w1));
    out.push_back(view_of(prefix + ".b1", b1));
    out.push_back(view_of(prefix + ".w2", w2));
    out.push_back(view_of(prefix + ".b2", b2));
  }
};

// Activation record of one forward call; suffices for an exact backward.
struct MlpCache {
  Vec input;
  Vec hidden;  // post-tanh
};

inline Vec mlp_forward(const Mlp& net, const Vec& input, MlpCache* cache = nullptr) {
  require(input.size() == net.in_width(), "mlp_forward: input width mismatch");
  Vec pre = matvec(net.w1, input);
  for (std::size_t i = 0; i < pre.size(); ++i) pre[i] = std::tanh(pre[i] + net.b1[i]);
  Vec out = matvec(net.w2, pre);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += net.b2[i];
  if (cache) {
    cache->input = input;
    cache->hidden = pre;
  }
  return out;
}

// Gradient accumulator shaped like an Mlp. Callers zero it once and
// accumulate over many backward calls.
struct MlpGrads {
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;

  MlpGrads() = default;
  explicit MlpGrads(const Mlp& net)
      : w1(net.w1.rows, net.w1.cols),
        b1(net.b1.size()),
        w2(net.w2.rows, net.w2.cols),
        b2(net.b2.size()) {}
};

// Accumulates exact gradients of the forward map into `grads` and returns
// the gradient with respect to the input.
inline Vec mlp_backward(const Mlp& net, const MlpCache& cache,
                        const Vec& upstream, MlpGrads& grads) {
  require(cache.input.size() == net.in_width() &&
              cache.hidden.size() == net.hidden_width(),
          "mlp_backward: stale or mismatched cache");
  require(upstream.size() == net.out_width(), "mlp_backward: upstream width mismatch");

  // y = w2 h + b2
  axpy(1.0, upstream, grads.b2);
  add_outer(grads.w2, upstream, cache.hidden);
  Vec dh = matvec_t(net.w2, upstream);

  // h = tanh(pre), dpre = (1 - h^2) dh
  Vec dpre(dh.size());
  for (std::size_t i = 0; i < dh.size(); ++i)
    dpre[i] = (1.0 - cache.hidden[i] * cache.hidden[i]) * dh[i];

  axpy(1.0, dpre, grads.b1);
  add_outer(grads.w1, dpre, cache.input);
  return matvec_t(net.w1, dpre);
}

}  // namespace evlogic
