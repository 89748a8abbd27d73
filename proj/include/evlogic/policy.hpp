#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "evlogic/event.hpp"
#include "evlogic/mlp.hpp"
#include "evlogic/rng.hpp"
#include "evlogic/tensor.hpp"

namespace evlogic {

// Autoregressive stochastic policy over chain edges. Each step encodes
// [mean event feature, previous edge encoding, sinusoidal step index] into
// a context vector; three heads score source events, operators (dot product
// against codebook embeddings) and target events, plus a stop logit.
//
// Event keys append the normalized support bounds to the feature so the
// policy can see temporal order: key_j = [v_j, start/T, end/T].
struct PolicyParams {
  Mlp context;   // [d + (2d + dz) + step_enc] -> context_width
  Mat w_src;     // (d + 2) x context_width
  Mat w_tgt;     // (d + 2) x context_width
  Mat w_op;      // dz x context_width
  Vec w_stop;    // context_width
  double b_stop = -1.0;
  int max_len = 12;
  int feature_dim = 0;
  int embed_width = 0;

  static constexpr int kStepEncDim = 8;

  void init(int d, int dz, int context_width, int hidden, Rng& rng,
            double scale = 0.15) {
    feature_dim = d;
    embed_width = dz;
    context = Mlp(d + 2 * d + dz + kStepEncDim, hidden, context_width);
    context.init(rng, scale);
    w_src = Mat(d + 2, context_width);
    w_tgt = Mat(d + 2, context_width);
    w_op = Mat(dz, context_width);
    for (double& x : w_src.data) x = scale * rng.normal();
    for (double& x : w_tgt.data) x = scale * rng.normal();
    for (double& x : w_op.data) x = scale * rng.normal();
    w_stop = Vec(context_width);
    b_stop = -1.0;
  }

  void collect_params(std::vector<ParamView>& out) {
    context.collect_params("policy.context", out);
    out.push_back(view_of("policy.w_src", w_src));
    out.push_back(view_of("policy.w_tgt", w_tgt));
    out.push_back(view_of("policy.w_op", w_op));
    out.push_back(view_of("policy.w_stop", w_stop));
    out.push_back({"policy.b_stop", &b_stop, 1});
  }
};

namespace policy_detail {

inline Vec step_encoding(int step) {
  Vec enc(PolicyParams::kStepEncDim);
  double freq = 1.0;
  for (int i = 0; i < PolicyParams::kStepEncDim / 2; ++i) {
    enc[2 * i] = std::sin(step * freq);
    enc[2 * i + 1] = std::cos(step * freq);
    freq *= 0.1;
  }
  return enc;
}

inline Vec event_key(const Event& e, double t_ref) {
  Vec key(e.feature.size() + 2);
  for (std::size_t i = 0; i < e.feature.size(); ++i) key[i] = e.feature[i];
  key[e.feature.size()] = e.support.start / t_ref;
  key[e.feature.size() + 1] = e.support.end / t_ref;
  return key;
}

inline double time_ref(const std::vector<Event>& events) {
  double t = 1.0;
  for (const Event& e : events) t = std::max(t, e.support.end + 1.0);
  return t;
}

inline Vec masked_softmax(const Vec& logits, const std::vector<bool>& mask) {
  Vec probs(logits.size());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) max_logit = std::max(max_logit, logits[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) {
      probs[i] = std::exp(logits[i] - max_logit);
      total += probs[i];
    }
  }
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) probs[i] /= total;
  return probs;
}

}  // namespace policy_detail

// Duplicate / self-loop bookkeeping for masking. An action (a, z, b) is
// admissible iff b != a and the triple has not been emitted yet; a source
// or operator is admissible iff some admissible completion remains.
class ActionMask {
 public:
  ActionMask(int event_count, int op_count)
      : k_(event_count), m_(op_count) {}

  void add(const ChainEdge& e) { ++used_[{e.src, e.op}]; used_set_.push_back(e); }

  bool target_allowed(int a, int z, int b) const {
    if (b == a) return false;
    for (const ChainEdge& e : used_set_)
      if (e.src == a && e.op == z && e.dst == b) return false;
    return true;
  }

  bool op_allowed(int a, int z) const {
    auto it = used_.find({a, z});
    const int used = it == used_.end() ? 0 : it->second;
    return used < k_ - 1;
  }

  bool source_allowed(int a) const {
    for (int z = 0; z < m_; ++z)
      if (op_allowed(a, z)) return true;
    return false;
  }

  std::vector<bool> source_mask() const {
    std::vector<bool> mask(k_);
    for (int a = 0; a < k_; ++a) mask[a] = source_allowed(a);
    return mask;
  }

  std::vector<bool> op_mask(int a) const {
    std::vector<bool> mask(m_);
    for (int z = 0; z < m_; ++z) mask[z] = op_allowed(a, z);
    return mask;
  }

  std::vector<bool> target_mask(int a, int z) const {
    std::vector<bool> mask(k_);
    for (int b = 0; b < k_; ++b) mask[b] = target_allowed(a, z, b);
    return mask;
  }

 private:
  int k_;
  int m_;
  std::map<std::pair<int, int>, int> used_;
  std::vector<ChainEdge> used_set_;
};

struct StepLogits {
  Vec source;   // K
  Vec op;       // M
  Vec target;   // K
  double stop = 0.0;
};

// Full activation record of one policy step, kept for the REINFORCE
// backward pass.
struct PolicyStepCache {
  MlpCache ctx_cache;
  Vec ctx;
  Vec mean_feature;
  Vec prev_edge_enc;
  int prev_op = -1;  // operator of the previous edge, for embedding grads
  Vec step_enc;
  StepLogits logits;
  Vec src_probs, op_probs, tgt_probs;
  std::vector<bool> src_mask, op_mask, tgt_mask;
  double p_stop = 0.0;
  bool stopped = false;
  bool forced = false;
  int a = -1, z = -1, b = -1;
  Vec relaxed_op;  // Gumbel-softmax weights over operators (training aid)
};

struct SampledChain {
  ReasoningChain chain;
  std::vector<double> step_log_probs;  // one per decision step, stop included
  double total_log_prob = 0.0;
  int stop_step = 0;
  bool forced_stop = false;
  std::vector<PolicyStepCache> caches;          // filled when recording
  std::vector<Vec> relaxed_ops;                 // per edge, over all M ops
};

namespace policy_detail {

inline Vec context_input(const PolicyParams& policy, const std::vector<Event>& events,
                         const ReasoningChain& so_far, const OperatorCodebook& codebook,
                         int step, Vec* mean_out, Vec* prev_out, Vec* enc_out,
                         int* prev_op_out) {
  const int d = policy.feature_dim;
  Vec mean_v(d);
  for (const Event& e : events) axpy(1.0 / events.size(), e.feature, mean_v);
  Vec prev(2 * d + policy.embed_width);
  int prev_op = -1;
  if (!so_far.edges.empty()) {
    const ChainEdge& last = so_far.edges.back();
    prev_op = last.op;
    const Vec& va = events[last.src].feature;
    const Vec& vb = events[last.dst].feature;
    for (int i = 0; i < d; ++i) prev[i] = va[i];
    const Vec ez = codebook.embedding(last.op);
    for (int i = 0; i < policy.embed_width; ++i) prev[d + i] = ez[i];
    for (int i = 0; i < d; ++i) prev[d + policy.embed_width + i] = vb[i];
  }
  Vec enc = step_encoding(step);
  Vec input = concat(mean_v, prev, enc);
  if (mean_out) *mean_out = mean_v;
  if (prev_out) *prev_out = prev;
  if (enc_out) *enc_out = enc;
  if (prev_op_out) *prev_op_out = prev_op;
  return input;
}

}  // namespace policy_detail

// Raw (unmasked) head outputs for one autoregressive step.
inline StepLogits step_logits(const PolicyParams& policy, const std::vector<Event>& events,
                              const ReasoningChain& so_far, const OperatorCodebook& codebook,
                              int step, PolicyStepCache* cache = nullptr) {
  require(step < policy.max_len, "step_logits: step beyond max length");
  require(!events.empty(), "step_logits: no events");
  Vec mean_v, prev, enc;
  int prev_op = -1;
  const Vec input = policy_detail::context_input(policy, events, so_far, codebook, step,
                                                 &mean_v, &prev, &enc, &prev_op);
  MlpCache ctx_cache;
  const Vec ctx = mlp_forward(policy.context, input, &ctx_cache);

  const double t_ref = policy_detail::time_ref(events);
  const Vec q_src = matvec(policy.w_src, ctx);
  const Vec q_tgt = matvec(policy.w_tgt, ctx);
  const Vec q_op = matvec(policy.w_op, ctx);

  StepLogits out;
  out.source = Vec(events.size());
  out.target = Vec(events.size());
  for (std::size_t j = 0; j < events.size(); ++j) {
    const Vec key = policy_detail::event_key(events[j], t_ref);
    out.source[j] = dot(q_src, key);
    out.target[j] = dot(q_tgt, key);
  }
  out.op = Vec(codebook.size());
  for (int m = 0; m < codebook.size(); ++m)
    out.op[m] = dot(q_op, codebook.embedding(m));
  out.stop = dot(policy.w_stop, ctx) + policy.b_stop;

  if (cache) {
    cache->ctx_cache = std::move(ctx_cache);
    cache->ctx = ctx;
    cache->mean_feature = mean_v;
    cache->prev_edge_enc = prev;
    cache->prev_op = prev_op;
    cache->step_enc = enc;
    cache->logits = out;
  }
  return out;
}

namespace policy_detail {

inline std::size_t sample_categorical(const Vec& probs, const std::vector<bool>& mask,
                                      double u) {
  double acc = 0.0;
  std::size_t last_allowed = 0;
  bool any = false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!mask[i]) continue;
    last_allowed = i;
    any = true;
    acc += probs[i];
    if (u < acc) return i;
  }
  require(any, "sample_categorical: fully masked");
  return last_allowed;
}

inline std::size_t argmax_masked(const Vec& values, const std::vector<bool>& mask) {
  std::size_t best = 0;
  double top = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) continue;
    if (!any || values[i] > top) {
      top = values[i];
      best = i;
      any = true;
    }
  }
  require(any, "argmax_masked: fully masked");
  return best;
}

}  // namespace policy_detail

// Draws one chain. Event indices are sampled from plain categoricals.
// Operator selection applies Gumbel noise to the masked log-probabilities
// and takes the argmax — a straight-through categorical sample — while the
// tempered softmax weights over the perturbed logits are recorded for the
// optional soft-embedding path. Log-probs are always recorded under the
// categorical distribution, which is what REINFORCE differentiates.
inline SampledChain sample_chain(const PolicyParams& policy, const std::vector<Event>& events,
                                 const OperatorCodebook& codebook, Rng& rng,
                                 double temperature, bool record_caches = true) {
  require(temperature > 0.0, "sample_chain: temperature must be positive");
  SampledChain out;
  ActionMask mask(static_cast<int>(events.size()), codebook.size());
  for (int step = 0; step < policy.max_len; ++step) {
    PolicyStepCache cache;
    const StepLogits logits =
        step_logits(policy, events, out.chain, codebook, step, &cache);
    cache.src_mask = mask.source_mask();

    const bool any_source =
        std::any_of(cache.src_mask.begin(), cache.src_mask.end(), [](bool b) { return b; });
    cache.p_stop = sigmoid(logits.stop);
    if (!any_source) {
      cache.stopped = true;
      cache.forced = true;
      out.forced_stop = true;
      out.step_log_probs.push_back(0.0);  // forced: probability one
      if (record_caches) out.caches.push_back(std::move(cache));
      break;
    }

    const double u_stop = rng.uniform();
    if (u_stop < cache.p_stop) {
      cache.stopped = true;
      out.step_log_probs.push_back(std::log(cache.p_stop));
      out.total_log_prob += out.step_log_probs.back();
      if (record_caches) out.caches.push_back(std::move(cache));
      break;
    }
    double step_lp = std::log(1.0 - cache.p_stop);

    cache.src_probs = policy_detail::masked_softmax(logits.source, cache.src_mask);
    const int a = static_cast<int>(
        policy_detail::sample_categorical(cache.src_probs, cache.src_mask, rng.uniform()));
    step_lp += std::log(cache.src_probs[a]);

    cache.op_mask = mask.op_mask(a);
    cache.op_probs = policy_detail::masked_softmax(logits.op, cache.op_mask);
    // Gumbel perturbation on the masked log-probabilities.
    Vec perturbed(codebook.size());
    cache.relaxed_op = Vec(codebook.size());
    for (int m = 0; m < codebook.size(); ++m)
      perturbed[m] = cache.op_mask[m]
                         ? std::log(cache.op_probs[m]) + rng.gumbel()
                         : -std::numeric_limits<double>::infinity();
    const int z = static_cast<int>(policy_detail::argmax_masked(perturbed, cache.op_mask));
    {
      double top = -std::numeric_limits<double>::infinity();
      for (int m = 0; m < codebook.size(); ++m)
        if (cache.op_mask[m]) top = std::max(top, perturbed[m]);
      double total = 0.0;
      for (int m = 0; m < codebook.size(); ++m) {
        if (!cache.op_mask[m]) continue;
        cache.relaxed_op[m] = std::exp((perturbed[m] - top) / temperature);
        total += cache.relaxed_op[m];
      }
      for (int m = 0; m < codebook.size(); ++m) cache.relaxed_op[m] /= total;
    }
    step_lp += std::log(cache.op_probs[z]);

    cache.tgt_mask = mask.target_mask(a, z);
    cache.tgt_probs = policy_detail::masked_softmax(logits.target, cache.tgt_mask);
    const int b = static_cast<int>(
        policy_detail::sample_categorical(cache.tgt_probs, cache.tgt_mask, rng.uniform()));
    step_lp += std::log(cache.tgt_probs[b]);

    cache.a = a;
    cache.z = z;
    cache.b = b;
    const ChainEdge edge{a, z, b};
    out.chain.edges.push_back(edge);
    mask.add(edge);
    out.relaxed_ops.push_back(cache.relaxed_op);
    out.step_log_probs.push_back(step_lp);
    out.total_log_prob += step_lp;
    if (record_caches) out.caches.push_back(std::move(cache));
  }
  out.stop_step = static_cast<int>(out.chain.edges.size());
  return out;
}

// Greedy decode: stop as soon as p_stop crosses 1/2, otherwise take the
// argmax at every sub-decision. Deterministic in the parameters; used as
// the self-critical baseline.
inline SampledChain greedy_decode(const PolicyParams& policy, const std::vector<Event>& events,
                                  const OperatorCodebook& codebook,
                                  bool record_caches = false) {
  SampledChain out;
  ActionMask mask(static_cast<int>(events.size()), codebook.size());
  for (int step = 0; step < policy.max_len; ++step) {
    PolicyStepCache cache;
    const StepLogits logits =
        step_logits(policy, events, out.chain, codebook, step, &cache);
    cache.src_mask = mask.source_mask();
    const bool any_source =
        std::any_of(cache.src_mask.begin(), cache.src_mask.end(), [](bool b) { return b; });
    cache.p_stop = sigmoid(logits.stop);
    if (!any_source || cache.p_stop > 0.5) {
      cache.stopped = true;
      cache.forced = !any_source;
      out.forced_stop = cache.forced;
      out.step_log_probs.push_back(cache.forced ? 0.0 : std::log(cache.p_stop));
      out.total_log_prob += out.step_log_probs.back();
      if (record_caches) out.caches.push_back(std::move(cache));
      break;
    }
    double step_lp = std::log(1.0 - cache.p_stop);
    cache.src_probs = policy_detail::masked_softmax(logits.source, cache.src_mask);
    const int a =
        static_cast<int>(policy_detail::argmax_masked(cache.src_probs, cache.src_mask));
    step_lp += std::log(cache.src_probs[a]);
    cache.op_mask = mask.op_mask(a);
    cache.op_probs = policy_detail::masked_softmax(logits.op, cache.op_mask);
    const int z =
        static_cast<int>(policy_detail::argmax_masked(cache.op_probs, cache.op_mask));
    step_lp += std::log(cache.op_probs[z]);
    cache.tgt_mask = mask.target_mask(a, z);
    cache.tgt_probs = policy_detail::masked_softmax(logits.target, cache.tgt_mask);
    const int b =
        static_cast<int>(policy_detail::argmax_masked(cache.tgt_probs, cache.tgt_mask));
    step_lp += std::log(cache.tgt_probs[b]);
    cache.a = a;
    cache.z = z;
    cache.b = b;
    const ChainEdge edge{a, z, b};
    out.chain.edges.push_back(edge);
    mask.add(edge);
    out.step_log_probs.push_back(step_lp);
    out.total_log_prob += step_lp;
    if (record_caches) out.caches.push_back(std::move(cache));
  }
  out.stop_step = static_cast<int>(out.chain.edges.size());
  return out;
}

struct ChainLogProb {
  double log_prob = 0.0;
  bool reachable = true;
};

// Exact log-probability of an explicit chain under the policy, including
// the terminating stop decision. A chain that crosses a mask is reported
// unreachable with a -inf surrogate.
inline ChainLogProb chain_log_prob(const PolicyParams& policy,
                                   const std::vector<Event>& events,
                                   const OperatorCodebook& codebook,
                                   const ReasoningChain& chain) {
  ChainLogProb out;
  if (static_cast<int>(chain.edges.size()) > policy.max_len) {
    out.reachable = false;
    out.log_prob = -std::numeric_limits<double>::infinity();
    return out;
  }
  ActionMask mask(static_cast<int>(events.size()), codebook.size());
  ReasoningChain so_far;
  for (std::size_t i = 0; i < chain.edges.size(); ++i) {
    const ChainEdge& e = chain.edges[i];
    const StepLogits logits =
        step_logits(policy, events, so_far, codebook, static_cast<int>(i));
    const auto src_mask = mask.source_mask();
    if (e.src < 0 || e.src >= static_cast<int>(events.size()) || !src_mask[e.src] ||
        !mask.op_allowed(e.src, e.op) || !mask.target_allowed(e.src, e.op, e.dst)) {
      out.reachable = false;
      out.log_prob = -std::numeric_limits<double>::infinity();
      return out;
    }
    const double p_stop = sigmoid(logits.stop);
    out.log_prob += std::log(1.0 - p_stop);
    out.log_prob += std::log(policy_detail::masked_softmax(logits.source, src_mask)[e.src]);
    out.log_prob +=
        std::log(policy_detail::masked_softmax(logits.op, mask.op_mask(e.src))[e.op]);
    out.log_prob += std::log(
        policy_detail::masked_softmax(logits.target, mask.target_mask(e.src, e.op))[e.dst]);
    so_far.edges.push_back(e);
    mask.add(e);
  }
  if (static_cast<int>(chain.edges.size()) < policy.max_len) {
    const StepLogits logits = step_logits(policy, events, so_far, codebook,
                                          static_cast<int>(chain.edges.size()));
    const auto src_mask = mask.source_mask();
    const bool any_source =
        std::any_of(src_mask.begin(), src_mask.end(), [](bool b) { return b; });
    if (any_source) out.log_prob += std::log(sigmoid(logits.stop));
    // else the stop was forced with probability one
  }
  return out;
}

struct PolicyGrads {
  MlpGrads context;
  Mat w_src, w_tgt, w_op;
  Vec w_stop;
  double b_stop = 0.0;

  PolicyGrads() = default;
  explicit PolicyGrads(const PolicyParams& p)
      : context(p.context),
        w_src(p.w_src.rows, p.w_src.cols),
        w_tgt(p.w_tgt.rows, p.w_tgt.cols),
        w_op(p.w_op.rows, p.w_op.cols),
        w_stop(p.w_stop.size()) {}

  void collect_views(std::vector<ParamView>& out) {
    out.push_back(view_of("policy.context.w1", context.w1));
    out.push_back(view_of("policy.context.b1", context.b1));
    out.push_back(view_of("policy.context.w2", context.w2));
    out.push_back(view_of("policy.context.b2", context.b2));
    out.push_back(view_of("policy.w_src", w_src));
    out.push_back(view_of("policy.w_tgt", w_tgt));
    out.push_back(view_of("policy.w_op", w_op));
    out.push_back(view_of("policy.w_stop", w_stop));
    out.push_back({"policy.b_stop", &b_stop, 1});
  }
};

// Accumulates scale * d(log pi(chain)) / d(policy params) from a recorded
// sample. Operator-logit and previous-edge paths also touch the codebook
// embeddings; those gradients land in `embedding_grads`.
inline void policy_log_prob_backward(const PolicyParams& policy,
                                     const std::vector<Event>& events,
                                     const OperatorCodebook& codebook,
                                     const SampledChain& sampled, double scale,
                                     PolicyGrads& grads, Mat* embedding_grads) {
  require(!sampled.caches.empty() || sampled.chain.edges.empty(),
          "policy backward: sample was not recorded with caches");
  const double t_ref = policy_detail::time_ref(events);
  for (const PolicyStepCache& cache : sampled.caches) {
    Vec dctx(cache.ctx.size());

    // Stop decision.
    if (!cache.forced) {
      const double dstop_logit = cache.stopped ? scale * (1.0 - cache.p_stop)
                                               : scale * (-cache.p_stop);
      axpy(dstop_logit, cache.ctx, grads.w_stop);
      grads.b_stop += dstop_logit;
      axpy(dstop_logit, policy.w_stop, dctx);
    }

    if (!cache.stopped) {
      // Source head: dlogit_j = scale * (1{j=a} - p_j) over the mask.
      Vec dq_src(policy.w_src.rows);
      for (std::size_t j = 0; j < cache.src_probs.size(); ++j) {
        if (!cache.src_mask[j]) continue;
        const double dlogit =
            scale * ((static_cast<int>(j) == cache.a ? 1.0 : 0.0) - cache.src_probs[j]);
        axpy(dlogit, policy_detail::event_key(events[j], t_ref), dq_src);
      }
      add_outer(grads.w_src, dq_src, cache.ctx);
      axpy(1.0, matvec_t(policy.w_src, dq_src), dctx);

      // Operator head; embeddings are both the keys and possibly upstream.
      Vec dq_op(policy.w_op.rows);
      const Vec q_op = matvec(policy.w_op, cache.ctx);
      for (int m = 0; m < codebook.size(); ++m) {
        if (!cache.op_mask[m]) continue;
        const double dlogit =
            scale * ((m == cache.z ? 1.0 : 0.0) - cache.op_probs[m]);
        axpy(dlogit, codebook.embedding(m), dq_op);
        if (embedding_grads)
          for (int c = 0; c < codebook.embed_width(); ++c)
            (*embedding_grads)(m, c) += dlogit * q_op[c];
      }
      add_outer(grads.w_op, dq_op, cache.ctx);
      axpy(1.0, matvec_t(policy.w_op, dq_op), dctx);

      // Target head.
      Vec dq_tgt(policy.w_tgt.rows);
      for (std::size_t j = 0; j < cache.tgt_probs.size(); ++j) {
        if (!cache.tgt_mask[j]) continue;
        const double dlogit =
            scale * ((static_cast<int>(j) == cache.b ? 1.0 : 0.0) - cache.tgt_probs[j]);
        axpy(dlogit, policy_detail::event_key(events[j], t_ref), dq_tgt);
      }
      add_outer(grads.w_tgt, dq_tgt, cache.ctx);
      axpy(1.0, matvec_t(policy.w_tgt, dq_tgt), dctx);
    }

    // Through the context encoder; the previous-edge slice reaches the
    // previous operator's embedding.
    const Vec dinput = mlp_backward(policy.context, cache.ctx_cache, dctx, grads.context);
    if (embedding_grads && cache.prev_op >= 0) {
      const int d = policy.feature_dim;
      for (int c = 0; c < policy.embed_width; ++c)
        (*embedding_grads)(cache.prev_op, c) += dinput[d + d + c];
    }
  }
}

struct SelectionResult {
  SampledChain best;
  std::size_t best_index = 0;
  std::vector<SampledChain> candidates;
  std::vector<double> losses;
};

// Sample-and-verify: draw n chains, evaluate each with the supplied loss,
// keep the argmin. Ties break toward the shorter chain, then the lower
// sample index.
inline SelectionResult sample_and_select(
    const PolicyParams& policy, const std::vector<Event>& events,
    const OperatorCodebook& codebook, int n, Rng& rng, double temperature,
    const std::function<double(const SampledChain&)>& loss_fn,
    bool record_caches = true) {
  require(n >= 1, "sample_and_select: need at least one sample");
  SelectionResult out;
  for (int i = 0; i < n; ++i) {
    Rng stream = rng.split(static_cast<std::uint64_t>(i));
    SampledChain sample =
        sample_chain(policy, events, codebook, stream, temperature, record_caches);
    out.losses.push_back(loss_fn(sample));
    out.candidates.push_back(std::move(sample));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.candidates.size(); ++i) {
    const double li = out.losses[i];
    const double lb = out.losses[best];
    const std::size_t len_i = out.candidates[i].chain.length();
    const std::size_t len_b = out.candidates[best].chain.length();
    if (li < lb || (li == lb && len_i < len_b)) best = i;
  }
  out.best_index = best;
  out.best = out.candidates[best];
  return out;
}

}  // namespace evlogic
