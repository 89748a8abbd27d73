#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "evlogic/event.hpp"
#include "evlogic/mlp.hpp"
#include "evlogic/tensor.hpp"
#include "evlogic/verifier.hpp"
#include "evlogic/world.hpp"

namespace evlogic {

// Next-state predictor: chain-prefix encoder plus a head mapping
// [prefix encoding, S_t] to a predicted S_{t+1}.
struct Predictor {
  Mlp prefix_encoder;  // [v_a, e_z, v_b] -> prefix_width
  Vec null_prefix;     // learned encoding of the empty prefix
  Mlp next_state;      // [prefix_width, d] -> d

  void init(int feature_dim, int embed_width, int hidden, int prefix_width, Rng& rng,
            double scale = 0.3) {
    prefix_encoder = Mlp(2 * feature_dim + embed_width, hidden, prefix_width);
    prefix_encoder.init(rng, scale);
    null_prefix = Vec(prefix_width);
    for (double& x : null_prefix.data) x = scale * rng.normal();
    next_state = Mlp(prefix_width + feature_dim, hidden, feature_dim);
    next_state.init(rng, scale);
  }

  int prefix_width() const { return static_cast<int>(null_prefix.size()); }

  void collect_params(std::vector<ParamView>& out) {
    prefix_encoder.collect_params("predictor.prefix_encoder", out);
    out.push_back(view_of("predictor.null_prefix", null_prefix));
    next_state.collect_params("predictor.next_state", out);
  }
};

struct ObjectiveConfig {
  double weight_pred = 1.0;
  double weight_logic = 1.0;
  double weight_cf = 1.0;
  double weight_spar = 1.0;
  double alpha = 0.1;   // sparsity coefficient
  double margin = 0.5;  // counterfactual hinge margin
  // -1 draws the counterfactual mode uniformly per scenario; 0/1/2 pin
  // temporal / feature_swap / cross_video.
  int cf_mode = -1;
  // Reward-side sparsity on expected remaining length instead of the hard
  // edge count (uses the recorded per-step continue probabilities).
  bool spar_expected_length = false;
  // Soft-embedding variant: semantic scores and edge encodings consume the
  // Gumbel-softmax mixture of operator embeddings instead of the hard row.
  bool soft_operator_embeddings = false;

  void validate() const {
    require(weight_pred >= 0 && weight_logic >= 0 && weight_cf >= 0 && weight_spar >= 0,
            "objectives: weights must be >= 0");
    require(alpha >= 0, "objectives: alpha must be >= 0");
    require(margin > 0, "objectives: margin must be > 0");
  }
};

struct PredCache {
  struct Step {
    std::vector<int> prefix;  // edge indices whose events both end by t
    MlpCache next_cache;
    Vec prediction;
    Vec actual;
    double cos = 0.0;
    bool degenerate = false;
  };
  std::vector<MlpCache> edge_caches;
  std::vector<Vec> edge_encodings;
  std::vector<Vec> soft_weights;  // per edge; empty vectors in hard mode
  std::vector<Step> steps;
  double loss = 0.0;
  bool any_degenerate = false;
};

// Masked predictive coding: for each frame t the chain prefix (edges fully
// elapsed by t) is encoded and asked to predict S_{t+1}; the loss is the
// mean cosine shortfall 1 - cos(predicted, actual). Zero-norm vectors make
// a term degenerate: its cosine is 0 (contribution 1) and it is flagged.
inline double pred_loss(const ReasoningChain& chain, const std::vector<Event>& events,
                        const Mat& frames, const Predictor& predictor,
                        const OperatorCodebook& codebook, PredCache* cache = nullptr,
                        const std::vector<Vec>* relaxed_ops = nullptr) {
  const int t_total = static_cast<int>(frames.rows);
  require(t_total >= 2, "pred_loss: need at least two frames");
  PredCache local;
  PredCache& c = cache ? *cache : local;
  c = PredCache{};

  for (std::size_t i = 0; i < chain.edges.size(); ++i) {
    const ChainEdge& e = chain.edges[i];
    const Vec* w =
        relaxed_ops && i < relaxed_ops->size() ? &(*relaxed_ops)[i] : nullptr;
    const Vec ez = effective_embedding(codebook, e.op, w);
    const Vec input = concat(events[e.src].feature, ez, events[e.dst].feature);
    MlpCache mc;
    c.edge_encodings.push_back(mlp_forward(predictor.prefix_encoder, input, &mc));
    c.edge_caches.push_back(std::move(mc));
    c.soft_weights.push_back(w ? *w : Vec());
  }

  double total = 0.0;
  for (int t = 0; t + 1 < t_total; ++t) {
    PredCache::Step step;
    Vec prefix = predictor.null_prefix;
    for (std::size_t i = 0; i < chain.edges.size(); ++i) {
      const ChainEdge& e = chain.edges[i];
      const double latest_end =
          std::max(events[e.src].support.end, events[e.dst].support.end);
      if (latest_end <= t) step.prefix.push_back(static_cast<int>(i));
    }
    if (!step.prefix.empty()) {
      prefix = Vec(predictor.prefix_width());
      for (int i : step.prefix)
        axpy(1.0 / step.prefix.size(), c.edge_encodings[i], prefix);
    }
    const Vec input = concat(prefix, frames.row_vec(t));
    step.prediction = mlp_forward(predictor.next_state, input, &step.next_cache);
    step.actual = frames.row_vec(t + 1);
    bool degenerate = false;
    step.cos = cosine(step.prediction, step.actual, &degenerate);
    step.degenerate = degenerate;
    c.any_degenerate = c.any_degenerate || degenerate;
    total += 1.0 - step.cos;
    c.steps.push_back(std::move(step));
  }
  c.loss = total / (t_total - 1);
  return c.loss;
}

struct PredictorGrads {
  MlpGrads prefix_encoder;
  Vec null_prefix;
  MlpGrads next_state;

  PredictorGrads() = default;
  explicit PredictorGrads(const Predictor& p)
      : prefix_encoder(p.prefix_encoder),
        null_prefix(p.null_prefix.size()),
        next_state(p.next_state) {}
};

// Exact gradients of scale * pred_loss into predictor and embedding
// accumulators. Degenerate cosine terms contribute zero gradient.
inline void pred_loss_backward(const ReasoningChain& chain, const std::vector<Event>& events,
                               const Predictor& predictor, const OperatorCodebook& codebook,
                               const PredCache& cache, double scale,
                               PredictorGrads& grads, Mat* embedding_grads) {
  require(cache.edge_caches.size() == chain.edges.size(),
          "pred_loss_backward: stale cache");
  const std::size_t t_terms = cache.steps.size();
  if (t_terms == 0) return;
  const int pw = predictor.prefix_width();
  std::vector<Vec> edge_upstream(chain.edges.size(), Vec(pw));

  for (const PredCache::Step& step : cache.steps) {
    if (step.degenerate) continue;
    const Vec& yhat = step.prediction;
    const Vec& y = step.actual;
    const double ny = norm2(yhat);
    const double na = norm2(y);
    // d(1 - cos)/d yhat = -(y / (|yhat||y|) - cos * yhat / |yhat|^2)
    Vec dyhat(yhat.size());
    for (std::size_t i = 0; i < yhat.size(); ++i)
      dyhat[i] = -scale / t_terms * (y[i] / (ny * na) - step.cos * yhat[i] / (ny * ny));
    const Vec dinput = mlp_backward(predictor.next_state, step.next_cache, dyhat,
                                    grads.next_state);
    if (step.prefix.empty()) {
      for (int i = 0; i < pw; ++i) grads.null_prefix[i] += dinput[i];
    } else {
      for (int edge : step.prefix)
        for (int i = 0; i < pw; ++i)
          edge_upstream[edge][i] += dinput[i] / step.prefix.size();
    }
    // the S_t slice of dinput is data, not a parameter
  }

  const int d = static_cast<int>(events.empty() ? 0 : events.front().feature.size());
  for (std::size_t i = 0; i < chain.edges.size(); ++i) {
    bool zero = true;
    for (double v : edge_upstream[i].data)
      if (v != 0.0) zero = false;
    if (zero) continue;
    const Vec dinput = mlp_backward(predictor.prefix_encoder, cache.edge_caches[i],
                                    edge_upstream[i], grads.prefix_encoder);
    if (embedding_grads) {
      const Vec& w = cache.soft_weights[i];
      for (int cdx = 0; cdx < codebook.embed_width(); ++cdx) {
        const double de = dinput[d + cdx];
        if (w.size() == 0) {
          (*embedding_grads)(chain.edges[i].op, cdx) += de;
        } else {
          for (int m = 0; m < codebook.size(); ++m)
            if (w[m] != 0.0) (*embedding_grads)(m, cdx) += w[m] * de;
        }
      }
    }
  }
}

// Counterfactual hinge: max(0, margin + L_logic(C;V) - L_logic(C;V-)).
// Zero exactly when the counterfactual's logic loss exceeds the real one
// by at least the margin.
struct CfLossResult {
  double value = 0.0;
  bool active = false;  // hinge open: gradients flow
  ChainScore score_v;
  ChainScore score_cf;
};

inline CfLossResult cf_loss(const ReasoningChain& chain, const std::vector<Event>& events_v,
                            const std::vector<Event>& events_cf,
                            const VerifierParams& verifier, const OperatorCodebook& codebook,
                            double margin, VerifierCounters* counters = nullptr,
                            const std::vector<Vec>* relaxed_ops = nullptr) {
  require(events_v.size() == events_cf.size(),
          "cf_loss: event count mismatch between scenario and counterfactual");
  CfLossResult out;
  out.score_v = score_chain(chain, events_v, verifier, codebook, counters, relaxed_ops);
  out.score_cf = score_chain(chain, events_cf, verifier, codebook, counters, relaxed_ops);
  const double raw = margin + out.score_v.loss - out.score_cf.loss;
  out.value = raw > 0.0 ? raw : 0.0;
  out.active = raw > 0.0;
  return out;
}

// Occam penalty: alpha * |C|. Contributes to the REINFORCE reward only;
// it has no parameter gradient.
inline double spar_loss(const ReasoningChain& chain, double alpha) {
  require(alpha >= 0.0, "spar_loss: alpha must be >= 0");
  return alpha * static_cast<double>(chain.edges.size());
}

struct AuxLossReport {
  double pred = 0.0;
  double logic = 0.0;
  double cf = 0.0;
  double spar = 0.0;
  double total = 0.0;
  bool cf_active = false;
  bool pred_degenerate = false;
  ChainScore score_v;
  ChainScore score_cf;
  PredCache pred_cache;
};

// The four-term auxiliary objective. total = sum of weight_i * term_i,
// exactly.
inline AuxLossReport aux_loss(const ReasoningChain& chain, const std::vector<Event>& events,
                              const Mat& frames, const std::vector<Event>& cf_events,
                              const VerifierParams& verifier, const OperatorCodebook& codebook,
                              const Predictor& predictor, const ObjectiveConfig& cfg,
                              const std::vector<Vec>* relaxed_ops = nullptr,
                              VerifierCounters* counters = nullptr) {
  cfg.validate();
  AuxLossReport report;
  report.pred = pred_loss(chain, events, frames, predictor, codebook, &report.pred_cache,
                          relaxed_ops);
  report.pred_degenerate = report.pred_cache.any_degenerate;
  CfLossResult cf = cf_loss(chain, events, cf_events, verifier, codebook, cfg.margin,
                            counters, relaxed_ops);
  report.score_v = std::move(cf.score_v);
  report.score_cf = std::move(cf.score_cf);
  report.logic = report.score_v.loss;
  report.cf = cf.value;
  report.cf_active = cf.active;
  report.spar = spar_loss(chain, cfg.alpha);
  report.total = cfg.weight_pred * report.pred + cfg.weight_logic * report.logic +
                 cfg.weight_cf * report.cf + cfg.weight_spar * report.spar;
  return report;
}

struct AuxGrads {
  MlpGrads head;
  Mat embeddings;
  PredictorGrads predictor;

  AuxGrads(const VerifierParams& verifier, const OperatorCodebook& codebook,
           const Predictor& pred)
      : head(verifier.head),
        embeddings(codebook.size(), codebook.embed_width()),
        predictor(pred) {}
};

inline void accumulate_logic_grads(AuxGrads& grads, const LogicBackwardResult& r) {
  for (std::size_t i = 0; i < r.head.w1.data.size(); ++i)
    grads.head.w1.data[i] += r.head.w1.data[i];
  for (std::size_t i = 0; i < r.head.b1.size(); ++i) grads.head.b1[i] += r.head.b1[i];
  for (std::size_t i = 0; i < r.head.w2.data.size(); ++i)
    grads.head.w2.data[i] += r.head.w2.data[i];
  for (std::size_t i = 0; i < r.head.b2.size(); ++i) grads.head.b2[i] += r.head.b2[i];
  for (std::size_t i = 0; i < r.embeddings.data.size(); ++i)
    grads.embeddings.data[i] += r.embeddings.data[i];
}

// Routes the gradients of the differentiable terms (pred, logic, cf) to
// their parameter owners. The sparsity term shapes the REINFORCE reward
// only. `scale` rescales everything (callers average over samples).
inline void aux_loss_backward(const AuxLossReport& report, const ReasoningChain& chain,
                              const std::vector<Event>& events,
                              const std::vector<Event>& cf_events,
                              const VerifierParams& verifier, const OperatorCodebook& codebook,
                              const Predictor& predictor, const ObjectiveConfig& cfg,
                              AuxGrads& grads, double scale = 1.0) {
  // logic term plus the real-scenario side of the hinge
  double v_scale = cfg.weight_logic * scale;
  if (report.cf_active) v_scale += cfg.weight_cf * scale;
  if (v_scale != 0.0)
    accumulate_logic_grads(
        grads, logic_loss_backward(report.score_v, events, verifier, codebook, v_scale));
  if (report.cf_active && cfg.weight_cf != 0.0)
    accumulate_logic_grads(
        grads, logic_loss_backward(report.score_cf, cf_events, verifier, codebook,
                                   -cfg.weight_cf * scale));
  if (cfg.weight_pred != 0.0)
    pred_loss_backward(chain, events, predictor, codebook, report.pred_cache,
                       cfg.weight_pred * scale, grads.predictor, &grads.embeddings);
}

}  // namespace evlogic
