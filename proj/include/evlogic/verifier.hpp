#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "evlogic/event.hpp"
#include "evlogic/mlp.hpp"
#include "evlogic/tensor.hpp"

namespace evlogic {

// Scores are clamped into [kScoreFloor, 1 - kScoreFloor] before the log so
// the logic loss stays finite; gradients use the raw value while it is
// inside the bounds and vanish outside (the clamp is flat there).
inline constexpr double kScoreFloor = 1e-7;

struct VerifierParams {
  double slope = 1.0;        // k, fixed rule parameter, never learned
  double meets_window = 2.0;
  Mlp head;                  // [v_a, v_b, e_z] -> scalar logit

  void init(int feature_dim, int embed_width, int hidden, Rng& rng, double scale = 0.3) {
    head = Mlp(2 * feature_dim + embed_width, hidden, 1);
    head.init(rng, scale);
  }
};

struct VerifierCounters {
  std::uint64_t pair_comparisons = 0;
  std::uint64_t edge_scores = 0;
};

// Rule-based temporal edge score for edge (a, op, b):
//   before: sigmoid(k * (b.start - a.end))
//   after : sigmoid(k * (a.start - b.end))
//   meets : sigmoid(k * (w - |b.start - a.end|))
inline double score_temporal_edge(int op_id, const Event& a, const Event& b,
                                  const VerifierParams& params) {
  switch (op_id) {
    case op::kBefore:
      return sigmoid(params.slope * (b.support.start - a.support.end));
    case op::kAfter:
      return sigmoid(params.slope * (a.support.start - b.support.end));
    case op::kMeets:
      return sigmoid(params.slope *
                     (params.meets_window - std::fabs(b.support.start - a.support.end)));
    default:
      throw std::invalid_argument("score_temporal_edge: not a temporal operator");
  }
}

// Closed-form d(score)/d(timestamp) for the two timestamps each rule reads.
struct TemporalEdgeGrads {
  double d_a_start = 0.0;
  double d_a_end = 0.0;
  double d_b_start = 0.0;
  double d_b_end = 0.0;
};

inline TemporalEdgeGrads temporal_edge_grads(int op_id, const Event& a, const Event& b,
                                             const VerifierParams& params) {
  const double s = score_temporal_edge(op_id, a, b, params);
  const double slope_term = params.slope * s * (1.0 - s);
  TemporalEdgeGrads g;
  switch (op_id) {
    case op::kBefore:
      g.d_b_start = slope_term;
      g.d_a_end = -slope_term;
      break;
    case op::kAfter:
      g.d_a_start = slope_term;
      g.d_b_end = -slope_term;
      break;
    case op::kMeets: {
      const double gap = b.support.start - a.support.end;
      const double sign = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
      g.d_b_start = -sign * slope_term;
      g.d_a_end = sign * slope_term;
      break;
    }
    default:
      throw std::invalid_argument("temporal_edge_grads: not a temporal operator");
  }
  return g;
}

struct SemanticEdgeCache {
  MlpCache mlp;
  double logit = 0.0;
};

// Effective operator embedding of one edge: the codebook row, or a relaxed
// mixture over all rows when soft weights are supplied (the optional
// soft-embedding variant).
inline Vec effective_embedding(const OperatorCodebook& codebook, int op_id,
                               const Vec* soft_weights) {
  if (soft_weights == nullptr || soft_weights->size() == 0)
    return codebook.embedding(op_id);
  Vec e(codebook.embed_width());
  for (int m = 0; m < codebook.size(); ++m)
    if ((*soft_weights)[m] != 0.0)
      axpy((*soft_weights)[m], codebook.embedding(m), e);
  return e;
}

// Learned semantic edge score: sigmoid(head([v_a, v_b, e_z])). Temporal
// operators are never routed here.
inline double score_semantic_edge(int op_id, const Event& a, const Event& b,
                                  const VerifierParams& params,
                                  const OperatorCodebook& codebook,
                                  SemanticEdgeCache* cache = nullptr,
                                  const Vec* soft_weights = nullptr) {
  require(codebook.is_semantic(op_id),
          "score_semantic_edge: operator " + codebook.name(op_id) + " is temporal");
  const Vec input =
      concat(a.feature, b.feature, effective_embedding(codebook, op_id, soft_weights));
  MlpCache local;
  const Vec out = mlp_forward(params.head, input, &local);
  if (cache) {
    cache->mlp = std::move(local);
    cache->logit = out[0];
  }
  return sigmoid(out[0]);
}

struct ChainScore {
  std::vector<double> edge_scores;          // raw sigmoid outputs in (0,1)
  double belief = 1.0;                      // product of edge scores
  double loss = 0.0;                        // -sum log clamped scores
  std::vector<SemanticEdgeCache> caches;    // parallel to edges; unused for temporal
  std::vector<Vec> soft_weights;            // per edge; empty vectors in hard mode
  ReasoningChain chain;                     // the chain that was scored
  std::size_t event_count = 0;
};

inline double clamp_score(double s) {
  if (s < kScoreFloor) return kScoreFloor;
  if (s > 1.0 - kScoreFloor) return 1.0 - kScoreFloor;
  return s;
}

// Belief and logic loss of a chain over an event list. Edges route by
// operator kind; an invalid chain is rejected with the full violation
// report.
inline ChainScore score_chain(const ReasoningChain& chain, const std::vector<Event>& events,
                              const VerifierParams& params, const OperatorCodebook& codebook,
                              VerifierCounters* counters = nullptr,
                              const std::vector<Vec>* relaxed_ops = nullptr) {
  const auto violations = validate_chain(chain, static_cast<int>(events.size()), codebook);
  if (!violations.empty()) {
    std::string msg = "score_chain: invalid chain:";
    for (const auto& v : violations)
      msg += " [edge " + std::to_string(v.position) + ": " + v.message + "]";
    throw std::invalid_argument(msg);
  }
  ChainScore out;
  out.chain = chain;
  out.event_count = events.size();
  out.caches.resize(chain.edges.size());
  out.soft_weights.resize(chain.edges.size());
  for (std::size_t i = 0; i < chain.edges.size(); ++i) {
    const ChainEdge& e = chain.edges[i];
    double s;
    if (codebook.is_temporal(e.op)) {
      s = score_temporal_edge(e.op, events[e.src], events[e.dst], params);
    } else {
      const Vec* w =
          relaxed_ops && i < relaxed_ops->size() ? &(*relaxed_ops)[i] : nullptr;
      s = score_semantic_edge(e.op, events[e.src], events[e.dst], params, codebook,
                              &out.caches[i], w);
      if (w) out.soft_weights[i] = *w;
    }
    if (counters) ++counters->edge_scores;
    out.edge_scores.push_back(s);
    out.belief *= s;
    out.loss -= std::log(clamp_score(s));
  }
  return out;
}

// Per-event timestamp gradient accumulator.
struct SupportGrad {
  double d_start = 0.0;
  double d_end = 0.0;
};

struct LogicBackwardResult {
  MlpGrads head;
  Mat embeddings;
  std::vector<Vec> features;
  std::vector<SupportGrad> supports;
};

// Exact gradients of loss = -sum_i log s_i from a matching score_chain
// call. `scale` premultiplies everything (callers pass loss weights).
inline LogicBackwardResult logic_loss_backward(const ChainScore& scored,
                                               const std::vector<Event>& events,
                                               const VerifierParams& params,
                                               const OperatorCodebook& codebook,
                                               double scale = 1.0) {
  require(scored.event_count == events.size() &&
              scored.caches.size() == scored.chain.edges.size() &&
              scored.edge_scores.size() == scored.chain.edges.size(),
          "logic_loss_backward: stale or mismatched cache");
  const int d = events.empty() ? 0 : static_cast<int>(events.front().feature.size());
  LogicBackwardResult out;
  out.head = MlpGrads(params.head);
  out.embeddings = Mat(codebook.size(), codebook.embed_width());
  out.features.assign(events.size(), Vec(d));
  out.supports.assign(events.size(), SupportGrad{});

  for (std::size_t i = 0; i < scored.chain.edges.size(); ++i) {
    const ChainEdge& e = scored.chain.edges[i];
    const double s = scored.edge_scores[i];
    if (s <= kScoreFloor || s >= 1.0 - kScoreFloor) continue;  // clamp is flat
    const double dloss_ds = -scale / s;
    if (codebook.is_temporal(e.op)) {
      const TemporalEdgeGrads g =
          temporal_edge_grads(e.op, events[e.src], events[e.dst], params);
      out.supports[e.src].d_start += dloss_ds * g.d_a_start;
      out.supports[e.src].d_end += dloss_ds * g.d_a_end;
      out.supports[e.dst].d_start += dloss_ds * g.d_b_start;
      out.supports[e.dst].d_end += dloss_ds * g.d_b_end;
    } else {
      // d loss / d logit = -scale * (1 - s)
      const double dlogit = dloss_ds * s * (1.0 - s);
      Vec upstream(1);
      upstream[0] = dlogit;
      const Vec dinput = mlp_backward(params.head, scored.caches[i].mlp, upstream, out.head);
      for (int c = 0; c < d; ++c) {
        out.features[e.src][c] += dinput[c];
        out.features[e.dst][c] += dinput[d + c];
      }
      const Vec& w = scored.soft_weights[i];
      for (int c = 0; c < codebook.embed_width(); ++c) {
        const double de = dinput[2 * d + c];
        if (w.size() == 0) {
          out.embeddings(e.op, c) += de;
        } else {
          for (int m = 0; m < codebook.size(); ++m)
            if (w[m] != 0.0) out.embeddings(m, c) += w[m] * de;
        }
      }
    }
  }
  return out;
}

// Full pairwise sweep: every ordered pair scored under every operator.
// Counts one pair comparison per ordered pair, independent of frame count.
inline Mat pairwise_max_scores(const std::vector<Event>& events,
                               const VerifierParams& params,
                               const OperatorCodebook& codebook,
                               VerifierCounters* counters = nullptr) {
  const std::size_t k = events.size();
  Mat best(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      if (counters) ++counters->pair_comparisons;
      double top = 0.0;
      for (int z = 0; z < codebook.size(); ++z) {
        const double s =
            codebook.is_temporal(z)
                ? score_temporal_edge(z, events[a], events[b], params)
                : score_semantic_edge(z, events[a], events[b], params, codebook);
        if (s > top) top = s;
      }
      best(a, b) = top;
    }
  }
  return best;
}

}  // namespace evlogic
