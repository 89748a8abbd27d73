#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evlogic/event.hpp"
#include "evlogic/rng.hpp"
#include "evlogic/tensor.hpp"

namespace evlogic {

struct WorldConfig {
  int event_count = 8;      // K
  int frame_count = 48;     // T
  int feature_dim = 16;     // d
  int premise_vocab = 4;
  int action_vocab = 6;
  int object_vocab = 6;
  int min_semantic_edges = 2;
  int max_semantic_edges = 3;
  double coupling = 1.0;       // beta; 0 is the negative control
  double noise = 0.1;          // sigma_n
  double vis_threshold = 0.2;    // delta_vis
  double logic_threshold = 0.05; // delta_logic

  void validate() const {
    require(event_count >= 2, "world: event_count must be >= 2");
    require(frame_count >= event_count, "world: frame_count must be >= event_count");
    require(feature_dim >= 1, "world: feature_dim must be >= 1");
    require(premise_vocab >= 1 && action_vocab >= 1 && object_vocab >= 1,
            "world: vocab sizes must be positive");
    require(min_semantic_edges >= 1 && max_semantic_edges >= min_semantic_edges,
            "world: bad semantic edge range");
    require(coupling >= 0.0, "world: coupling must be >= 0");
    require(noise >= 0.0, "world: noise must be >= 0");
    require(logic_threshold >= 0.0 && logic_threshold <= vis_threshold &&
                vis_threshold <= 1.0,
            "world: need 0 <= logic_threshold <= vis_threshold <= 1");
  }
};

// A synthetic "video": ground-truth events, rendered frame stream, and the
// planted causal chain the engine is supposed to recover.
struct Scenario {
  WorldConfig config;
  std::uint64_t seed = 0;
  std::vector<Event> events;
  Mat frames;  // frame_count x feature_dim
  ReasoningChain truth_chain;
  int semantic_edge_count = 0;
  std::string density;  // sparse | medium | dense
};

enum class CfMode { Temporal, FeatureSwap, CrossVideo };

inline std::string cf_mode_name(CfMode m) {
  switch (m) {
    case CfMode::Temporal: return "temporal";
    case CfMode::FeatureSwap: return "feature_swap";
    case CfMode::CrossVideo: return "cross_video";
  }
  return "?";
}

namespace detail {

// Global constants seeding the label geometry and the per-relation coupling
// matrices. Fixed across scenarios so the semantic signal is learnable.
inline constexpr std::uint64_t kVocabularySeed = 0x5EEDF00DULL;
inline constexpr std::uint64_t kRelationSeed = 0xCA05A117ULL;
inline constexpr std::uint64_t kRenderStream = 0xF8A3ULL;
inline constexpr std::uint64_t kStructureStream = 0x51ULL;

// Fixed direction vector for one vocabulary entry, norm sqrt(2).
inline Vec vocab_vector(int component, int index, int dim) {
  Rng rng(Rng::derive(Rng::derive(kVocabularySeed, component), index));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  const double n = norm2(v);
  return scaled(v, std::sqrt(2.0) / (n > 0 ? n : 1.0));
}

// Fixed random coupling matrix for one semantic relation, entries
// N(0, 1/dim) so that |W x| is on the order of |x|.
inline Mat relation_matrix(int op_id, int dim) {
  Rng rng(Rng::derive(kRelationSeed, static_cast<std::uint64_t>(op_id)));
  Mat w(dim, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& x : w.data) x = scale * rng.normal();
  return w;
}

inline Vec label_base_feature(const EventLabel& label, int dim) {
  Vec v = vocab_vector(0, label.premise, dim);
  axpy(1.0, vocab_vector(1, label.action, dim), v);
  axpy(1.0, vocab_vector(2, label.object, dim), v);
  return v;
}

}  // namespace detail

// Frame t = sum of the features of events active at t, plus N(0, sigma^2)
// noise per dimension. The noise stream is derived from the seed, so the
// same (events, config, seed) always renders the same frames.
inline Mat render_frames(const std::vector<Event>& events, const WorldConfig& config,
                         std::uint64_t seed) {
  Rng rng(Rng::derive(seed, detail::kRenderStream));
  Mat frames(config.frame_count, config.feature_dim);
  for (int t = 0; t < config.frame_count; ++t) {
    double* row = frames.row(t);
    for (const Event& e : events) {
      require(e.support.start >= 0.0 && e.support.end <= config.frame_count,
              "render: support outside stream");
      if (e.support.start <= t && t <= e.support.end)
        for (int i = 0; i < config.feature_dim; ++i) row[i] += e.feature[i];
    }
    if (config.noise > 0.0)
      for (int i = 0; i < config.feature_dim; ++i) row[i] += config.noise * rng.normal();
  }
  return frames;
}

// Deterministic scenario construction from (config, seed):
//
//  * K events laid out in K equal slots of the frame axis, each support an
//    integer interval with at least one empty frame on both slot edges, so
//    consecutive events are separated by >= 2 noise-only frames.
//  * labels drawn uniformly from the vocabularies; base features are the
//    sum of the three label direction vectors.
//  * a random DAG over temporally ordered pairs supplies semantic edges;
//    for each planted edge (a, z, b) the target feature picks up
//    coupling * W_z * base(a), making distinct relations statistically
//    distinguishable (and absent when coupling = 0).
//  * truth chain = planted semantic edges plus one `before` edge per
//    semantically linked pair.
inline Scenario generate_scenario(const WorldConfig& config, std::uint64_t seed) {
  config.validate();
  const int k = config.event_count;
  const int slot = config.frame_count / k;
  if (slot < 4)
    throw std::runtime_error(
        "world: cannot place " + std::to_string(k) + " non-degenerate supports in " +
        std::to_string(config.frame_count) + " frames (need frame_count >= 4K)");

  Rng rng(Rng::derive(seed, detail::kStructureStream));
  Scenario sc;
  sc.config = config;
  sc.seed = seed;

  for (int j = 0; j < k; ++j) {
    Event e;
    e.label.premise = static_cast<int>(rng.index(config.premise_vocab));
    e.label.action = static_cast<int>(rng.index(config.action_vocab));
    e.label.object = static_cast<int>(rng.index(config.object_vocab));
    const int len = 2 + static_cast<int>(rng.index(slot - 3));
    const int start = j * slot + 1 + static_cast<int>(rng.index(slot - len - 1));
    e.support.start = start;
    e.support.end = start + len - 1;
    e.feature = detail::label_base_feature(e.label, config.feature_dim);
    sc.events.push_back(std::move(e));
  }

  // All temporally ordered pairs are eligible; sample distinct ones.
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) pairs.push_back({a, b});
  const int want = config.min_semantic_edges +
                   static_cast<int>(rng.index(config.max_semantic_edges -
                                              config.min_semantic_edges + 1));
  const int n_sem = std::min<int>(want, static_cast<int>(pairs.size()));
  for (int i = 0; i < n_sem; ++i) {
    const std::size_t pick = i + rng.index(pairs.size() - i);
    std::swap(pairs[i], pairs[pick]);
  }

  const int semantic_ops[] = {op::kCause, op::kEnable, op::kPrevent};
  for (int i = 0; i < n_sem; ++i) {
    const auto [a, b] = pairs[i];
    const int z = semantic_ops[rng.index(3)];
    sc.truth_chain.edges.push_back({a, z, b});
    sc.truth_chain.edges.push_back({a, op::kBefore, b});
    if (config.coupling > 0.0) {
      const Mat w = detail::relation_matrix(z, config.feature_dim);
      const Vec base = detail::label_base_feature(sc.events[a].label, config.feature_dim);
      axpy(config.coupling, matvec(w, base), sc.events[b].feature);
    }
  }
  sc.truth_chain = canonicalize_chain(sc.truth_chain);
  sc.semantic_edge_count = n_sem;
  sc.density = n_sem <= 3 ? "sparse" : (n_sem <= 6 ? "medium" : "dense");
  sc.frames = render_frames(sc.events, config, seed);
  return sc;
}

// Label-multiset Jaccard similarity; the desk-scale stand-in for visual
// similarity between two scenarios.
inline double visual_similarity(const Scenario& a, const Scenario& b) {
  std::vector<EventLabel> la, lb;
  for (const Event& e : a.events) la.push_back(e.label);
  for (const Event& e : b.events) lb.push_back(e.label);
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  std::vector<EventLabel> inter, uni;
  std::set_intersection(la.begin(), la.end(), lb.begin(), lb.end(), std::back_inserter(inter));
  std::set_union(la.begin(), la.end(), lb.begin(), lb.end(), std::back_inserter(uni));
  return uni.empty() ? 1.0 : static_cast<double>(inter.size()) / uni.size();
}

// Truth-chain edge-set Jaccard similarity.
inline double logic_similarity(const Scenario& a, const Scenario& b) {
  const auto ca = canonicalize_chain(a.truth_chain).edges;
  const auto cb = canonicalize_chain(b.truth_chain).edges;
  std::vector<ChainEdge> inter, uni;
  std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(), std::back_inserter(inter));
  std::set_union(ca.begin(), ca.end(), cb.begin(), cb.end(), std::back_inserter(uni));
  return uni.empty() ? 1.0 : static_cast<double>(inter.size()) / uni.size();
}

struct CounterfactualError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structure-breaking negatives; appearance is preserved as far as each mode
// allows:
//
//  temporal     swap the supports of one planted causal pair (features
//               untouched), then re-render. Only the two targeted supports
//               and the frames change.
//  feature_swap swap the two features of one planted pair (supports
//               untouched), then re-render. Applying it twice with the same
//               seed restores the original.
//  cross_video  return a pool scenario whose label multiset overlaps at
//               least vis_threshold while its truth-chain edge overlap is
//               at most logic_threshold.
inline Scenario make_counterfactual(const Scenario& sc, CfMode mode, std::uint64_t seed,
                                    const std::vector<Scenario>* pool = nullptr) {
  Rng rng(Rng::derive(seed, 0xCF));
  if (mode == CfMode::CrossVideo) {
    if (pool == nullptr || pool->empty())
      throw CounterfactualError("no structural negative found: empty pool");
    std::vector<const Scenario*> matches;
    for (const Scenario& cand : *pool) {
      if (cand.seed == sc.seed) continue;
      if (visual_similarity(sc, cand) >= sc.config.vis_threshold &&
          logic_similarity(sc, cand) <= sc.config.logic_threshold)
        matches.push_back(&cand);
    }
    if (matches.empty())
      throw CounterfactualError("no structural negative found");
    return *matches[rng.index(matches.size())];
  }

  std::vector<ChainEdge> semantic;
  for (const ChainEdge& e : sc.truth_chain.edges)
    if (e.op >= op::kCause && e.op <= op::kPrevent) semantic.push_back(e);
  if (semantic.empty())
    throw CounterfactualError("counterfactual: scenario has no semantic edge");

  // Prefer a cause pair when one exists.
  std::vector<ChainEdge> cause;
  for (const ChainEdge& e : semantic)
    if (e.op == op::kCause) cause.push_back(e);
  const std::vector<ChainEdge>& pick_from = cause.empty() ? semantic : cause;
  const ChainEdge target = pick_from[rng.index(pick_from.size())];

  Scenario out = sc;
  if (mode == CfMode::Temporal) {
    std::swap(out.events[target.src].support, out.events[target.dst].support);
  } else {
    std::swap(out.events[target.src].feature, out.events[target.dst].feature);
  }
  out.frames = render_frames(out.events, out.config, out.seed);
  return out;
}

}  // namespace evlogic
