#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evlogic/event.hpp"
#include "evlogic/mlp.hpp"
#include "evlogic/objectives.hpp"
#include "evlogic/policy.hpp"
#include "evlogic/rng.hpp"
#include "evlogic/verifier.hpp"

namespace evlogic {

struct ModelConfig {
  int feature_dim = 16;    // d; must match the world
  int embed_width = 16;    // d_z
  int codebook_size = 32;  // M
  int verifier_hidden = 32;
  int predictor_hidden = 32;
  int prefix_width = 16;
  int policy_context_width = 32;
  int policy_hidden = 32;
  int max_chain_len = 12;  // L_max
  double temporal_slope = 1.0;
  double meets_window = 2.0;

  void validate() const {
    require(feature_dim >= 1 && embed_width >= 1, "model: bad widths");
    require(codebook_size >= op::kNamedCount, "model: codebook too small");
    require(max_chain_len >= 1, "model: max_chain_len must be >= 1");
    require(temporal_slope > 0.0, "model: temporal slope must be > 0");
  }
};

// Every learnable tensor of the engine plus the fixed rule parameters.
// Parameter groups mirror the update paths: the policy learns from
// REINFORCE only; head, embeddings and predictor take direct gradients.
struct ModelState {
  ModelConfig config;
  OperatorCodebook codebook;
  VerifierParams verifier;
  Predictor predictor;
  PolicyParams policy;

  static ModelState init(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ModelState m;
    m.config = cfg;
    Rng rng(Rng::derive(seed, 0x90DE1));
    m.codebook = OperatorCodebook::make(cfg.codebook_size, cfg.embed_width, rng);
    m.verifier.slope = cfg.temporal_slope;
    m.verifier.meets_window = cfg.meets_window;
    m.verifier.init(cfg.feature_dim, cfg.embed_width, cfg.verifier_hidden, rng);
    m.predictor.init(cfg.feature_dim, cfg.embed_width, cfg.predictor_hidden,
                     cfg.prefix_width, rng);
    m.policy.init(cfg.feature_dim, cfg.embed_width, cfg.policy_context_width,
                  cfg.policy_hidden, rng);
    m.policy.max_len = cfg.max_chain_len;
    return m;
  }

  std::vector<ParamView> policy_params() {
    std::vector<ParamView> out;
    policy.collect_params(out);
    return out;
  }

  std::vector<ParamView> verifier_params() {
    std::vector<ParamView> out;
    verifier.head.collect_params("verifier.head", out);
    return out;
  }

  std::vector<ParamView> embedding_params() {
    return {view_of("codebook.embeddings", codebook.embeddings)};
  }

  std::vector<ParamView> predictor_params() {
    std::vector<ParamView> out;
    predictor.collect_params(out);
    return out;
  }

  // Direct-gradient group (theta): everything the differentiable losses
  // reach.
  std::vector<ParamView> theta_params() {
    std::vector<ParamView> out = verifier_params();
    for (auto& v : embedding_params()) out.push_back(v);
    for (auto& v : predictor_params()) out.push_back(v);
    return out;
  }

  std::vector<ParamView> all_params() {
    std::vector<ParamView> out = theta_params();
    for (auto& v : policy_params()) out.push_back(v);
    return out;
  }
};

// Gradient buffers shaped like the direct + policy parameter groups, with
// matching named views.
struct ModelGrads {
  MlpGrads head;
  Mat embeddings;
  PredictorGrads predictor;
  PolicyGrads policy;

  explicit ModelGrads(ModelState& m)
      : head(m.verifier.head),
        embeddings(m.codebook.embeddings.rows, m.codebook.embeddings.cols),
        predictor(m.predictor),
        policy(m.policy) {}

  void zero() {
    auto z = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    z(head.w1.data);
    z(head.b1.data);
    z(head.w2.data);
    z(head.b2.data);
    z(embeddings.data);
    z(predictor.prefix_encoder.w1.data);
    z(predictor.prefix_encoder.b1.data);
    z(predictor.prefix_encoder.w2.data);
    z(predictor.prefix_encoder.b2.data);
    z(predictor.null_prefix.data);
    z(predictor.next_state.w1.data);
    z(predictor.next_state.b1.data);
    z(predictor.next_state.w2.data);
    z(predictor.next_state.b2.data);
    z(policy.context.w1.data);
    z(policy.context.b1.data);
    z(policy.context.w2.data);
    z(policy.context.b2.data);
    z(policy.w_src.data);
    z(policy.w_tgt.data);
    z(policy.w_op.data);
    z(policy.w_stop.data);
    policy.b_stop = 0.0;
  }

  std::vector<ParamView> theta_views() {
    std::vector<ParamView> out;
    out.push_back(view_of("verifier.head.w1", head.w1));
    out.push_back(view_of("verifier.head.b1", head.b1));
    out.push_back(view_of("verifier.head.w2", head.w2));
    out.push_back(view_of("verifier.head.b2", head.b2));
    out.push_back(view_of("codebook.embeddings", embeddings));
    out.push_back(view_of("predictor.prefix_encoder.w1", predictor.prefix_encoder.w1));
    out.push_back(view_of("predictor.prefix_encoder.b1", predictor.prefix_encoder.b1));
    out.push_back(view_of("predictor.prefix_encoder.w2", predictor.prefix_encoder.w2));
    out.push_back(view_of("predictor.prefix_encoder.b2", predictor.prefix_encoder.b2));
    out.push_back(view_of("predictor.null_prefix", predictor.null_prefix));
    out.push_back(view_of("predictor.next_state.w1", predictor.next_state.w1));
    out.push_back(view_of("predictor.next_state.b1", predictor.next_state.b1));
    out.push_back(view_of("predictor.next_state.w2", predictor.next_state.w2));
    out.push_back(view_of("predictor.next_state.b2", predictor.next_state.b2));
    return out;
  }

  std::vector<ParamView> policy_views() {
    std::vector<ParamView> out;
    policy.collect_views(out);
    return out;
  }
};

}  // namespace evlogic
