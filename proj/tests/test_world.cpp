#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "evlogic/world.hpp"
#include "oracles.hpp"

using namespace evlogic;

namespace {
WorldConfig tiny_config() {
  WorldConfig cfg;
  cfg.event_count = 2;
  cfg.frame_count = 16;
  cfg.feature_dim = 8;
  cfg.min_semantic_edges = 1;
  cfg.max_semantic_edges = 1;
  cfg.noise = 0.0;
  return cfg;
}
}  // namespace

TEST_CASE("generate_scenario: K=2 with one semantic edge plants the before edge too") {
  const auto cfg = tiny_config();
  const Scenario sc = generate_scenario(cfg, 0);
  REQUIRE(sc.events.size() == 2);
  REQUIRE(sc.semantic_edge_count == 1);
  REQUIRE(sc.truth_chain.edges.size() == 2);
  REQUIRE(sc.truth_chain.edges[0] == ChainEdge{0, op::kBefore, 1});
  REQUIRE(sc.truth_chain.edges[1].src == 0);
  REQUIRE(sc.truth_chain.edges[1].dst == 1);
  REQUIRE(sc.truth_chain.edges[1].op >= op::kCause);
  REQUIRE(sc.truth_chain.edges[1].op <= op::kPrevent);
}

TEST_CASE("generate_scenario: same config and seed is bit-identical") {
  WorldConfig cfg;
  cfg.frame_count = 64;
  const Scenario a = generate_scenario(cfg, 123);
  const Scenario b = generate_scenario(cfg, 123);
  REQUIRE(a.frames.data == b.frames.data);
  REQUIRE(a.truth_chain.edges == b.truth_chain.edges);
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    REQUIRE(a.events[i].feature.data == b.events[i].feature.data);
    REQUIRE(a.events[i].support.start == b.events[i].support.start);
    REQUIRE(a.events[i].label == b.events[i].label);
  }
}

TEST_CASE("generate_scenario: planted semantic edges respect temporal precedence") {
  WorldConfig cfg;
  cfg.event_count = 6;
  cfg.frame_count = 36;
  cfg.min_semantic_edges = 3;
  cfg.max_semantic_edges = 5;
  Rng cb_rng(0);
  const auto cb = OperatorCodebook::make(8, 4, cb_rng);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario sc = generate_scenario(cfg, seed);
    REQUIRE(chain_valid(sc.truth_chain, cfg.event_count, cb));
    for (const ChainEdge& e : sc.truth_chain.edges) {
      if (e.op >= op::kCause && e.op <= op::kPrevent) {
        REQUIRE(sc.events[e.src].support.end < sc.events[e.dst].support.start);
      }
    }
  }
}

TEST_CASE("generate_scenario: beta=0 removes the semantic coupling") {
  WorldConfig cfg = tiny_config();
  cfg.coupling = 0.0;
  const Scenario sc = generate_scenario(cfg, 7);
  // with no coupling and no noise, each feature is exactly its label base
  for (const Event& e : sc.events) {
    const Vec base = detail::label_base_feature(e.label, cfg.feature_dim);
    for (std::size_t i = 0; i < base.size(); ++i)
      REQUIRE(e.feature[i] == Catch::Approx(base[i]).margin(1e-15));
  }
}

TEST_CASE("generate_scenario: infeasible layout is a generation error") {
  WorldConfig cfg;
  cfg.event_count = 8;
  cfg.frame_count = 8;  // valid per config, impossible to lay out
  REQUIRE_THROWS_AS(generate_scenario(cfg, 0), std::runtime_error);
}

TEST_CASE("render_frames: single always-on event with no noise copies the feature") {
  WorldConfig cfg = tiny_config();
  cfg.event_count = 2;
  std::vector<Event> events(1);
  events[0].feature = Vec::of({1.0, -2.0, 0.5, 0.0, 0.0, 0.0, 0.0, 3.0});
  events[0].support = {0.0, 15.0};
  const Mat frames = render_frames(events, cfg, 0);
  for (std::size_t t = 0; t < frames.rows; ++t)
    for (std::size_t c = 0; c < frames.cols; ++c)
      REQUIRE(frames(t, c) == events[0].feature[c]);
}

TEST_CASE("render_frames: empty stream is pure noise with the configured variance") {
  WorldConfig cfg;
  cfg.event_count = 2;
  cfg.frame_count = 10000;
  cfg.feature_dim = 4;
  cfg.noise = 0.3;
  const Mat frames = render_frames({}, cfg, 99);
  std::vector<double> xs(frames.data.begin(), frames.data.end());
  const auto mv = oracles::mean_var(xs);
  REQUIRE(mv.variance == Catch::Approx(cfg.noise * cfg.noise).epsilon(0.05));
}

TEST_CASE("render_frames: overlapping events sum their features") {
  WorldConfig cfg = tiny_config();
  std::vector<Event> events(2);
  events[0].feature = Vec(8, 1.0);
  events[0].support = {0.0, 9.0};
  events[1].feature = Vec(8, 0.25);
  events[1].support = {5.0, 15.0};
  const Mat frames = render_frames(events, cfg, 0);
  REQUIRE(frames(3, 0) == 1.0);
  REQUIRE(frames(7, 0) == 1.25);
  REQUIRE(frames(12, 0) == 0.25);
}

TEST_CASE("make_counterfactual: temporal mode swaps exactly the targeted supports") {
  WorldConfig cfg = tiny_config();
  const Scenario sc = generate_scenario(cfg, 3);
  const Scenario cf = make_counterfactual(sc, CfMode::Temporal, 0);
  // swapped pair: supports exchanged, features bit-identical
  REQUIRE(cf.events[0].support.start == sc.events[1].support.start);
  REQUIRE(cf.events[0].support.end == sc.events[1].support.end);
  REQUIRE(cf.events[1].support.start == sc.events[0].support.start);
  REQUIRE(cf.events[0].feature.data == sc.events[0].feature.data);
  REQUIRE(cf.events[1].feature.data == sc.events[1].feature.data);
  // the cause pair now runs backwards
  REQUIRE(cf.events[0].support.end > cf.events[1].support.start);
  REQUIRE(cf.truth_chain.edges == sc.truth_chain.edges);
}

TEST_CASE("make_counterfactual: temporal mode touches nothing outside the pair") {
  WorldConfig cfg;
  cfg.event_count = 5;
  cfg.frame_count = 30;
  cfg.min_semantic_edges = 1;
  cfg.max_semantic_edges = 1;
  const Scenario sc = generate_scenario(cfg, 11);
  const Scenario cf = make_counterfactual(sc, CfMode::Temporal, 2);
  int changed = 0;
  for (std::size_t j = 0; j < sc.events.size(); ++j) {
    REQUIRE(cf.events[j].feature.data == sc.events[j].feature.data);
    if (cf.events[j].support.start != sc.events[j].support.start ||
        cf.events[j].support.end != sc.events[j].support.end)
      ++changed;
  }
  REQUIRE(changed == 2);
}

TEST_CASE("make_counterfactual: feature swap applied twice restores the original") {
  WorldConfig cfg = tiny_config();
  const Scenario sc = generate_scenario(cfg, 5);
  const Scenario once = make_counterfactual(sc, CfMode::FeatureSwap, 17);
  REQUIRE(once.events[0].feature.data == sc.events[1].feature.data);
  const Scenario twice = make_counterfactual(once, CfMode::FeatureSwap, 17);
  for (std::size_t j = 0; j < sc.events.size(); ++j)
    REQUIRE(twice.events[j].feature.data == sc.events[j].feature.data);
  REQUIRE(twice.frames.data == sc.frames.data);
}

TEST_CASE("make_counterfactual: cross-video picks a look-alike with a disjoint chain") {
  WorldConfig cfg = tiny_config();
  cfg.event_count = 4;
  cfg.frame_count = 24;
  cfg.premise_vocab = 1;
  cfg.action_vocab = 1;
  cfg.object_vocab = 1;  // identical label multisets across the pool
  cfg.vis_threshold = 0.5;
  cfg.logic_threshold = 0.0;

  Scenario sc = generate_scenario(cfg, 0);
  std::vector<Scenario> pool;
  for (std::uint64_t s = 1; s <= 40; ++s) pool.push_back(generate_scenario(cfg, s));

  const Scenario cf = make_counterfactual(sc, CfMode::CrossVideo, 1, &pool);
  REQUIRE(visual_similarity(sc, cf) >= 0.5);
  REQUIRE(logic_similarity(sc, cf) == 0.0);
}

TEST_CASE("make_counterfactual: exhausted cross-video pool is an explicit error") {
  WorldConfig cfg = tiny_config();
  const Scenario sc = generate_scenario(cfg, 0);
  std::vector<Scenario> pool;  // empty
  REQUIRE_THROWS_AS(make_counterfactual(sc, CfMode::CrossVideo, 0, &pool),
                    CounterfactualError);
}

TEST_CASE("density metadata follows the semantic edge count") {
  WorldConfig cfg;
  cfg.event_count = 8;
  cfg.frame_count = 48;
  cfg.min_semantic_edges = 7;
  cfg.max_semantic_edges = 8;
  const Scenario sc = generate_scenario(cfg, 1);
  REQUIRE(sc.semantic_edge_count >= 7);
  REQUIRE(sc.density == "dense");
}
